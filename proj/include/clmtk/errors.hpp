// Copyright 2026 The clmtk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLMTK_ERRORS_HPP_
#define CLMTK_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace clmtk {

// Filesystem-level failures: missing files, unreadable or unwritable paths.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed content: bad UTF-8, unparseable tags, inconsistent model files,
// degenerate inputs. The message carries file/line context where available.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace clmtk

#endif  // CLMTK_ERRORS_HPP_
