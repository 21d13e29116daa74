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
//
// UTF-8 handling and deterministic token normalization. Decoding is strict
// (overlong forms, surrogates, and out-of-range scalars are rejected);
// canonical composition and character classification are delegated to ICU.

#ifndef CLMTK_TEXT_HPP_
#define CLMTK_TEXT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/bytestream.h>

#include "clmtk/errors.hpp"

namespace clmtk {

// Normalization applied to every token on ingestion. Idempotent by
// construction: stripping happens before composition, composition never
// creates boundary whitespace, and NFC is a fixpoint of itself.
struct NormalizationPolicy {
  bool compose = true;  // Unicode canonical composition (NFC)
  bool strip = true;    // drop surrounding White_Space code points
};

// Appends `cp` to `out` as UTF-8. `cp` must be a Unicode scalar value.
inline void utf8_append(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string utf8_encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) utf8_append(cp, out);
  return out;
}

// Decodes `s` into `out`. Returns the byte offset of the first invalid
// sequence, or nullopt on success. Rejects overlong encodings, surrogate
// code points, and values above U+10FFFF.
inline std::optional<std::size_t> utf8_decode_into(std::string_view s,
                                                   std::u32string& out) {
  out.clear();
  out.reserve(s.size());
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const unsigned char b = p[i];
    char32_t cp = 0;
    int len = 0;
    if (b < 0x80) {
      cp = b;
      len = 1;
    } else if ((b & 0xE0) == 0xC0) {
      cp = b & 0x1F;
      len = 2;
    } else if ((b & 0xF0) == 0xE0) {
      cp = b & 0x0F;
      len = 3;
    } else if ((b & 0xF8) == 0xF0) {
      cp = b & 0x07;
      len = 4;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (int k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    static constexpr char32_t kMinForLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLen[len]) return i;          // overlong form
    if (cp >= 0xD800 && cp <= 0xDFFF) return i;  // surrogate
    if (cp > 0x10FFFF) return i;
    out.push_back(cp);
    i += len;
  }
  return std::nullopt;
}

inline std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  if (auto bad = utf8_decode_into(s, out)) {
    throw DataError("invalid UTF-8 byte sequence at byte offset " +
                    std::to_string(*bad));
  }
  return out;
}

// Byte offset of the first invalid UTF-8 sequence, if any.
inline std::optional<std::size_t> utf8_find_invalid(std::string_view s) {
  std::u32string scratch;
  return utf8_decode_into(s, scratch);
}

// Number of Unicode scalar values in a valid UTF-8 string.
inline std::size_t utf8_length(std::string_view s) {
  return utf8_decode(s).size();
}

namespace detail {

inline const icu::Normalizer2& nfc_normalizer() {
  UErrorCode ec = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(ec);
  if (U_FAILURE(ec) || n == nullptr) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  return *n;
}

// NFC over already-validated UTF-8.
inline std::string nfc(std::string_view utf8) {
  std::string out;
  icu::StringByteSink<std::string> sink(&out);
  UErrorCode ec = U_ZERO_ERROR;
  nfc_normalizer().normalizeUTF8(
      0, icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())),
      sink, nullptr, ec);
  if (U_FAILURE(ec)) throw DataError("unicode normalization failed");
  return out;
}

}  // namespace detail

// Applies `policy` to `raw`. Throws DataError on invalid UTF-8.
inline std::string normalize(std::string_view raw,
                             const NormalizationPolicy& policy) {
  std::u32string cps = utf8_decode(raw);
  std::size_t lo = 0, hi = cps.size();
  if (policy.strip) {
    while (lo < hi && u_isUWhiteSpace(static_cast<UChar32>(cps[lo]))) ++lo;
    while (hi > lo && u_isUWhiteSpace(static_cast<UChar32>(cps[hi - 1]))) --hi;
  }
  std::string out = utf8_encode(std::u32string_view(cps).substr(lo, hi - lo));
  if (policy.compose) out = detail::nfc(out);
  return out;
}

// First scalar value of a valid UTF-8 string, if nonempty.
inline std::optional<char32_t> utf8_first(std::string_view s) {
  if (s.empty()) return std::nullopt;
  const unsigned char lead = static_cast<unsigned char>(s.front());
  std::size_t len = 1;
  if ((lead & 0xE0) == 0xC0) len = 2;
  else if ((lead & 0xF0) == 0xE0) len = 3;
  else if ((lead & 0xF8) == 0xF0) len = 4;
  std::u32string cps = utf8_decode(s.substr(0, std::min(len, s.size())));
  if (cps.empty()) return std::nullopt;
  return cps.front();
}

// True iff the first character is an uppercase or titlecase letter (general
// categories Lu and Lt). Caseless scripts therefore always yield false.
inline bool starts_with_capital(std::string_view token) {
  auto first = utf8_first(token);
  if (!first) return false;
  const int8_t cat = u_charType(static_cast<UChar32>(*first));
  return cat == U_UPPERCASE_LETTER || cat == U_TITLECASE_LETTER;
}

}  // namespace clmtk

#endif  // CLMTK_TEXT_HPP_
