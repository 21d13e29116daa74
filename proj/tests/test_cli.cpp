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
// End-to-end tests of the command-line binary: exit codes, file outputs,
// and cross-run determinism.

#include <string>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "cli_runner.hpp"
#include "temp.hpp"

namespace {

using testutil::CliResult;
using testutil::run_cli;
using testutil::slurp;
using testutil::TempDir;

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

// A ready-made workspace: token lists, trained models, and a BIO corpus
// whose entity and non-entity vocabularies are cleanly separable.
struct Workspace {
  TempDir dir;
  std::filesystem::path entities, non_entities, entity_lm, non_entity_lm;
  std::filesystem::path gold;

  Workspace() {
    std::string entity_text, non_entity_text;
    const std::vector<std::string> names = {"obama", "merkel", "macron",
                                            "biden", "scholz", "draghi"};
    const std::vector<std::string> words = {"the",  "and",  "with",
                                            "from", "into", "that"};
    for (int rep = 0; rep < 3; ++rep) {
      for (const auto& n : names) entity_text += n + "\n";
      for (const auto& w : words) non_entity_text += w + "\n";
    }
    entities = dir.file("entities.txt", entity_text);
    non_entities = dir.file("non_entities.txt", non_entity_text);
    gold = dir.file("gold.conll",
                    "obama NNP B-PER\n"
                    "and CC O\n"
                    "merkel NNP B-PER\n"
                    "\n"
                    "the DT O\n"
                    "biden NNP B-PER\n");
    entity_lm = dir.path() / "entity.arpa";
    non_entity_lm = dir.path() / "non_entity.arpa";
    const auto t1 = run_cli("train --in " + entities.string() + " --out " +
                                entity_lm.string() + " --order 4",
                            dir.path());
    const auto t2 = run_cli("train --in " + non_entities.string() + " --out " +
                                non_entity_lm.string() + " --order 4",
                            dir.path());
    if (t1.exit_code != 0 || t2.exit_code != 0) {
      throw std::runtime_error("workspace model training failed:\n" +
                               t1.output + t2.output);
    }
  }
};

TEST_CASE("usage errors exit with code 1", "[cli]") {
  TempDir dir;
  CHECK(run_cli("", dir.path()).exit_code == 1);
  CHECK(run_cli("no-such-command", dir.path()).exit_code == 1);
  CHECK(run_cli("train --out x.arpa", dir.path()).exit_code == 1);
  const auto r = run_cli("train --in a --out b --order 0", dir.path());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("--order") != std::string::npos);
  CHECK(run_cli("train --in a --out b --order 65", dir.path()).exit_code == 1);
  // Mutually exclusive cutoff sources.
  CHECK(run_cli("classify --tokens a --out b --entity-lm c --nonentity-lm d"
                " --threshold 5 --tune-dev e",
                dir.path())
            .exit_code == 1);
  // Baselines take no CLM cutoff.
  CHECK(run_cli("classify --tokens a --out b --baseline capitalization"
                " --threshold 5",
                dir.path())
            .exit_code == 1);
  // exact-match needs its entity list.
  CHECK(run_cli("classify --tokens a --out b --baseline exact-match",
                dir.path())
            .exit_code == 1);
  // CLM mode needs both models.
  CHECK(run_cli("classify --tokens a --out b", dir.path()).exit_code == 1);
  CHECK(run_cli("--help", dir.path()).exit_code == 0);
}

TEST_CASE("missing inputs exit with code 2", "[cli]") {
  TempDir dir;
  const auto missing = (dir.path() / "missing.txt").string();
  const auto out = (dir.path() / "out").string();
  CHECK(run_cli("train --in " + missing + " --out " + out, dir.path())
            .exit_code == 2);
  const auto r = run_cli("extract --in " + missing + " --entities-out a" +
                             " --nonentities-out b",
                         dir.path());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("does not exist") != std::string::npos);
}

TEST_CASE("malformed data exits with code 3", "[cli]") {
  TempDir dir;
  const auto bad_utf8 = dir.file("bad.txt", "ok\n\xC3(\n");
  const auto out = (dir.path() / "m.arpa").string();
  const auto r =
      run_cli("train --in " + bad_utf8.string() + " --out " + out, dir.path());
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("data error") != std::string::npos);

  const auto empty = dir.file("empty.txt", "\n\n");
  CHECK(run_cli("train --in " + empty.string() + " --out " + out, dir.path())
            .exit_code == 3);

  const auto bad_tags = dir.file("bad.conll", "x FOO\n");
  CHECK(run_cli("extract --in " + bad_tags.string() +
                    " --entities-out a --nonentities-out b",
                dir.path())
            .exit_code == 3);
}

TEST_CASE("train writes a model and a summary", "[cli]") {
  TempDir dir;
  const auto list = dir.file("toks.txt", "ab\nba\nabba\n");
  const auto model = dir.path() / "m.arpa";
  const auto r = run_cli(
      "train --in " + list.string() + " --out " + model.string() + " --order 3",
      dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("trained order-3 model on 3 tokens") !=
        std::string::npos);
  const std::string arpa = slurp(model);
  CHECK(arpa.find("\\data\\") == 0);
  CHECK(arpa.find("\\end\\") != std::string::npos);

  // Retraining produces byte-identical output.
  const auto model2 = dir.path() / "m2.arpa";
  run_cli("train --in " + list.string() + " --out " + model2.string() +
              " --order 3",
          dir.path());
  CHECK(slurp(model2) == arpa);

  // --dedup collapses repeated tokens before training.
  const auto dup = dir.file("dup.txt", "ab\nab\nab\nba\n");
  const auto nodedup = dir.path() / "nd.arpa";
  const auto dedup = dir.path() / "dd.arpa";
  run_cli("train --in " + dup.string() + " --out " + nodedup.string(),
          dir.path());
  const auto rd = run_cli(
      "train --in " + dup.string() + " --out " + dedup.string() + " --dedup",
      dir.path());
  CHECK(rd.output.find("on 2 tokens") != std::string::npos);
  CHECK(slurp(nodedup) != slurp(dedup));
}

TEST_CASE("extract splits a BIO corpus", "[cli]") {
  TempDir dir;
  const auto corpus = dir.file("c.conll",
                               "-DOCSTART- -X- O\n"
                               "\n"
                               "obama NNP B-PER\n"
                               "spoke VBD O\n"
                               "\n"
                               "merkel NNP B-PER\n"
                               "listened VBD O\n");
  const auto ents = dir.path() / "e.txt";
  const auto rest = dir.path() / "n.txt";
  const auto stats = dir.path() / "stats.tsv";
  const auto r = run_cli("extract --in " + corpus.string() +
                             " --entities-out " + ents.string() +
                             " --nonentities-out " + rest.string() + " --out " +
                             stats.string(),
                         dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(ents) == "obama\nmerkel\n");
  CHECK(slurp(rest) == "spoke\nlistened\n");
  CHECK(slurp(stats) ==
        "entity_tokens\tnon_entity_tokens\tsentences\n2\t2\t2\n");
  CHECK(r.output.find("extracted 2 entity tokens") != std::string::npos);
}

TEST_CASE("classify labels tokens and audits decisions", "[cli]") {
  Workspace ws;
  const auto probe =
      ws.dir.file("probe.txt", "obama\nthe\nmerkel\nwith\nI\n");
  const auto labels = ws.dir.path() / "labels.txt";
  const auto audit = ws.dir.path() / "audit.tsv";
  const auto r = run_cli("classify --entity-lm " + ws.entity_lm.string() +
                             " --nonentity-lm " + ws.non_entity_lm.string() +
                             " --tokens " + probe.string() + " --out " +
                             labels.string() + " --audit-out " + audit.string(),
                         ws.dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(labels) ==
        "ENTITY\nNON_ENTITY\nENTITY\nNON_ENTITY\nNON_ENTITY\n");

  const std::string audit_text = slurp(audit);
  CHECK(audit_text.find("token\tlabel\tentity_ppl\tnon_entity_ppl\trule") ==
        0);
  CHECK(audit_text.find("obama\tENTITY\t") != std::string::npos);
  CHECK(audit_text.find("\tCOMPARISON") != std::string::npos);
  // The single-character token is rejected by the length rule.
  CHECK(audit_text.find("I\tNON_ENTITY\t") != std::string::npos);
  CHECK(audit_text.find("\tLENGTH_1") != std::string::npos);
  CHECK(r.output.find("classified 5 tokens") != std::string::npos);

  SECTION("disabling the length rule changes the attribution") {
    const auto labels2 = ws.dir.path() / "labels2.txt";
    const auto audit2 = ws.dir.path() / "audit2.tsv";
    run_cli("classify --entity-lm " + ws.entity_lm.string() +
                " --nonentity-lm " + ws.non_entity_lm.string() + " --tokens " +
                probe.string() + " --out " + labels2.string() +
                " --audit-out " + audit2.string() + " --no-length-rule",
            ws.dir.path());
    CHECK(slurp(audit2).find("\tLENGTH_1") == std::string::npos);
  }

  SECTION("thread-count invariance") {
    const auto l1 = ws.dir.path() / "t1.txt";
    const auto l8 = ws.dir.path() / "t8.txt";
    run_cli("classify --entity-lm " + ws.entity_lm.string() +
                " --nonentity-lm " + ws.non_entity_lm.string() + " --tokens " +
                probe.string() + " --out " + l1.string() + " --threads 1",
            ws.dir.path());
    run_cli("classify --entity-lm " + ws.entity_lm.string() +
                " --nonentity-lm " + ws.non_entity_lm.string() + " --tokens " +
                probe.string() + " --out " + l8.string() + " --threads 8",
            ws.dir.path());
    CHECK(slurp(l1) == slurp(l8));
  }

  SECTION("CLMTK_THREADS env var is honored") {
    const auto le = ws.dir.path() / "te.txt";
    const auto re = run_cli(
        "classify --entity-lm " + ws.entity_lm.string() + " --nonentity-lm " +
            ws.non_entity_lm.string() + " --tokens " + probe.string() +
            " --out " + le.string(),
        ws.dir.path(), "CLMTK_THREADS=3");
    CHECK(re.exit_code == 0);
    CHECK(slurp(le) == slurp(labels));
  }

  SECTION("invalid threshold value is a data error") {
    CHECK(run_cli("classify --entity-lm " + ws.entity_lm.string() +
                      " --nonentity-lm " + ws.non_entity_lm.string() +
                      " --tokens " + probe.string() + " --out " +
                      (ws.dir.path() / "x.txt").string() + " --threshold=-1",
                  ws.dir.path())
              .exit_code == 3);
  }
}

TEST_CASE("classify baselines", "[cli]") {
  TempDir dir;
  const auto train = dir.file("train.txt", "Obama\nMerkel\n");
  const auto probe = dir.file("probe.txt", "Obama\nobama\nBiden\nMerkel\n");
  const auto out = dir.path() / "labels.txt";

  const auto exact = run_cli(
      "classify --baseline exact-match --train-entities " + train.string() +
          " --tokens " + probe.string() + " --out " + out.string(),
      dir.path());
  REQUIRE(exact.exit_code == 0);
  CHECK(slurp(out) == "ENTITY\nNON_ENTITY\nNON_ENTITY\nENTITY\n");

  const auto caps = run_cli("classify --baseline capitalization --tokens " +
                                probe.string() + " --out " + out.string(),
                            dir.path());
  REQUIRE(caps.exit_code == 0);
  CHECK(slurp(out) == "ENTITY\nNON_ENTITY\nENTITY\nENTITY\n");
}

TEST_CASE("tune writes threshold and dev F1", "[cli]") {
  Workspace ws;
  const auto dev = ws.dir.file("dev.conll",
                               "obama B-PER\n"
                               "merkel B-PER\n"
                               "the O\n"
                               "with O\n");
  const auto out = ws.dir.path() / "tune.tsv";
  const auto r = run_cli("tune --entity-lm " + ws.entity_lm.string() +
                             " --nonentity-lm " + ws.non_entity_lm.string() +
                             " --dev " + dev.string() + " --out " +
                             out.string(),
                         ws.dir.path());
  REQUIRE(r.exit_code == 0);
  const std::string tsv = slurp(out);
  CHECK(tsv.find("threshold\tdev_f1\n") == 0);
  CHECK(tsv.find("1.0000") != std::string::npos);
  CHECK(r.output.find("dev F1 1.0000") != std::string::npos);

  // Degenerate dev set: all one class.
  const auto bad_dev = ws.dir.file("bad_dev.conll", "obama B-PER\n");
  CHECK(run_cli("tune --entity-lm " + ws.entity_lm.string() +
                    " --nonentity-lm " + ws.non_entity_lm.string() + " --dev " +
                    bad_dev.string() + " --out " +
                    (ws.dir.path() / "x.tsv").string(),
                ws.dir.path())
            .exit_code == 3);
}

TEST_CASE("classify can tune its cutoff inline", "[cli]") {
  Workspace ws;
  const auto dev = ws.dir.file("dev.conll",
                               "obama B-PER\n"
                               "merkel B-PER\n"
                               "the O\n"
                               "with O\n");
  const auto probe = ws.dir.file("probe.txt", "scholz\nthat\n");
  const auto labels = ws.dir.path() / "labels.txt";
  const auto r = run_cli("classify --entity-lm " + ws.entity_lm.string() +
                             " --nonentity-lm " + ws.non_entity_lm.string() +
                             " --tokens " + probe.string() + " --out " +
                             labels.string() + " --tune-dev " + dev.string(),
                         ws.dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("tuned threshold") != std::string::npos);
  CHECK(slurp(labels) == "ENTITY\nNON_ENTITY\n");
}

TEST_CASE("eval scores predictions against gold", "[cli]") {
  Workspace ws;
  // Perfect predictions in BIO spelling.
  const auto pred = ws.dir.file("pred.txt", "B-PER\nO\nB-PER\nO\nB-PER\n");
  const auto out = ws.dir.path() / "report.tsv";
  const auto r = run_cli("eval --gold " + ws.gold.string() + " --pred " +
                             pred.string() + " --out " + out.string(),
                         ws.dir.path());
  REQUIRE(r.exit_code == 0);
  const std::string tsv = slurp(out);
  CHECK(tsv.find("3\t0\t0\t2\t1.0000\t1.0000\t1.0000\t1.0000\tfalse") !=
        std::string::npos);
  CHECK(r.output.find("F1 1.0000") != std::string::npos);

  SECTION("count mismatch is a data error") {
    const auto short_pred = ws.dir.file("short.txt", "B-PER\nO\n");
    CHECK(run_cli("eval --gold " + ws.gold.string() + " --pred " +
                      short_pred.string() + " --out " +
                      (ws.dir.path() / "x.tsv").string(),
                  ws.dir.path())
              .exit_code == 3);
  }
  SECTION("unseen restriction with jsonl output") {
    // Training entities cover obama and merkel; only biden is unseen.
    const auto seen = ws.dir.file("seen.txt", "obama\nmerkel\n");
    const auto jout = ws.dir.path() / "report.jsonl";
    const auto rj = run_cli("eval --gold " + ws.gold.string() + " --pred " +
                                pred.string() + " --out " + jout.string() +
                                " --unseen-against " + seen.string() +
                                " --format jsonl",
                            ws.dir.path());
    REQUIRE(rj.exit_code == 0);
    const std::string json = slurp(jout);
    CHECK(json.find("\"true_pos\":1") != std::string::npos);
    CHECK(json.find("\"restricted_to_unseen\":true") != std::string::npos);
    CHECK(rj.output.find("(unseen-restricted)") != std::string::npos);
  }
  SECTION("label spellings 1/0 and ENTITY/NON_ENTITY work") {
    const auto alt =
        ws.dir.file("alt.txt", "ENTITY\n0\n1\nNON_ENTITY\nENTITY\n");
    const auto r2 = run_cli("eval --gold " + ws.gold.string() + " --pred " +
                                alt.string() + " --out " + out.string(),
                            ws.dir.path());
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(out).find("1.0000") != std::string::npos);
  }
  SECTION("unknown label spelling is a data error") {
    const auto bad = ws.dir.file("badpred.txt", "B-PER\nO\nMAYBE\nO\nB-PER\n");
    const auto r3 = run_cli("eval --gold " + ws.gold.string() + " --pred " +
                                bad.string() + " --out " +
                                (ws.dir.path() / "x.tsv").string(),
                            ws.dir.path());
    CHECK(r3.exit_code == 3);
    CHECK(r3.output.find("MAYBE") != std::string::npos);
  }
}

TEST_CASE("annotate adds feature columns end to end", "[cli]") {
  Workspace ws;
  const auto spec = ws.dir.file(
      "features.spec", "is_name = entity.arpa non_entity.arpa\n");
  const auto in = ws.dir.file("in.conll",
                              "obama NNP B-PER\n"
                              "and CC O\n"
                              "\n"
                              "merkel NNP B-PER\n");
  const auto out = ws.dir.path() / "out.conll";
  const auto r = run_cli("annotate --in " + in.string() + " --out " +
                             out.string() + " --spec " + spec.string(),
                         ws.dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(out) ==
        "obama NNP B-PER 1\n"
        "and CC O 0\n"
        "\n"
        "merkel NNP B-PER 1\n");
  CHECK(r.output.find("1 feature column(s)") != std::string::npos);
}

TEST_CASE("histogram reports perplexity mass", "[cli]") {
  Workspace ws;
  const auto probe = ws.dir.file("probe.txt", "obama\nmerkel\nthe\nwith\n");
  const auto out = ws.dir.path() / "hist.tsv";
  const auto r = run_cli("histogram --model " + ws.entity_lm.string() +
                             " --tokens " + probe.string() + " --out " +
                             out.string() + " --bins 5",
                         ws.dir.path());
  REQUIRE(r.exit_code == 0);
  const std::string tsv = slurp(out);
  // Header plus one row per bin: 5 edges make 6 bins.
  CHECK(count_lines(tsv) == 7);
  CHECK(tsv.find("bin_lo\tbin_hi\tpercent\n") == 0);
  CHECK(tsv.find("\tinf\t") != std::string::npos);
  CHECK(r.output.find("mean perplexity") != std::string::npos);

  const auto jout = ws.dir.path() / "hist.jsonl";
  const auto rj = run_cli("histogram --model " + ws.entity_lm.string() +
                              " --tokens " + probe.string() + " --out " +
                              jout.string() + " --format jsonl",
                          ws.dir.path());
  REQUIRE(rj.exit_code == 0);
  CHECK(slurp(jout).find("\"bin_edges\"") != std::string::npos);
}

TEST_CASE("full pipeline reaches perfect F1 on separable data", "[cli]") {
  TempDir dir;
  // Build a corpus, extract lists, train models, classify the same corpus
  // tokens, and evaluate. Entity and non-entity alphabets are disjoint, so
  // every multi-character token classifies correctly.
  std::string corpus_text;
  const std::vector<std::string> names = {"aab", "abba", "baab", "abab"};
  const std::vector<std::string> words = {"xyz", "zyx", "xxyy", "yzzy"};
  for (int rep = 0; rep < 4; ++rep) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      corpus_text += names[i] + " B-PER\n" + words[i] + " O\n";
      if (i % 2 == 1) corpus_text += "\n";
    }
  }
  const auto corpus = dir.file("corpus.conll", corpus_text);
  const auto ents = dir.path() / "e.txt";
  const auto rest = dir.path() / "n.txt";
  REQUIRE(run_cli("extract --in " + corpus.string() + " --entities-out " +
                      ents.string() + " --nonentities-out " + rest.string(),
                  dir.path())
              .exit_code == 0);

  const auto elm = dir.path() / "e.arpa";
  const auto nlm = dir.path() / "n.arpa";
  REQUIRE(run_cli("train --in " + ents.string() + " --out " + elm.string(),
                  dir.path())
              .exit_code == 0);
  REQUIRE(run_cli("train --in " + rest.string() + " --out " + nlm.string(),
                  dir.path())
              .exit_code == 0);

  // The corpus tokens in order, as a classification input.
  std::string probe_text;
  for (int rep = 0; rep < 4; ++rep) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      probe_text += names[i] + "\n" + words[i] + "\n";
    }
  }
  const auto probe = dir.file("probe.txt", probe_text);
  const auto labels = dir.path() / "labels.txt";
  REQUIRE(run_cli("classify --entity-lm " + elm.string() + " --nonentity-lm " +
                      nlm.string() + " --tokens " + probe.string() + " --out " +
                      labels.string(),
                  dir.path())
              .exit_code == 0);
  CHECK(count_lines(slurp(labels)) == 32);

  const auto report = dir.path() / "report.tsv";
  const auto r = run_cli("eval --gold " + corpus.string() + " --pred " +
                             labels.string() + " --out " + report.string(),
                         dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("F1 1.0000") != std::string::npos);
  CHECK(slurp(report).find("\t1.0000\t1.0000\t1.0000\t") !=
        std::string::npos);
}

}  // namespace
