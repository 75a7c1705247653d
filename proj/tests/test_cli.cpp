// Copyright 2026 The Causal Retrieval Authors
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

#include <doctest.h>

#include <nlohmann/json.hpp>

#include "causal/checkpoint.hpp"
#include "causal/embedding_io.hpp"
#include "support/pipeline.hpp"

using pipeline::cli;
using pipeline::slurp;

TEST_CASE("full pipeline twice gives byte-identical artifacts") {
  const auto a = pipeline::fresh_dir("cli_a"), b = pipeline::fresh_dir("cli_b");
  const auto ra = pipeline::run_all(a, 2);
  REQUIRE_MESSAGE(ra.code == 0, ra.err);
  REQUIRE(pipeline::run_all(b, 2).code == 0);
  const auto fa = pipeline::artifacts(a), fb = pipeline::artifacts(b);
  CHECK(fa.size() >= 14);
  CHECK(fa.count("model.ckpt.manifest.json") == 1);
  CHECK(fa.count("data/manifest.json") == 1);
  for (const auto& [name, bytes] : fa) {
    INFO(name);
    REQUIRE(fb.count(name) == 1);
    CHECK(bytes == fb.at(name));
  }

  const auto metrics = nlohmann::json::parse(slurp(a / "metrics.json"));
  CHECK(metrics["n_queries"] == 50);
  CHECK(metrics["hit"]["1"].get<double>() >= 0.0);
  CHECK(metrics["fingerprint"].get<std::string>().size() == 64);
  const auto manifest = nlohmann::json::parse(slurp(a / "model.ckpt.manifest.json"));
  CHECK(manifest["command"] == "train");
  CHECK(manifest["flags"]["--epochs"] == "2");
  CHECK(manifest["inputs"].size() == 2);
  const auto summary = nlohmann::json::parse(slurp(a / "index.json"));
  CHECK(summary["d"] == 16);
}

TEST_CASE("exit codes") {
  const auto dir = pipeline::fresh_dir("cli_codes");
  const std::string d = dir.string();
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"no-such-command"}).code == 2);
  CHECK(cli({"synth", "--n-pairs", "0", "--out", d + "/p.jsonl"}).code == 2);
  REQUIRE(cli({"synth", "--n-pairs", "40", "--out", d + "/p.jsonl"}).code == 0);
  CHECK(cli({"train", "--train", d + "/p.jsonl", "--val", d + "/p.jsonl", "--out", d + "/m.ckpt", "--lr", "-1"}).code == 2);
  CHECK(cli({"train", "--train", d + "/missing.jsonl", "--val", d + "/p.jsonl", "--out", d + "/m.ckpt"}).code == 3);
  std::ofstream(d + "/junk.ckpt") << "not a checkpoint";
  CHECK(cli({"embed", "--checkpoint", d + "/junk.ckpt", "--pool", d + "/p.jsonl", "--out", d + "/x.emb"}).code == 3);
  CHECK(cli({"retrieve", "--checkpoint", d + "/junk.ckpt", "--queries", d + "/p.jsonl", "--embeddings",
             d + "/x.emb", "--out", d + "/r.jsonl"}).code == 2);
}

TEST_CASE("hparams preset flag and explicit overrides") {
  const auto dir = pipeline::fresh_dir("cli_preset");
  const std::string d = dir.string();
  REQUIRE(cli({"synth", "--n-pairs", "80", "--cause-vocab", "24", "--effect-vocab", "24", "--out", d + "/p.jsonl"}).code == 0);
  REQUIRE(cli({"prepare", "--pairs", d + "/p.jsonl", "--out-dir", d}).code == 0);
  const auto r = cli({"train", "--train", d + "/train.jsonl", "--val", d + "/val.jsonl", "--out", d + "/m.ckpt",
                      "--paper-hparams", "--epochs", "1", "--d", "8", "--d-emb", "8", "--semantic-epochs", "1"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto m = nlohmann::json::parse(slurp(dir / "m.ckpt.manifest.json"));
  CHECK(m["resolved"]["learning_rate"] == 1e-5);
  CHECK(m["resolved"]["batch_size"] == 64);
  CHECK(m["resolved"]["epochs"] == 1);
  CHECK(m["flags"]["--paper-hparams"] == "true");
}

TEST_CASE("eval over three seeds, fuzzy rates, ablate and export") {
  const auto dir = pipeline::fresh_dir("cli_multi");
  const std::string d = dir.string();
  REQUIRE(pipeline::run_all(dir, 1).code == 0);
  const auto r = cli({"eval", "--results", d + "/results.jsonl", "--results", d + "/results.jsonl", "--results",
                      d + "/results.jsonl", "--seeds", "1,2,3", "--pool", d + "/data/pool.jsonl", "--fuzzy-recall",
                      "0.8", "--out", d + "/m3.json"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto m3 = nlohmann::json::parse(slurp(dir / "m3.json"));
  REQUIRE(m3["seeds"].size() == 3);
  CHECK(m3["seeds"][2]["seed"] == 3);
  CHECK(m3["hit"]["10"] == m3["seeds"][0]["hit"]["10"]);
  CHECK(m3["fuzzy_hit"]["1"].get<double>() >= m3["hit"]["1"].get<double>());
  CHECK(cli({"eval", "--results", d + "/results.jsonl", "--results", d + "/results.jsonl", "--seeds", "1", "--pool",
             d + "/data/pool.jsonl", "--out", d + "/bad.json"}).code == 2);

  const auto ab = cli({"ablate", "--train", d + "/data/train.jsonl", "--val", d + "/data/val.jsonl", "--test",
                       d + "/data/test.jsonl", "--effect-distractors", d + "/distractors.txt", "--betas", "0",
                       "--epochs", "1", "--d", "8", "--d-emb", "8", "--semantic-epochs", "1", "--out", d + "/ab.json"});
  REQUIRE_MESSAGE(ab.code == 0, ab.err);
  CHECK(nlohmann::json::parse(slurp(dir / "ab.json"))["rows"].size() == 1);

  std::ofstream(d + "/empty.jsonl").close();
  REQUIRE(cli({"export-embeddings", "--checkpoint", d + "/model.ckpt", "--pairs", d + "/empty.jsonl", "--out",
               d + "/empty.tsv"}).code == 0);
  const std::string tsv = slurp(dir / "empty.tsv");
  CHECK(tsv.rfind("id\trole\tv1\t", 0) == 0);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 1);
  REQUIRE(cli({"export-embeddings", "--checkpoint", d + "/model.ckpt", "--pairs", d + "/data/test.jsonl", "--out",
               d + "/test.tsv"}).code == 0);
  const std::string full = slurp(dir / "test.tsv");
  CHECK(std::count(full.begin(), full.end(), '\n') == 1 + 4 * 50);
}

TEST_CASE("semantic encoder reused from a checkpoint or imported from word vectors") {
  const auto dir = pipeline::fresh_dir("cli_semfrom");
  const std::string d = dir.string();
  REQUIRE(pipeline::run_all(dir, 1).code == 0);
  const auto base = causal::load_checkpoint(dir / "model.ckpt");
  auto r = cli({"train", "--train", d + "/data/train.jsonl", "--val", d + "/data/val.jsonl", "--out", d + "/m2.ckpt",
                "--epochs", "1", "--semantic-from", d + "/model.ckpt"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto reused = causal::load_checkpoint(dir / "m2.ckpt");
  CHECK(reused.semantic == base.semantic);
  CHECK(reused.vocab == base.vocab);
  CHECK(reused.config.d == 16);
  CHECK(reused.config.d_emb == 16);

  {
    causal::EmbeddingWriter w(dir / "words.emb", {2, 3, causal::Similarity::kDot});
    w.write(base.vocab.token(2), std::vector<double>{1, 0, 0});
    w.write(base.vocab.token(3), std::vector<double>{0, 1, 0});
    w.finish();
  }
  r = cli({"train", "--train", d + "/data/train.jsonl", "--val", d + "/data/val.jsonl", "--out", d + "/m3.ckpt",
           "--epochs", "1", "--semantic-from", d + "/words.emb"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto imported = causal::load_checkpoint(dir / "m3.ckpt");
  CHECK(imported.semantic.dim() == 3);
  CHECK(imported.cause.dim() == 3);
  CHECK(imported.semantic.embedding(3, 1) == 1.0);
}
