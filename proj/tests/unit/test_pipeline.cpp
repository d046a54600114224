// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "simfuse/error.hpp"
#include "simfuse/pipeline.hpp"
#include "simfuse/runio.hpp"
#include "test_util.hpp"

using namespace simfuse;
using simfuse::testing::slurp;
using simfuse::testing::spit;
using simfuse::testing::TempDir;

namespace {

SynthSpec tiny() {
    SynthSpec s;
    s.n_queries = 12;
    s.n_docs = 150;
    s.dim = 8;
    s.n_models = 2;
    s.noise = 0.3;
    s.seed = 11;
    return s;
}

}  // namespace

TEST_CASE("gen-synth -> search -> tune -> fuse -> eval") {
    TempDir dir;
    cmd_gen_synth(tiny(), dir.path(), 40, 10, 1);
    const auto manifest = load_manifest(dir / "manifest.json");
    CHECK(manifest.base_dir == dir.path());
    CHECK(manifest.models.size() == 2);

    const auto runs = cmd_search({manifest, {}, std::nullopt, 1});
    REQUIRE(runs.size() == 2);
    CHECK(runs[0] == dir / "runs/model1.tsv");
    const auto table = read_run_file(runs[1]);
    CHECK(table.size() == 12);
    CHECK(table[0].entries.size() == 40);

    const auto tuned = cmd_tune({manifest, {}, std::nullopt, std::nullopt, std::nullopt, 5, 1});
    CHECK(tuned.config_path == dir / "tuned.json");
    CHECK(tuned.result.evaluated == 5);
    const auto reloaded = load_fusion_config(tuned.config_path);
    CHECK(reloaded.weights == tuned.result.weights);
    CHECK(slurp(tuned.config_path).find("\"validation_map\"") != std::string::npos);

    FuseRequest fr{manifest, {}, std::nullopt, std::nullopt, std::nullopt, 1};
    fr.overrides.config = tuned.config_path;
    const auto fused = cmd_fuse(fr);
    CHECK(fused.queries == 12);
    const std::string submission = slurp(fused.submission);
    CHECK(std::count(submission.begin(), submission.end(), '\n') == 12);
    CHECK(submission.find('\t') == std::string::npos);

    // The tuned MAP is reproduced by evaluating the fused outputs.
    const auto report = cmd_eval({fused.fused_run, dir / "qrels.tsv", 10, std::nullopt});
    CHECK(report.map == doctest::Approx(tuned.result.map).epsilon(1e-12));
    spit(dir / "qids.txt", encode_id_sidecar(manifest_query_ids(manifest)));
    const auto sub_report = cmd_eval({fused.submission, dir / "qrels.tsv", 10, dir / "qids.txt"});
    CHECK(sub_report.map == report.map);
    CHECK_THROWS_AS(cmd_eval({fused.submission, dir / "qrels.tsv", 10, std::nullopt}), Error);

    // Resubmitting the fused run reproduces the submission bytes.
    cmd_submit({fused.fused_run, manifest_query_ids(manifest), 10, dir / "again.txt"});
    CHECK(slurp(dir / "again.txt") == submission);

    // Thread count does not change any output byte.
    FuseRequest fr4 = fr;
    fr4.threads = 4;
    fr4.submission = dir / "sub4.txt";
    fr4.fused_run = dir / "fused4.tsv";
    cmd_fuse(fr4);
    CHECK(slurp(dir / "sub4.txt") == submission);
    CHECK(slurp(dir / "fused4.tsv") == slurp(fused.fused_run));

    TuneRequest bad{manifest, {}, std::nullopt, std::nullopt, std::nullopt, 1, 1};
    CHECK_THROWS_WITH_AS(cmd_tune(bad), "grid resolution must be >= 2", Error);
}

TEST_CASE("config overrides and errors") {
    TempDir dir;
    cmd_gen_synth(tiny(), dir.path(), 40, 10, 1);
    const auto manifest = load_manifest(dir / "manifest.json");
    ConfigOverrides o;
    o.k = 50;
    CHECK_THROWS_WITH_AS(resolve_fusion_config(manifest, o), "M (40) must be >= k (50)", Error);
    o.M = 60;
    CHECK(resolve_fusion_config(manifest, o).M == 60);
    CHECK_THROWS_AS(cmd_gen_synth(tiny(), dir / "x", 5, 10, 1), Error);

    // A model whose doc table differs from the first model's.
    auto broken = manifest;
    const auto docs = read_embf(dir / "model2.docs.embf");
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < docs.ids.size(); ++i) ids.push_back(i == 3 ? "other" : docs.ids[i]);
    write_embf(dir / "alt.docs.embf", docs.matrix, IdTable(std::move(ids)));
    broken.models[1].docs = "alt.docs.embf";
    CHECK_THROWS_WITH_AS(cmd_search({broken, {}, std::nullopt, 1}), doctest::Contains("doc id table mismatch"), Error);

    auto missing = manifest;
    missing.models[0].queries = "nope.embf";
    CHECK_THROWS_WITH_AS(cmd_search({missing, {}, std::nullopt, 1}), doctest::Contains("model 'model1'"), Error);

    // fuse without runs on disk
    CHECK_THROWS_AS(cmd_fuse({manifest, {}, dir / "empty_runs", std::nullopt, std::nullopt, 1}), Error);
}

TEST_CASE("eval of a hand-written run") {
    TempDir dir;
    spit(dir / "run.tsv", "q1\ta\t1\t0.9\nq1\tx\t2\t0.8\nq1\tc\t3\t0.7\n");
    spit(dir / "qrels.tsv", "q1\ta\nq1\tc\n");
    const auto report = cmd_eval({dir / "run.tsv", dir / "qrels.tsv", 20, std::nullopt});
    CHECK(std::abs(report.map - 0.8333333333) <= 1e-9);
    std::ostringstream out;
    print_report(out, report, true);
    CHECK(out.str() == "queries_judged\t1\nqueries_in_run\t1\nMAP@20\t0.833333\nRecall@20\t1.000000\nAP@20\tq1\t0.833333\n");
}

TEST_CASE("ingest renders prompts as JSONL") {
    TempDir dir;
    spit(dir / "q.jsonl", "{\"id\":\"q1\",\"title\":\"T\",\"body\":\"B\"}\n\n{\"id\":\"q2\",\"title\":\"U\",\"body\":\"\"}\n");
    std::ostringstream out;
    IngestRequest req{dir / "q.jsonl", true, 3, 4, std::nullopt, std::nullopt};
    CHECK(cmd_ingest(req, out) == 2);
    CHECK(out.str() ==
          "{\"id\":\"q1\",\"text\":\"Instruct: Given a question, retrieve passages that answer the question.\\nQuery: T. B\"}\n"
          "{\"id\":\"q2\",\"text\":\"Instruct: Given a question, retrieve passages that answer the question.\\nQuery: U. \"}\n");

    spit(dir / "d.jsonl", "{\"id\":\"d1\",\"title\":\"Paper\",\"abstract\":\"Text\"}\n");
    std::ostringstream docs;
    CHECK(cmd_ingest({dir / "d.jsonl", false, 1, 1, std::nullopt, std::nullopt}, docs) == 1);
    CHECK(docs.str() == "{\"id\":\"d1\",\"text\":\"Paper\\nText\"}\n");

    std::ostringstream sink;
    CHECK_THROWS_WITH_AS(cmd_ingest({dir / "q.jsonl", true, 9, 1, std::nullopt, std::nullopt}, sink), "unknown tag 9",
                         Error);
    spit(dir / "bad.jsonl", "{\"id\":\"q1\"}\n");
    CHECK_THROWS_WITH_AS(cmd_ingest({dir / "bad.jsonl", true, 1, 1, std::nullopt, std::nullopt}, sink),
                         "line 1: query has neither title nor body", Error);
}
