// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "simfuse/error.hpp"
#include "simfuse/evalkit.hpp"
#include "test_util.hpp"

using namespace simfuse;

namespace {

/// Position-based restatement: for each relevant doc found within the cutoff,
/// precision at its rank; summed and divided by min(|rel|, k).
double ap_oracle(const std::vector<std::string>& ranked, const RelevantSet& rel, std::size_t k) {
    if (rel.empty()) return 0.0;
    std::vector<std::size_t> positions;
    for (const auto& d : rel) {
        auto it = std::find(ranked.begin(), ranked.end(), d);
        const auto pos = static_cast<std::size_t>(it - ranked.begin());
        if (it != ranked.end() && pos < k) positions.push_back(pos + 1);
    }
    std::sort(positions.begin(), positions.end());
    double sum = 0.0;
    for (std::size_t h = 0; h < positions.size(); ++h) sum += static_cast<double>(h + 1) / static_cast<double>(positions[h]);
    return sum / static_cast<double>(std::min(rel.size(), k));
}

}  // namespace

TEST_CASE("AP@k fixtures") {
    const std::vector<std::string> ranked{"a", "x", "c", "y"};
    CHECK(std::abs(average_precision_at_k(ranked, {"a", "c"}, 3) - 0.8333333333) <= 1e-9);
    CHECK(std::abs(average_precision_at_k(ranked, {"a", "c"}, 20) - (1.0 + 2.0 / 3.0) / 2.0) < 1e-15);
    CHECK(average_precision_at_k(ranked, {}, 20) == 0.0);
    CHECK(average_precision_at_k(ranked, {"a"}, 1) == 1.0);
    CHECK(average_precision_at_k(ranked, {"zzz"}, 4) == 0.0);
    // The denominator is capped by k, so three relevant docs at k=1 still allow 1.0.
    CHECK(average_precision_at_k(ranked, {"a", "c", "y"}, 1) == 1.0);
    CHECK(average_precision_at_k(std::vector<std::string>{}, {"a"}, 5) == 0.0);
    CHECK_THROWS_AS(average_precision_at_k(ranked, {"a"}, 0), Error);
    const std::vector<std::string> dup{"a", "b", "a"};
    CHECK_THROWS_AS(average_precision_at_k(dup, {"a"}, 3), Error);
}

TEST_CASE("perfect ranking scores 1") {
    const std::vector<std::string> ranked{"r1", "r2", "r3", "n1", "n2"};
    for (std::size_t k = 1; k <= 5; ++k) CHECK(average_precision_at_k(ranked, {"r1", "r2", "r3"}, k) == 1.0);
}

TEST_CASE("recall@k") {
    const std::vector<std::string> ranked{"a", "x", "c", "e"};
    CHECK(recall_at_k(ranked, {"a", "c", "e"}, 3) == doctest::Approx(2.0 / 3.0));
    CHECK(recall_at_k(ranked, {"a", "c", "e"}, 4) == 1.0);
    CHECK_THROWS_AS(recall_at_k(ranked, {}, 3), Error);
}

TEST_CASE("AP matches the position oracle and is monotone in k on random rankings") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        std::vector<std::string> ranked;
        for (std::size_t i = 0; i < n; ++i) ranked.push_back("d" + std::to_string(i));
        std::shuffle(ranked.begin(), ranked.end(), rng);
        RelevantSet rel;
        const std::size_t nrel = rng() % 8;
        for (std::size_t i = 0; i < nrel; ++i) rel.insert("d" + std::to_string(rng() % (n + 5)));
        for (std::size_t k = 1; k <= n + 2; ++k) {
            CHECK(std::abs(average_precision_at_k(ranked, rel, k) - ap_oracle(ranked, rel, k)) <= 1e-12);
        }
        // Once k >= |rel|, the denominator is fixed and AP can only grow with k.
        for (std::size_t k = std::max<std::size_t>(rel.size(), 1); k + 1 <= n + 2; ++k) {
            CHECK(average_precision_at_k(ranked, rel, k) <= average_precision_at_k(ranked, rel, k + 1) + 1e-15);
        }
    }
}

TEST_CASE("MAP over qrels queries") {
    const RunRanking run{{"q1", {"a", "x", "c"}}, {"q2", {"b", "y"}}};
    const Qrels qrels{{"q1", {"a", "c"}}, {"q2", {"y"}}};
    CHECK(map_at_k(run, qrels, 3) == doctest::Approx(((1.0 + 2.0 / 3.0) / 2.0 + 0.5) / 2.0));

    // A judged query missing from the run contributes 0.
    Qrels with_missing = qrels;
    with_missing["q3"] = {"z"};
    CHECK(map_at_k(run, with_missing, 3) == doctest::Approx(((1.0 + 2.0 / 3.0) / 2.0 + 0.5) / 3.0));

    // Unjudged run queries are ignored.
    RunRanking extra = run;
    extra["q9"] = {"a"};
    CHECK(map_at_k(extra, qrels, 3) == map_at_k(run, qrels, 3));

    CHECK_THROWS_WITH_AS(map_at_k(run, Qrels{}, 3), "empty qrels", Error);
    CHECK_THROWS_WITH_AS(map_at_k(run, Qrels{{"other", {"a"}}}, 3), doctest::Contains("empty intersection"), Error);
}

TEST_CASE("evaluate report") {
    const RunRanking run{{"q1", {"a", "x", "c"}}, {"q2", {"b", "y"}}};
    const Qrels qrels{{"q1", {"a", "c"}}, {"q2", {"y"}}, {"q3", {"z"}}};
    const auto report = evaluate(run, qrels, 2);
    CHECK(report.k == 2);
    CHECK(report.judged_queries == 3);
    CHECK(report.matched_queries == 2);
    REQUIRE(report.per_query.size() == 3);
    CHECK(report.per_query[0].query_id == "q1");
    CHECK(report.per_query[0].ap == 0.5);
    CHECK(report.per_query[0].recall == 0.5);
    CHECK(report.per_query[1].ap == 0.5);
    CHECK(report.per_query[2].in_run == false);
    CHECK(report.map == doctest::Approx(1.0 / 3.0));
    CHECK(report.mean_recall == doctest::Approx((0.5 + 1.0 + 0.0) / 3.0));
}

TEST_CASE("qrels I/O") {
    std::istringstream in("q1\ta\nq1\tb\n\nq2\tc\n");
    const auto qrels = read_qrels(in);
    CHECK(qrels.size() == 2);
    CHECK(qrels.at("q1") == RelevantSet{"a", "b"});
    std::istringstream bad("q1 a\n");
    CHECK_THROWS_AS(read_qrels(bad), Error);

    simfuse::testing::TempDir dir;
    write_qrels_file(dir / "qrels.tsv", qrels);
    CHECK(simfuse::testing::slurp(dir / "qrels.tsv") == "q1\ta\nq1\tb\nq2\tc\n");
    CHECK(read_qrels_file(dir / "qrels.tsv") == qrels);
    CHECK_THROWS_AS(read_qrels_file(dir / "missing.tsv"), Error);
}
