// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "simfuse/error.hpp"
#include "simfuse/runio.hpp"
#include "test_util.hpp"

using namespace simfuse;
using simfuse::testing::TempDir;

TEST_CASE("score formatting is fixed with six digits") {
    CHECK(format_score(1.0) == "1.000000");
    CHECK(format_score(0.1234564) == "0.123456");
    CHECK(format_score(-0.25) == "-0.250000");
    CHECK(format_score(-1e-9) == "0.000000");
}

TEST_CASE("candidate run layout") {
    const IdTable qids({"q1", "q2"});
    const IdTable dids({"a", "b", "c"});
    std::vector<CandidateSet> sets{{0, {{2, 0.5f}, {0, 0.25f}}}, {1, {{1, 1.0f}}}};
    std::ostringstream out;
    write_candidate_run(out, sets, qids, dids);
    CHECK(out.str() == "q1\tc\t1\t0.500000\nq1\ta\t2\t0.250000\nq2\tb\t1\t1.000000\n");
}

TEST_CASE("read_run orders by rank and keeps query order") {
    std::istringstream in("q2\tb\t2\t0.1\nq2\ta\t1\t0.9\n\nq1\tc\t1\t0.3\r\n");
    const auto run = read_run(in);
    REQUIRE(run.size() == 2);
    CHECK(run[0].query_id == "q2");
    CHECK(run[0].entries[0].doc_id == "a");
    CHECK(run[0].entries[1].doc_id == "b");
    CHECK(run[1].entries[0].score == 0.3);
}

TEST_CASE("read_run errors") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_run(in);
    };
    CHECK_THROWS_AS(parse("q\td\t1\n"), Error);
    CHECK_THROWS_AS(parse("q\td\tx\t0.1\n"), Error);
    CHECK_THROWS_AS(parse("q\td\t0\t0.1\n"), Error);
    CHECK_THROWS_AS(parse("q\td\t1\tnan\n"), Error);
    CHECK_THROWS_AS(parse("q\td\t1\t0.1\nq\td\t2\t0.1\n"), Error);
    CHECK_THROWS_AS(parse("q\td\t1\t0.1\nq\te\t3\t0.1\n"), Error);
}

TEST_CASE("run file round trip through candidate sets") {
    TempDir dir;
    const IdTable qids({"q1", "q2"});
    const IdTable dids({"a", "b", "c"});
    std::vector<CandidateSet> sets{{0, {{2, 0.5f}, {0, 0.25f}}}, {1, {{1, 1.0f}, {2, -0.125f}}}};
    write_candidate_run_file(dir / "r.tsv", sets, qids, dids);

    CHECK(read_candidate_run_file(dir / "r.tsv", qids, dids) == sets);
    CHECK(to_candidate_sets(read_run_file(dir / "r.tsv"), qids, dids) == sets);
}

TEST_CASE("rounded ties are re-sorted by doc index") {
    TempDir dir;
    simfuse::testing::spit(dir / "r.tsv", "q1\tc\t1\t0.500000\nq1\ta\t2\t0.500000\n");
    const IdTable qids({"q1"});
    const IdTable dids({"a", "b", "c"});
    const auto sets = read_candidate_run_file(dir / "r.tsv", qids, dids);
    CHECK(sets[0].entries[0].doc_index == 0);
    CHECK(sets[0].entries[1].doc_index == 2);
}

TEST_CASE("candidate reader detects query-set mismatches") {
    TempDir dir;
    const IdTable qids({"q1", "q2"});
    const IdTable dids({"a"});
    simfuse::testing::spit(dir / "r.tsv", "q1\ta\t1\t0.5\n");
    CHECK_THROWS_WITH_AS(read_candidate_run_file(dir / "r.tsv", qids, dids),
                         doctest::Contains("query 'q2' missing"), Error);
    simfuse::testing::spit(dir / "r.tsv", "q1\ta\t1\t0.5\nq2\ta\t1\t0.5\nq3\ta\t1\t0.5\n");
    CHECK_THROWS_WITH_AS(read_candidate_run_file(dir / "r.tsv", qids, dids),
                         doctest::Contains("unknown query 'q3'"), Error);
    simfuse::testing::spit(dir / "r.tsv", "q1\tz\t1\t0.5\n");
    CHECK_THROWS_WITH_AS(read_candidate_run_file(dir / "r.tsv", qids, dids),
                         doctest::Contains("unknown doc id 'z'"), Error);
    simfuse::testing::spit(dir / "r.tsv", "q1\ta\t1\t0.5\nq1\ta\t2\t0.4\nq2\ta\t1\t0.5\n");
    CHECK_THROWS_WITH_AS(read_candidate_run_file(dir / "r.tsv", qids, dids),
                         doctest::Contains("duplicate doc"), Error);
}
