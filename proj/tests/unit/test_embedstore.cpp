// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cstring>
#include <limits>

#include "simfuse/embedstore.hpp"
#include "simfuse/error.hpp"
#include "test_util.hpp"

using namespace simfuse;
using simfuse::testing::TempDir;

namespace {

std::vector<std::byte> bytes_of(std::initializer_list<unsigned> raw) {
    std::vector<std::byte> out;
    for (unsigned b : raw) out.push_back(static_cast<std::byte>(b));
    return out;
}

std::string error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("write_embf 2x3 matches the byte-level layout") {
    // Expected bytes produced by Python:
    //   b'EMBF' + struct.pack('<IQIB3x', 1, 2, 3, 1) + struct.pack('<6f', ...)
    const auto expected = bytes_of({
        0x45, 0x4d, 0x42, 0x46, 0x01, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
        0x03, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x20, 0xc0,
        0x00, 0x00, 0x00, 0x3e, 0x00, 0x00, 0x40, 0x40, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x40, 0xbf,
    });
    const EmbeddingMatrix m(2, 3, {1.0f, -2.5f, 0.125f, 3.0f, 0.0f, -0.75f});
    const IdTable ids({"a", "b"});

    TempDir dir;
    write_embf(dir / "m.embf", m, ids);
    const auto raw = simfuse::testing::slurp(dir / "m.embf");
    REQUIRE(raw.size() == kEmbfHeaderSize + 24);
    CHECK(std::memcmp(raw.data(), expected.data(), expected.size()) == 0);
    CHECK(simfuse::testing::slurp(dir / "m.embf.ids") == "a\nb");

    const auto back = read_embf(dir / "m.embf");
    CHECK(back.matrix == m);
    CHECK(back.ids == ids);
}

TEST_CASE("empty matrix round-trips with an empty sidecar") {
    TempDir dir;
    write_embf(dir / "e.embf", EmbeddingMatrix(0, 4, {}), IdTable{});
    CHECK(std::filesystem::file_size(dir / "e.embf") == kEmbfHeaderSize);
    CHECK(simfuse::testing::slurp(dir / "e.embf.ids").empty());
    const auto back = read_embf(dir / "e.embf");
    CHECK(back.matrix.rows() == 0);
    CHECK(back.matrix.dim() == 4);
    CHECK(back.ids.empty());
}

TEST_CASE("matrix invariants") {
    const float nan = std::numeric_limits<float>::quiet_NaN();
    const float inf = std::numeric_limits<float>::infinity();
    CHECK(error_of([&] { EmbeddingMatrix(1, 2, {1.0f, nan}); }) == "non-finite value");
    CHECK(error_of([&] { EmbeddingMatrix(1, 2, {inf, 0.0f}); }) == "non-finite value");
    CHECK_THROWS_AS(EmbeddingMatrix(2, 2, {1.0f, 2.0f, 3.0f}), Error);
    CHECK_THROWS_AS(EmbeddingMatrix(1, 0, {}), Error);

    CHECK(EmbeddingMatrix(2, 2, {1.0f, 0.0f, 0.6f, 0.8f}).normalized());
    CHECK_FALSE(EmbeddingMatrix(1, 2, {3.0f, 4.0f}).normalized());
}

TEST_CASE("write_embf refuses a length mismatch before creating the file") {
    TempDir dir;
    CHECK_THROWS_AS(write_embf(dir / "x.embf", EmbeddingMatrix(2, 1, {1.0f, 1.0f}), IdTable({"a"})), Error);
    CHECK_FALSE(std::filesystem::exists(dir / "x.embf"));
}

TEST_CASE("id table invariants") {
    CHECK_THROWS_AS(IdTable({"a", "a"}), Error);
    CHECK_THROWS_AS(IdTable({""}), Error);
    CHECK_THROWS_AS(IdTable({"a\tb"}), Error);
    CHECK_THROWS_AS(IdTable({"a\nb"}), Error);
    CHECK_THROWS_AS(IdTable({"a\rb"}), Error);
    const IdTable ids({"x", "y"});
    CHECK(ids.find("y") == 1u);
    CHECK_FALSE(ids.find("z").has_value());
}

TEST_CASE("sidecar accepts one trailing newline") {
    CHECK(decode_id_sidecar("a\nb\n") == IdTable({"a", "b"}));
    CHECK(decode_id_sidecar("a\nb") == IdTable({"a", "b"}));
    CHECK_THROWS_AS(decode_id_sidecar("a\n\nb"), Error);
    CHECK(decode_id_sidecar("").empty());
}

TEST_CASE("read_embf error paths") {
    const EmbeddingMatrix m(5, 4, std::vector<float>(20, 0.5f));
    auto good = encode_embf(m);

    SUBCASE("bad magic") {
        auto bad = good;
        for (int i = 0; i < 4; ++i) bad[i] = std::byte{'X'};
        CHECK(error_of([&] { decode_embf(bad); }) == "bad magic");
    }
    SUBCASE("version mismatch") {
        auto bad = good;
        bad[4] = std::byte{2};
        CHECK(error_of([&] { decode_embf(bad); }).starts_with("version mismatch"));
    }
    SUBCASE("truncated payload reports the expected 80 bytes") {
        std::vector<std::byte> bad(good.begin(), good.begin() + kEmbfHeaderSize + 60);
        CHECK(error_of([&] { decode_embf(bad); }) == "truncated payload (60 bytes, 80 expected)");
    }
    SUBCASE("huge row count does not allocate") {
        auto bad = good;
        for (int i = 8; i < 16; ++i) bad[i] = std::byte{0xff};
        CHECK(error_of([&] { decode_embf(bad); }).starts_with("truncated payload"));
    }
    SUBCASE("trailing bytes") {
        auto bad = good;
        bad.push_back(std::byte{0});
        CHECK(error_of([&] { decode_embf(bad); }).starts_with("trailing bytes"));
    }
    SUBCASE("dtype and padding") {
        auto bad = good;
        bad[20] = std::byte{2};
        CHECK(error_of([&] { decode_embf(bad); }) == "unsupported dtype");
        bad = good;
        bad[22] = std::byte{1};
        CHECK(error_of([&] { decode_embf(bad); }) == "nonzero header padding");
    }
    SUBCASE("NaN in payload") {
        auto bad = good;
        bad[kEmbfHeaderSize + 2] = std::byte{0xc0};
        bad[kEmbfHeaderSize + 3] = std::byte{0x7f};
        CHECK(error_of([&] { decode_embf(bad); }) == "non-finite value");
    }
    SUBCASE("sidecar mismatch and duplicates") {
        TempDir dir;
        write_embf(dir / "m.embf", m, simfuse::testing::numbered_ids("q", 5));
        simfuse::testing::spit(dir / "m.embf.ids", "q0\nq1\nq2\nq3");
        CHECK(error_of([&] { read_embf(dir / "m.embf"); }).find("4 ids but matrix has 5 rows") != std::string::npos);
        simfuse::testing::spit(dir / "m.embf.ids", "q0\nq1\nq2\nq3\nq3");
        CHECK(error_of([&] { read_embf(dir / "m.embf"); }) == "duplicate id 'q3'");
    }
}

TEST_CASE("round trip is bit exact on random matrices") {
    std::mt19937_64 rng(7);
    TempDir dir;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t rows = rng() % 30;
        const std::size_t dim = 1 + rng() % 17;
        std::vector<float> v(rows * dim);
        for (auto& x : v) {
            // Arbitrary finite bit patterns, subnormals included.
            std::uint32_t bits;
            do {
                bits = static_cast<std::uint32_t>(rng());
            } while (((bits >> 23) & 0xffu) == 0xffu);
            x = std::bit_cast<float>(bits);
        }
        const EmbeddingMatrix m(rows, dim, v);
        const auto ids = simfuse::testing::numbered_ids("id", rows);
        write_embf(dir / "r.embf", m, ids);
        const auto back = read_embf(dir / "r.embf");
        REQUIRE(back.matrix.rows() == rows);
        CHECK(std::memcmp(back.matrix.values().data(), v.data(), v.size() * sizeof(float)) == 0);
        CHECK(back.ids == ids);
    }
}

TEST_CASE("l2_normalize") {
    const auto n = l2_normalize(EmbeddingMatrix(2, 2, {3.0f, 4.0f, 0.0f, 2.0f}));
    CHECK(n.normalized());
    CHECK(n.row(0)[0] == doctest::Approx(0.6).epsilon(1e-7));
    CHECK(n.row(0)[1] == doctest::Approx(0.8).epsilon(1e-7));
    CHECK(n.row(1)[1] == 1.0f);

    const auto unit = l2_normalize(EmbeddingMatrix(1, 3, {1.0f, 0.0f, 0.0f}));
    CHECK(std::vector<float>(unit.values().begin(), unit.values().end()) == std::vector<float>{1.0f, 0.0f, 0.0f});

    CHECK(error_of([] { l2_normalize(EmbeddingMatrix(1, 2, {0.0f, 0.0f})); }) == "zero-norm row 0");
    CHECK(error_of([] { l2_normalize(EmbeddingMatrix(2, 2, {1.0f, 0.0f, 0.0f, 0.0f})); }) == "zero-norm row 1");
}

TEST_CASE("l2_normalize is idempotent and scale invariant") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<float> scale(0.01f, 100.0f);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = simfuse::testing::random_matrix(rng, 4, 1 + rng() % 40);
        const auto once = l2_normalize(m);
        const auto twice = l2_normalize(once);
        const float c = scale(rng);
        std::vector<float> scaled(m.values().begin(), m.values().end());
        for (auto& x : scaled) x *= c;
        const auto from_scaled = l2_normalize(EmbeddingMatrix(m.rows(), m.dim(), scaled));
        for (std::size_t i = 0; i < once.values().size(); ++i) {
            CHECK(std::abs(once.values()[i] - twice.values()[i]) <= 1e-6);
            CHECK(std::abs(once.values()[i] - from_scaled.values()[i]) <= 1e-6);
        }
    }
}
