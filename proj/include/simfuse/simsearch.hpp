// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file simsearch.hpp
 *  \brief Exact top-M inner-product search over normalized embeddings.
 *
 * Each (query, doc) score is accumulated in float32 in ascending dimension
 * order, the same order a naive single loop uses, so results are bit-identical
 * regardless of blocking or worker count.
 */

#include <cstdint>
#include <vector>

#include "simfuse/embedstore.hpp"

namespace simfuse {

struct Candidate {
    std::uint32_t doc_index;
    float score;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Total order used everywhere for raw candidates: score descending, then
/// doc_index ascending.
inline bool ranks_before(const Candidate& a, const Candidate& b) noexcept {
    return a.score > b.score || (a.score == b.score && a.doc_index < b.doc_index);
}

struct CandidateSet {
    std::uint32_t query_index = 0;
    std::vector<Candidate> entries;  // ranks_before order, no duplicates

    friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

struct SearchOptions {
    int threads = 0;                 // 0 = OpenMP default
    std::size_t query_stripe = 32;   // queries per work item
    std::size_t doc_block = 256;     // documents scored per kernel call
};

/// Exact top-M per query. Throws on dimension mismatch, unnormalized input,
/// or M == 0. Candidate sets hold min(M, docs.rows()) entries.
std::vector<CandidateSet> topk_search(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs,
                                      std::size_t M, const SearchOptions& options = {});

/// Dense rows x cols score matrix, row-major.
struct ScoreMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> values;

    float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

ScoreMatrix full_similarity(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs,
                            const SearchOptions& options = {});

}  // namespace simfuse
