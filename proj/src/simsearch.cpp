// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/simsearch.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <limits>

#include "simfuse/error.hpp"
#include "simfuse/parallel.hpp"

namespace simfuse {

namespace {

constexpr std::size_t kQueryTile = 4;
constexpr std::size_t kDocLanes = 8;

/// Documents re-laid out block by block: block b stores dim x block_width
/// floats, column k of the block contiguous. Tail docs are zero padded.
struct PackedDocs {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::size_t block_width = 0;
    std::size_t blocks = 0;
    std::vector<float> data;

    const float* block(std::size_t b) const { return data.data() + b * dim * block_width; }
};

PackedDocs pack_docs(const EmbeddingMatrix& docs, std::size_t block_width, int threads) {
    PackedDocs packed;
    packed.count = docs.rows();
    packed.dim = docs.dim();
    packed.block_width = block_width;
    packed.blocks = (docs.rows() + block_width - 1) / block_width;
    packed.data.assign(packed.blocks * packed.dim * block_width, 0.0f);
    const auto nblocks = static_cast<std::int64_t>(packed.blocks);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t b = 0; b < nblocks; ++b) {
        float* dst = packed.data.data() + b * packed.dim * block_width;
        const std::size_t first = static_cast<std::size_t>(b) * block_width;
        const std::size_t last = std::min(first + block_width, packed.count);
        for (std::size_t d = first; d < last; ++d) {
            const auto row = docs.row(d);
            for (std::size_t k = 0; k < packed.dim; ++k) dst[k * block_width + (d - first)] = row[k];
        }
    }
    return packed;
}

using Lanes = float __attribute__((vector_size(kDocLanes * sizeof(float))));

/// out[t * block_width + j] = <query t, doc j of the block>, accumulated over
/// k = 0..dim-1 in order, exactly like a naive dot product loop. Lanes are
/// independent documents; there is no horizontal reduction.
__attribute__((target_clones("avx2", "default"))) void score_tile(
    const std::array<const float*, kQueryTile>& q, const float* block, std::size_t dim,
    std::size_t block_width, float* out) {
    for (std::size_t d0 = 0; d0 < block_width; d0 += kDocLanes) {
        Lanes acc[kQueryTile] = {};
        for (std::size_t k = 0; k < dim; ++k) {
            Lanes col;
            std::memcpy(&col, block + k * block_width + d0, sizeof col);
            for (std::size_t t = 0; t < kQueryTile; ++t) acc[t] += q[t][k] * col;
        }
        for (std::size_t t = 0; t < kQueryTile; ++t) {
            std::memcpy(out + t * block_width + d0, &acc[t], sizeof acc[t]);
        }
    }
}

/// Keeps the best `capacity` candidates seen so far; heap top is the worst.
class BoundedSelection {
public:
    explicit BoundedSelection(std::size_t capacity) : capacity_(capacity) {
        heap_.reserve(capacity);
    }

    void offer(Candidate c) {
        if (heap_.size() < capacity_) {
            heap_.push_back(c);
            std::push_heap(heap_.begin(), heap_.end(), ranks_before);
        } else if (ranks_before(c, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
            heap_.back() = c;
            std::push_heap(heap_.begin(), heap_.end(), ranks_before);
        }
    }

    // Score a candidate must beat to enter; -inf while not full.
    float threshold() const {
        return heap_.size() < capacity_ ? -std::numeric_limits<float>::infinity()
                                        : heap_.front().score;
    }

    std::vector<Candidate> take_sorted() {
        std::sort_heap(heap_.begin(), heap_.end(), ranks_before);
        return std::move(heap_);
    }

private:
    std::size_t capacity_;
    std::vector<Candidate> heap_;
};

void check_dims(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs) {
    if (queries.dim() != docs.dim()) {
        throw Error(ErrorCode::mismatch, "dimension mismatch: queries " +
                                             std::to_string(queries.dim()) + ", docs " +
                                             std::to_string(docs.dim()));
    }
}

/// Runs the blocked kernel over all (query stripe, doc block) pairs and hands
/// each scored block to `sink(query, first_doc, scores, count)`. Stripes are
/// distributed across workers; a stripe's sink calls happen on one worker in
/// ascending doc order.
template <typename Sink>
void for_each_scored_block(const EmbeddingMatrix& queries, const PackedDocs& packed,
                           const SearchOptions& options, int threads, Sink&& sink) {
    const std::size_t nq = queries.rows();
    const std::size_t stripe = std::max<std::size_t>(options.query_stripe, 1);
    const auto nstripes = static_cast<std::int64_t>((nq + stripe - 1) / stripe);
    const std::size_t width = packed.block_width;
    const std::vector<float> zero_query(packed.dim, 0.0f);

#pragma omp parallel num_threads(threads)
    {
        std::vector<float> scores(kQueryTile * width);
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t s = 0; s < nstripes; ++s) {
            const std::size_t q_begin = static_cast<std::size_t>(s) * stripe;
            const std::size_t q_end = std::min(q_begin + stripe, nq);
            for (std::size_t b = 0; b < packed.blocks; ++b) {
                const std::size_t first_doc = b * width;
                const std::size_t count = std::min(width, packed.count - first_doc);
                for (std::size_t q0 = q_begin; q0 < q_end; q0 += kQueryTile) {
                    std::array<const float*, kQueryTile> tile{};
                    for (std::size_t t = 0; t < kQueryTile; ++t) {
                        tile[t] = q0 + t < q_end ? queries.row(q0 + t).data() : zero_query.data();
                    }
                    score_tile(tile, packed.block(b), packed.dim, width, scores.data());
                    for (std::size_t t = 0; t < kQueryTile && q0 + t < q_end; ++t) {
                        sink(q0 + t, first_doc, scores.data() + t * width, count);
                    }
                }
            }
        }
    }
}

std::size_t block_width_for(const SearchOptions& options) {
    const std::size_t w = std::max<std::size_t>(options.doc_block, kDocLanes);
    return (w + kDocLanes - 1) / kDocLanes * kDocLanes;
}

}  // namespace

std::vector<CandidateSet> topk_search(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs,
                                      std::size_t M, const SearchOptions& options) {
    check_dims(queries, docs);
    if (M == 0) throw Error(ErrorCode::invalid_argument, "M must be >= 1");
    if (!queries.normalized() || !docs.normalized()) {
        throw Error(ErrorCode::invariant, "unnormalized input: search requires unit-norm rows");
    }
    if (docs.rows() > std::numeric_limits<std::uint32_t>::max() ||
        queries.rows() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::invalid_argument, "matrix too large for 32-bit row indices");
    }

    const int threads = worker_count(options.threads);
    const std::size_t capacity = std::min(M, docs.rows());
    std::vector<CandidateSet> results(queries.rows());
    if (queries.rows() == 0) return results;
    if (capacity == 0) {
        for (std::size_t q = 0; q < results.size(); ++q) results[q].query_index = static_cast<std::uint32_t>(q);
        return results;
    }

    const PackedDocs packed = pack_docs(docs, block_width_for(options), threads);
    std::vector<BoundedSelection> selections(queries.rows(), BoundedSelection(0));

    // Selection state for query q is created, fed, and drained by the worker
    // that owns q's stripe.
    for_each_scored_block(queries, packed, options, threads,
                          [&](std::size_t q, std::size_t first_doc, const float* scores,
                              std::size_t count) {
                              auto& sel = selections[q];
                              if (first_doc == 0) sel = BoundedSelection(capacity);
                              float threshold = sel.threshold();
                              for (std::size_t j = 0; j < count; ++j) {
                                  if (scores[j] < threshold) continue;
                                  sel.offer({static_cast<std::uint32_t>(first_doc + j), scores[j]});
                                  threshold = sel.threshold();
                              }
                              if (first_doc + count == packed.count) {
                                  results[q].query_index = static_cast<std::uint32_t>(q);
                                  results[q].entries = sel.take_sorted();
                                  sel = BoundedSelection(0);
                              }
                          });
    return results;
}

ScoreMatrix full_similarity(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs,
                            const SearchOptions& options) {
    check_dims(queries, docs);
    ScoreMatrix out;
    out.rows = queries.rows();
    out.cols = docs.rows();
    out.values.assign(out.rows * out.cols, 0.0f);
    if (out.rows == 0 || out.cols == 0) return out;

    const int threads = worker_count(options.threads);
    const PackedDocs packed = pack_docs(docs, block_width_for(options), threads);
    for_each_scored_block(queries, packed, options, threads,
                          [&](std::size_t q, std::size_t first_doc, const float* scores,
                              std::size_t count) {
                              std::copy(scores, scores + count,
                                        out.values.begin() + q * out.cols + first_doc);
                          });
    return out;
}

}  // namespace simfuse
