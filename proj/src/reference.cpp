// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/reference.hpp"

#include <algorithm>
#include <numeric>

#include "simfuse/error.hpp"

namespace simfuse::reference {

ScoreMatrix naive_similarity(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs) {
    if (queries.dim() != docs.dim()) throw Error(ErrorCode::mismatch, "dimension mismatch");
    ScoreMatrix out{queries.rows(), docs.rows(), std::vector<float>(queries.rows() * docs.rows())};
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        const auto qr = queries.row(q);
        for (std::size_t d = 0; d < docs.rows(); ++d) {
            const auto dr = docs.row(d);
            float acc = 0.0f;
            for (std::size_t k = 0; k < qr.size(); ++k) acc += qr[k] * dr[k];
            out.values[q * out.cols + d] = acc;
        }
    }
    return out;
}

std::vector<CandidateSet> naive_topk(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs,
                                     std::size_t M) {
    const ScoreMatrix scores = naive_similarity(queries, docs);
    std::vector<CandidateSet> out(queries.rows());
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        auto& entries = out[q].entries;
        out[q].query_index = static_cast<std::uint32_t>(q);
        for (std::size_t d = 0; d < docs.rows(); ++d) {
            entries.push_back({static_cast<std::uint32_t>(d), scores.at(q, d)});
        }
        std::sort(entries.begin(), entries.end(), ranks_before);
        entries.resize(std::min(M, entries.size()));
    }
    return out;
}

std::vector<FusedRanking> fuse_full_matrix(std::span<const ScoreMatrix> per_model,
                                           const FusionConfig& config, const IdTable& doc_ids,
                                           const IdTable& query_ids) {
    config.validate(per_model.size());
    const std::size_t nq = per_model.front().rows;
    const std::size_t nd = per_model.front().cols;
    std::vector<FusedRanking> out;
    for (std::size_t q = 0; q < nq; ++q) {
        std::vector<double> fused(nd, 0.0);
        std::vector<std::vector<double>> normalized(per_model.size(), std::vector<double>(nd));
        for (std::size_t m = 0; m < per_model.size(); ++m) {
            float lo = per_model[m].at(q, 0), hi = lo;
            for (std::size_t d = 0; d < nd; ++d) {
                lo = std::min(lo, per_model[m].at(q, d));
                hi = std::max(hi, per_model[m].at(q, d));
            }
            const double range = static_cast<double>(hi) - static_cast<double>(lo);
            for (std::size_t d = 0; d < nd; ++d) {
                normalized[m][d] = range < kDegenerateRange
                                       ? config.degenerate_fill
                                       : (static_cast<double>(per_model[m].at(q, d)) - lo) / range;
            }
        }
        for (std::size_t d = 0; d < nd; ++d) {
            for (std::size_t m = 0; m < per_model.size(); ++m) fused[d] += config.weights[m] * normalized[m][d];
        }
        std::vector<std::size_t> order(nd);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (fused[a] != fused[b]) return fused[a] > fused[b];
            return doc_ids[a] < doc_ids[b];
        });
        FusedRanking ranking{query_ids[q], {}};
        for (std::size_t i = 0; i < std::min(config.k, nd); ++i) {
            const auto d = order[i];
            ranking.ranked.push_back({static_cast<std::uint32_t>(d), doc_ids[d], fused[d]});
        }
        out.push_back(std::move(ranking));
    }
    return out;
}

}  // namespace simfuse::reference
