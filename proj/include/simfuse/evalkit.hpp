// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Relevance judgments and cutoff metrics (AP@k, MAP@k, Recall@k).
//
// AP@k = (sum over relevant hits at rank i <= k of precision@i) / min(|rel|, k),
// and 0 for an empty relevant set.

#include <algorithm>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "simfuse/error.hpp"

namespace simfuse {

using RelevantSet = std::unordered_set<std::string>;

/// query_id -> relevant doc ids. Ordered by query id so sums are reproducible.
using Qrels = std::map<std::string, RelevantSet>;

/// query_id -> doc ids in rank order.
using RunRanking = std::map<std::string, std::vector<std::string>>;

/// Hot-loop variant: no argument checks, caller guarantees k >= 1 and no
/// duplicates in `ranked`.
template <typename Id, typename Set>
double average_precision_unchecked(std::span<const Id> ranked, const Set& relevant, std::size_t k) {
    if (relevant.empty()) return 0.0;
    const std::size_t depth = std::min(k, ranked.size());
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < depth; ++i) {
        if (relevant.contains(ranked[i])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(std::min(relevant.size(), k));
}

double average_precision_at_k(std::span<const std::string> ranked, const RelevantSet& relevant,
                              std::size_t k);

double recall_at_k(std::span<const std::string> ranked, const RelevantSet& relevant, std::size_t k);

/// Unweighted mean of AP@k over every query in `qrels`; a qrels query with no
/// ranking in `run` scores 0. Throws if qrels is empty or shares no query with
/// the run.
double map_at_k(const RunRanking& run, const Qrels& qrels, std::size_t k);

struct QueryMetrics {
    std::string query_id;
    double ap = 0.0;
    double recall = 0.0;  // 0 when the relevant set is empty
    bool in_run = false;
};

struct EvalReport {
    std::size_t k = 0;
    double map = 0.0;
    double mean_recall = 0.0;  // over queries with a non-empty relevant set
    std::size_t judged_queries = 0;
    std::size_t matched_queries = 0;
    std::vector<QueryMetrics> per_query;
};

EvalReport evaluate(const RunRanking& run, const Qrels& qrels, std::size_t k);

/// `query_id \t doc_id` per line; blank lines skipped.
Qrels read_qrels(std::istream& in);
Qrels read_qrels_file(const std::filesystem::path& path);
void write_qrels_file(const std::filesystem::path& path, const Qrels& qrels);

}  // namespace simfuse
