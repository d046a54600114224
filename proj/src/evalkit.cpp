// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/evalkit.hpp"

#include <fstream>
#include <istream>

namespace simfuse {

namespace {

void check_unique(std::span<const std::string> ranked) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(ranked.size());
    for (const auto& d : ranked) {
        if (!seen.insert(d).second) {
            throw Error(ErrorCode::invalid_argument, "duplicate doc '" + d + "' in ranking");
        }
    }
}

void check_k(std::size_t k) {
    if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
}

}  // namespace

double average_precision_at_k(std::span<const std::string> ranked, const RelevantSet& relevant,
                              std::size_t k) {
    check_k(k);
    check_unique(ranked);
    return average_precision_unchecked(ranked, relevant, k);
}

double recall_at_k(std::span<const std::string> ranked, const RelevantSet& relevant, std::size_t k) {
    check_k(k);
    if (relevant.empty()) throw Error(ErrorCode::invalid_argument, "recall of an empty relevant set");
    check_unique(ranked);
    const std::size_t depth = std::min(k, ranked.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < depth; ++i) hits += relevant.contains(ranked[i]) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

EvalReport evaluate(const RunRanking& run, const Qrels& qrels, std::size_t k) {
    check_k(k);
    if (qrels.empty()) throw Error(ErrorCode::invalid_argument, "empty qrels");
    EvalReport report;
    report.k = k;
    report.judged_queries = qrels.size();
    double ap_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t recall_n = 0;
    for (const auto& [qid, relevant] : qrels) {
        QueryMetrics m{qid, 0.0, 0.0, false};
        if (auto it = run.find(qid); it != run.end()) {
            m.in_run = true;
            ++report.matched_queries;
            m.ap = average_precision_at_k(it->second, relevant, k);
            if (!relevant.empty()) m.recall = recall_at_k(it->second, relevant, k);
        }
        ap_sum += m.ap;
        if (!relevant.empty()) {
            recall_sum += m.recall;
            ++recall_n;
        }
        report.per_query.push_back(std::move(m));
    }
    if (report.matched_queries == 0) {
        throw Error(ErrorCode::mismatch, "empty intersection between run and qrels");
    }
    report.map = ap_sum / static_cast<double>(qrels.size());
    report.mean_recall = recall_n > 0 ? recall_sum / static_cast<double>(recall_n) : 0.0;
    return report;
}

double map_at_k(const RunRanking& run, const Qrels& qrels, std::size_t k) {
    return evaluate(run, qrels, k).map;
}

Qrels read_qrels(std::istream& in) {
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw Error(ErrorCode::format, "qrels line " + std::to_string(line_no) +
                                               ": expected 'query_id<TAB>doc_id'");
        }
        std::string qid = line.substr(0, tab);
        std::string did = line.substr(tab + 1);
        if (qid.empty() || did.empty()) {
            throw Error(ErrorCode::format, "qrels line " + std::to_string(line_no) + ": empty id");
        }
        qrels[std::move(qid)].insert(std::move(did));
    }
    if (in.bad()) throw Error(ErrorCode::io, "qrels read failed");
    return qrels;
}

Qrels read_qrels_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    return read_qrels(in);
}

void write_qrels_file(const std::filesystem::path& path, const Qrels& qrels) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    for (const auto& [qid, docs] : qrels) {
        std::vector<std::string> sorted(docs.begin(), docs.end());
        std::sort(sorted.begin(), sorted.end());
        for (const auto& d : sorted) out << qid << '\t' << d << '\n';
    }
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace simfuse
