// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/runio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "simfuse/error.hpp"

namespace simfuse {

namespace {

std::string line_error(std::size_t line_no, const std::string& what) {
    return "run line " + std::to_string(line_no) + ": " + what;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return fields;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

std::string format_score(double score) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.6f", score);
    std::string out(buf, static_cast<std::size_t>(n));
    if (out == "-0.000000") out.erase(0, 1);
    return out;
}

void write_run(std::ostream& out, const RunTable& run) {
    for (const auto& list : run) {
        for (std::size_t r = 0; r < list.entries.size(); ++r) {
            out << list.query_id << '\t' << list.entries[r].doc_id << '\t' << (r + 1) << '\t'
                << format_score(list.entries[r].score) << '\n';
        }
    }
}

void write_run_file(const std::filesystem::path& path, const RunTable& run) {
    auto out = open_out(path);
    write_run(out, run);
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

void write_candidate_run(std::ostream& out, std::span<const CandidateSet> sets,
                         const IdTable& query_ids, const IdTable& doc_ids) {
    std::string buffer;
    for (const auto& set : sets) {
        if (set.query_index >= query_ids.size()) {
            throw Error(ErrorCode::mismatch, "query index out of range of the id table");
        }
        const std::string& qid = query_ids[set.query_index];
        for (std::size_t r = 0; r < set.entries.size(); ++r) {
            const auto& c = set.entries[r];
            if (c.doc_index >= doc_ids.size()) {
                throw Error(ErrorCode::mismatch, "doc index out of range of the id table");
            }
            buffer += qid;
            buffer += '\t';
            buffer += doc_ids[c.doc_index];
            buffer += '\t';
            buffer += std::to_string(r + 1);
            buffer += '\t';
            buffer += format_score(c.score);
            buffer += '\n';
        }
        if (buffer.size() > (1u << 20)) {
            out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
            buffer.clear();
        }
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
}

void write_candidate_run_file(const std::filesystem::path& path, std::span<const CandidateSet> sets,
                              const IdTable& query_ids, const IdTable& doc_ids) {
    auto out = open_out(path);
    write_candidate_run(out, sets, query_ids, doc_ids);
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

RunTable read_run(std::istream& in) {
    struct Pending {
        std::vector<std::pair<std::size_t, RunEntry>> ranked;
        std::unordered_set<std::string> docs;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, Pending> by_query;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 4) throw Error(ErrorCode::format, line_error(line_no, "expected 4 fields"));
        if (fields[0].empty() || fields[1].empty()) {
            throw Error(ErrorCode::format, line_error(line_no, "empty id"));
        }
        std::size_t rank = 0;
        auto [rp, rec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), rank);
        if (rec != std::errc{} || rp != fields[2].data() + fields[2].size() || rank == 0) {
            throw Error(ErrorCode::format, line_error(line_no, "bad rank"));
        }
        double score = 0.0;
        auto [sp, sec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), score);
        if (sec != std::errc{} || sp != fields[3].data() + fields[3].size() || !std::isfinite(score)) {
            throw Error(ErrorCode::format, line_error(line_no, "bad score"));
        }

        std::string qid(fields[0]);
        auto [it, inserted] = by_query.try_emplace(qid);
        if (inserted) order.push_back(qid);
        std::string did(fields[1]);
        if (!it->second.docs.insert(did).second) {
            throw Error(ErrorCode::format, line_error(line_no, "duplicate doc '" + did + "'"));
        }
        it->second.ranked.emplace_back(rank, RunEntry{std::move(did), score});
    }
    if (in.bad()) throw Error(ErrorCode::io, "read failed");

    RunTable run;
    run.reserve(order.size());
    for (const auto& qid : order) {
        auto& pending = by_query[qid];
        std::sort(pending.ranked.begin(), pending.ranked.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        RankedList list{qid, {}};
        list.entries.reserve(pending.ranked.size());
        for (std::size_t i = 0; i < pending.ranked.size(); ++i) {
            if (pending.ranked[i].first != i + 1) {
                throw Error(ErrorCode::format, "run for query '" + qid + "' has ranks that are not 1.." +
                                                   std::to_string(pending.ranked.size()));
            }
            list.entries.push_back(std::move(pending.ranked[i].second));
        }
        run.push_back(std::move(list));
    }
    return run;
}

RunTable read_run_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    return read_run(in);
}

std::vector<CandidateSet> to_candidate_sets(const RunTable& run, const IdTable& query_ids,
                                            const IdTable& doc_ids) {
    std::vector<const RankedList*> slot(query_ids.size(), nullptr);
    for (const auto& list : run) {
        const auto q = query_ids.find(list.query_id);
        if (!q) throw Error(ErrorCode::mismatch, "query-set mismatch: unknown query '" + list.query_id + "'");
        slot[*q] = &list;
    }
    std::vector<CandidateSet> sets(query_ids.size());
    for (std::size_t q = 0; q < query_ids.size(); ++q) {
        if (slot[q] == nullptr) {
            throw Error(ErrorCode::mismatch, "query-set mismatch: query '" + query_ids[q] + "' missing from run");
        }
        sets[q].query_index = static_cast<std::uint32_t>(q);
        sets[q].entries.reserve(slot[q]->entries.size());
        for (const auto& e : slot[q]->entries) {
            const auto d = doc_ids.find(e.doc_id);
            if (!d) throw Error(ErrorCode::mismatch, "unknown doc id '" + e.doc_id + "' in run");
            sets[q].entries.push_back({static_cast<std::uint32_t>(*d), static_cast<float>(e.score)});
        }
        std::stable_sort(sets[q].entries.begin(), sets[q].entries.end(), ranks_before);
    }
    return sets;
}

std::vector<CandidateSet> read_candidate_run_file(const std::filesystem::path& path,
                                                  const IdTable& query_ids, const IdTable& doc_ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());

    std::vector<std::vector<std::pair<std::size_t, Candidate>>> ranked(query_ids.size());
    std::vector<bool> seen(query_ids.size(), false);
    std::string line;
    std::size_t line_no = 0;
    std::size_t cached_query = 0;
    std::string cached_qid;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 4) throw Error(ErrorCode::format, line_error(line_no, "expected 4 fields"));
        if (fields[0] != cached_qid || cached_qid.empty()) {
            const auto q = query_ids.find(fields[0]);
            if (!q) {
                throw Error(ErrorCode::mismatch, "query-set mismatch: unknown query '" + std::string(fields[0]) + "'");
            }
            cached_query = *q;
            cached_qid = std::string(fields[0]);
            seen[cached_query] = true;
        }
        const auto d = doc_ids.find(fields[1]);
        if (!d) throw Error(ErrorCode::mismatch, line_error(line_no, "unknown doc id '" + std::string(fields[1]) + "'"));
        std::size_t rank = 0;
        auto [rp, rec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), rank);
        if (rec != std::errc{} || rp != fields[2].data() + fields[2].size() || rank == 0) {
            throw Error(ErrorCode::format, line_error(line_no, "bad rank"));
        }
        float score = 0.0f;
        auto [sp, sec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), score);
        if (sec != std::errc{} || sp != fields[3].data() + fields[3].size() || !std::isfinite(score)) {
            throw Error(ErrorCode::format, line_error(line_no, "bad score"));
        }
        ranked[cached_query].emplace_back(rank, Candidate{static_cast<std::uint32_t>(*d), score});
    }
    if (in.bad()) throw Error(ErrorCode::io, "read failed for " + path.string());

    std::vector<CandidateSet> sets(query_ids.size());
    for (std::size_t q = 0; q < query_ids.size(); ++q) {
        if (!seen[q]) {
            throw Error(ErrorCode::mismatch, "query-set mismatch: query '" + query_ids[q] + "' missing from " +
                                                 path.string());
        }
        auto& r = ranked[q];
        std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        sets[q].query_index = static_cast<std::uint32_t>(q);
        sets[q].entries.reserve(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (r[i].first != i + 1) {
                throw Error(ErrorCode::format, "run for query '" + query_ids[q] + "' has ranks that are not 1.." +
                                                   std::to_string(r.size()));
            }
            sets[q].entries.push_back(r[i].second);
        }
        std::vector<std::uint32_t> docs;
        docs.reserve(r.size());
        for (const auto& c : sets[q].entries) docs.push_back(c.doc_index);
        std::sort(docs.begin(), docs.end());
        if (std::adjacent_find(docs.begin(), docs.end()) != docs.end()) {
            throw Error(ErrorCode::format, "duplicate doc in run for query '" + query_ids[q] + "'");
        }
        std::stable_sort(sets[q].entries.begin(), sets[q].entries.end(), ranks_before);
        std::vector<std::pair<std::size_t, Candidate>>().swap(r);
    }
    return sets;
}

}  // namespace simfuse
