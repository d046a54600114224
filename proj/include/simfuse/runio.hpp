// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Tab-separated run files: `query_id \t doc_id \t rank \t score`, rank from 1,
// score in fixed notation with 6 fractional digits.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "simfuse/embedstore.hpp"
#include "simfuse/simsearch.hpp"

namespace simfuse {

struct RunEntry {
    std::string doc_id;
    double score = 0.0;
};

struct RankedList {
    std::string query_id;
    std::vector<RunEntry> entries;  // rank order
};

/// Queries in file order of first appearance; entries sorted by rank.
using RunTable = std::vector<RankedList>;

std::string format_score(double score);

void write_run(std::ostream& out, const RunTable& run);
void write_run_file(const std::filesystem::path& path, const RunTable& run);

/// Streams candidate sets straight to a run file without building strings.
void write_candidate_run(std::ostream& out, std::span<const CandidateSet> sets,
                         const IdTable& query_ids, const IdTable& doc_ids);
void write_candidate_run_file(const std::filesystem::path& path, std::span<const CandidateSet> sets,
                              const IdTable& query_ids, const IdTable& doc_ids);

/// Throws on malformed lines, duplicate ranks or docs within a query, and
/// gaps in the rank sequence.
RunTable read_run(std::istream& in);
RunTable read_run_file(const std::filesystem::path& path);

/// Converts a parsed run back into candidate sets ordered by `query_ids`.
/// Every query must be present and every doc id must resolve.
std::vector<CandidateSet> to_candidate_sets(const RunTable& run, const IdTable& query_ids,
                                            const IdTable& doc_ids);

/// Streaming equivalent of to_candidate_sets(read_run_file(path), ...) that
/// never materializes id strings per entry. Entries come back in
/// ranks_before order (rounded scores, ties by doc index).
std::vector<CandidateSet> read_candidate_run_file(const std::filesystem::path& path,
                                                  const IdTable& query_ids, const IdTable& doc_ids);

}  // namespace simfuse
