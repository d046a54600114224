// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file fusion.hpp
 *  \brief Per-query min-max normalization and weighted multi-model score fusion.
 *
 * For one query, each model contributes its retained top-M candidates. Scores
 * are min-max normalized per model over the retained entries, then
 *
 *     fused(d) = sum_m w_m * n_m(d)
 *
 * over the union of retained documents, with n_m(d) = missing_fill when model
 * m did not retain d. The sum runs in model order. Rankings order by fused
 * score descending, then doc id ascending (bytewise).
 */

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simfuse/embedstore.hpp"
#include "simfuse/evalkit.hpp"
#include "simfuse/simsearch.hpp"

namespace simfuse {

inline constexpr double kDegenerateRange = 1e-12;

struct FusionConfig {
    std::vector<double> weights;
    std::size_t M = 1000;
    std::size_t k = 20;
    double degenerate_fill = 0.5;
    double missing_fill = 0.0;

    /// Throws Error on any violated invariant. When `num_models` is given the
    /// weight count must match it.
    void validate(std::optional<std::size_t> num_models = std::nullopt) const;

    static std::vector<double> uniform_weights(std::size_t num_models);
};

FusionConfig parse_fusion_config(const std::string& json_text);
FusionConfig load_fusion_config(const std::filesystem::path& path);
/// `{"weights":[...],"M":..,"k":..,"degenerate_fill":..,"missing_fill":..}`,
/// plus "validation_map" when given.
std::string fusion_config_json(const FusionConfig& config,
                               std::optional<double> validation_map = std::nullopt);
void save_fusion_config(const std::filesystem::path& path, const FusionConfig& config,
                        std::optional<double> validation_map = std::nullopt);

struct NormalizedCandidate {
    std::uint32_t doc_index;
    double score;
};

struct NormalizedSet {
    std::uint32_t query_index = 0;
    std::vector<NormalizedCandidate> entries;  // same order as the input set
};

/// Min-max maps the retained scores onto [0, 1]. When max - min < 1e-12
/// every score becomes `degenerate_fill`. Throws on an empty set.
NormalizedSet normalize_per_query(const CandidateSet& cands, double degenerate_fill = 0.5);

/// Bytewise ordering of doc ids, precomputed as a rank per row so fused ties
/// can be broken without string comparisons. Keeps a reference to `ids`.
class DocCatalog {
public:
    explicit DocCatalog(const IdTable& ids);

    const IdTable& ids() const noexcept { return *ids_; }
    std::uint32_t lex_rank(std::uint32_t doc_index) const { return lex_rank_[doc_index]; }
    std::size_t size() const noexcept { return lex_rank_.size(); }

private:
    const IdTable* ids_;
    std::vector<std::uint32_t> lex_rank_;
};

struct FusedEntry {
    std::uint32_t doc_index;
    std::string doc_id;
    double score;

    friend bool operator==(const FusedEntry&, const FusedEntry&) = default;
};

struct FusedRanking {
    std::string query_id;
    std::vector<FusedEntry> ranked;

    friend bool operator==(const FusedRanking&, const FusedRanking&) = default;
};

/// Fuses one query. `per_model[m]` must already be normalized.
FusedRanking fuse(std::span<const NormalizedSet> per_model, const FusionConfig& config,
                  const DocCatalog& docs, const std::string& query_id = {});

/// all_models[m][q] is model m's candidate set for query q. Every model must
/// list the same queries in the same order. Parallel over queries.
std::vector<FusedRanking> fuse_run(std::span<const std::vector<CandidateSet>> all_models,
                                   const FusionConfig& config, const DocCatalog& docs,
                                   const IdTable& query_ids, int threads = 0);

/// Simplex lattice with `resolution` points per axis: every weight vector
/// whose entries are multiples of 1/(resolution-1) summing to 1, in
/// lexicographic order. Throws when resolution < 2 or num_models == 0.
std::vector<std::vector<double>> simplex_grid(std::size_t num_models, std::size_t resolution);

struct TuneResult {
    std::vector<double> weights;
    double map = 0.0;  // validation MAP@k of `weights`
    std::size_t evaluated = 0;
};

/// Exhaustive grid search maximizing MAP@k; ties go to the lexicographically
/// smallest weight vector. Parallel over grid points.
TuneResult tune_weights(std::span<const std::vector<CandidateSet>> all_models, const Qrels& qrels,
                        std::size_t grid_resolution, const FusionConfig& config,
                        const DocCatalog& docs, const IdTable& query_ids, int threads = 0);

/// Converts rankings to a RunRanking keyed by query id.
RunRanking to_run_ranking(std::span<const FusedRanking> rankings);

/// One line per ranking: exactly k doc ids separated by single spaces.
void write_submission(std::ostream& out, std::span<const FusedRanking> rankings, std::size_t k);
void write_submission(const std::filesystem::path& path, std::span<const FusedRanking> rankings,
                      std::size_t k);

}  // namespace simfuse
