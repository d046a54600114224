// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Straightforward serial implementations used as oracles in tests and as
// baselines in benchmarks. Not linked into the CLI.

#include <span>
#include <vector>

#include "simfuse/embedstore.hpp"
#include "simfuse/fusion.hpp"
#include "simfuse/simsearch.hpp"

namespace simfuse::reference {

/// One plain loop per (query, doc) pair.
ScoreMatrix naive_similarity(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs);

/// Scores every document, sorts the whole row, keeps the first M.
std::vector<CandidateSet> naive_topk(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs,
                                     std::size_t M);

/// Fusion over complete similarity rows: min-max over the full row of each
/// model, weighted sum over all documents, full sort, first k.
std::vector<FusedRanking> fuse_full_matrix(std::span<const ScoreMatrix> per_model,
                                           const FusionConfig& config, const IdTable& doc_ids,
                                           const IdTable& query_ids);

}  // namespace simfuse::reference
