// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file synth.hpp
 *  \brief Seeded planted-relevance corpora for desk-scale verification.
 *
 * Every query gets a latent unit vector. Its relevant documents share that
 * latent vector; all other documents get their own. Each model then sees
 *
 *     row_m = normalize(latent + noise * eps_m),   eps_m ~ N(0, I / dim)
 *
 * with independent eps per model and row, for queries and documents alike.
 *
 * Randomness: each row draws from its own std::mt19937_64 seeded through
 * std::seed_seq{seed_lo, seed_hi, stream, model, row}. Uniforms take the top
 * 53 bits; normals are the Irwin-Hall sum of 12 uniforms minus 6. Both engine
 * and seed_seq are fully specified by the C++ standard and the normal draw is
 * pure IEEE addition, so output is byte-identical across platforms.
 */

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "simfuse/embedstore.hpp"
#include "simfuse/evalkit.hpp"

namespace simfuse {

struct SynthSpec {
    std::size_t n_queries = 200;
    std::size_t n_docs = 5000;
    std::size_t dim = 32;
    std::size_t n_models = 5;
    std::size_t relevant_per_query = 3;
    double noise = 0.5;
    std::uint64_t seed = 42;

    void validate() const;
};

struct SynthModel {
    std::string name;
    EmbeddingMatrix queries;
    EmbeddingMatrix docs;
};

struct SynthCorpus {
    IdTable query_ids;
    IdTable doc_ids;
    std::vector<SynthModel> models;
    Qrels qrels;
};

SynthCorpus generate_synthetic(const SynthSpec& spec, int threads = 0);

/// Writes `<name>.queries.embf`, `<name>.docs.embf` (+ sidecars) per model,
/// `qrels.tsv`, `fusion.json` (uniform weights) and `manifest.json` into
/// `dir`, creating it if needed.
void write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& dir, std::size_t M,
                     std::size_t k);

}  // namespace simfuse
