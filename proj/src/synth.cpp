// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/synth.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <random>

#include "simfuse/error.hpp"
#include "simfuse/fusion.hpp"
#include "simfuse/manifest.hpp"
#include "simfuse/parallel.hpp"

namespace simfuse {

namespace {

enum Stream : std::uint32_t {
    kQueryLatent = 1,
    kDocLatent = 2,
    kShuffle = 3,
    kQueryNoise = 4,
    kDocNoise = 5,
};

class RowRng {
public:
    RowRng(std::uint64_t seed, Stream stream, std::uint64_t model, std::uint64_t row) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(model),
                          static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32)};
        engine_.seed(seq);
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += uniform();
        return s - 6.0;
    }

    std::uint64_t below(std::uint64_t n) {
        constexpr auto max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t bound = max - max % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= bound);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

std::vector<double> unit_latent(RowRng rng, std::size_t dim) {
    std::vector<double> v(dim);
    double sq = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        sq += x * x;
    }
    const double norm = std::sqrt(sq);
    for (auto& x : v) x /= norm;
    return v;
}

/// normalize(latent + noise * eps) written as float into `out`.
void perturbed_row(const std::vector<double>& latent, double noise, RowRng rng, float* out) {
    const std::size_t dim = latent.size();
    const double scale = noise / std::sqrt(static_cast<double>(dim));
    std::vector<double> v(latent);
    if (noise > 0.0) {
        for (auto& x : v) x += scale * rng.normal();
    }
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double norm = std::sqrt(sq);
    for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
}

std::string padded_id(char prefix, std::size_t i, std::size_t n) {
    const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
    std::string digits = std::to_string(i);
    return std::string(1, prefix) + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

void SynthSpec::validate() const {
    if (dim < 2) throw Error(ErrorCode::invalid_argument, "dim must be >= 2");
    if (n_models < 1) throw Error(ErrorCode::invalid_argument, "n_models must be >= 1");
    if (n_docs < 1) throw Error(ErrorCode::invalid_argument, "n_docs must be >= 1");
    if (relevant_per_query > n_docs) {
        throw Error(ErrorCode::invalid_argument, "relevant_per_query exceeds n_docs");
    }
    if (!std::isfinite(noise) || noise < 0.0) throw Error(ErrorCode::invalid_argument, "noise must be >= 0");
}

SynthCorpus generate_synthetic(const SynthSpec& spec, int threads) {
    spec.validate();
    const int workers = worker_count(threads);
    const std::size_t dim = spec.dim;

    // Relevance assignment: walk a seeded permutation of the documents. A doc
    // claimed twice stays with its first query.
    std::vector<std::uint64_t> perm(spec.n_docs);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    {
        RowRng rng(spec.seed, kShuffle, 0, 0);
        for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    }
    constexpr std::int64_t kUnowned = -1;
    std::vector<std::int64_t> owner(spec.n_docs, kUnowned);
    for (std::size_t q = 0; q < spec.n_queries; ++q) {
        for (std::size_t j = 0; j < spec.relevant_per_query; ++j) {
            const auto d = perm[(q * spec.relevant_per_query + j) % spec.n_docs];
            if (owner[d] == kUnowned) owner[d] = static_cast<std::int64_t>(q);
        }
    }

    std::vector<std::string> qids(spec.n_queries), dids(spec.n_docs);
    for (std::size_t q = 0; q < spec.n_queries; ++q) qids[q] = padded_id('q', q, spec.n_queries);
    for (std::size_t d = 0; d < spec.n_docs; ++d) dids[d] = padded_id('d', d, spec.n_docs);

    SynthCorpus corpus;
    for (std::size_t d = 0; d < spec.n_docs; ++d) {
        if (owner[d] != kUnowned) corpus.qrels[qids[static_cast<std::size_t>(owner[d])]].insert(dids[d]);
    }
    corpus.query_ids = IdTable(std::move(qids));
    corpus.doc_ids = IdTable(std::move(dids));

    const auto nq = static_cast<std::int64_t>(spec.n_queries);
    const auto nd = static_cast<std::int64_t>(spec.n_docs);
    for (std::size_t m = 0; m < spec.n_models; ++m) {
        std::vector<float> qv(spec.n_queries * dim), dv(spec.n_docs * dim);
#pragma omp parallel num_threads(workers)
        {
#pragma omp for schedule(static)
            for (std::int64_t q = 0; q < nq; ++q) {
                const auto latent = unit_latent(RowRng(spec.seed, kQueryLatent, 0, q), dim);
                perturbed_row(latent, spec.noise, RowRng(spec.seed, kQueryNoise, m, q), qv.data() + q * dim);
            }
#pragma omp for schedule(static)
            for (std::int64_t d = 0; d < nd; ++d) {
                const auto latent = owner[d] != kUnowned
                                        ? unit_latent(RowRng(spec.seed, kQueryLatent, 0, owner[d]), dim)
                                        : unit_latent(RowRng(spec.seed, kDocLatent, 0, d), dim);
                perturbed_row(latent, spec.noise, RowRng(spec.seed, kDocNoise, m, d), dv.data() + d * dim);
            }
        }
        corpus.models.push_back({"model" + std::to_string(m + 1),
                                 EmbeddingMatrix(spec.n_queries, dim, std::move(qv)),
                                 EmbeddingMatrix(spec.n_docs, dim, std::move(dv))});
    }
    return corpus;
}

void write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& dir, std::size_t M,
                     std::size_t k) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());

    Manifest manifest;
    manifest.base_dir = dir;
    for (const auto& model : corpus.models) {
        const std::string qfile = model.name + ".queries.embf";
        const std::string dfile = model.name + ".docs.embf";
        write_embf(dir / qfile, model.queries, corpus.query_ids);
        write_embf(dir / dfile, model.docs, corpus.doc_ids);
        manifest.models.push_back({model.name, qfile, dfile, {}});
    }
    write_qrels_file(dir / "qrels.tsv", corpus.qrels);

    FusionConfig config;
    config.weights = FusionConfig::uniform_weights(corpus.models.size());
    config.M = M;
    config.k = k;
    save_fusion_config(dir / "fusion.json", config);

    manifest.fusion_config = "fusion.json";
    manifest.qrels = "qrels.tsv";
    save_manifest(dir / "manifest.json", manifest);
}

}  // namespace simfuse
