// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Blocked parallel kernels against the serial reference implementations.

#include <benchmark/benchmark.h>

#include "simfuse/fusion.hpp"
#include "simfuse/reference.hpp"
#include "simfuse/simsearch.hpp"
#include "simfuse/synth.hpp"

namespace {

const simfuse::SynthCorpus& corpus(std::size_t docs) {
    static std::map<std::size_t, simfuse::SynthCorpus> cache;
    auto it = cache.find(docs);
    if (it == cache.end()) {
        simfuse::SynthSpec spec;
        spec.n_queries = 128;
        spec.n_docs = docs;
        spec.dim = 64;
        spec.n_models = 2;
        spec.noise = 1.0;
        it = cache.emplace(docs, simfuse::generate_synthetic(spec)).first;
    }
    return it->second;
}

void BM_TopkBlocked(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
    simfuse::SearchOptions options;
    options.threads = static_cast<int>(state.range(1));
    for (auto _ : state) {
        auto sets = simfuse::topk_search(c.models[0].queries, c.models[0].docs, 100, options);
        benchmark::DoNotOptimize(sets.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 128);
}

void BM_TopkNaive(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto sets = simfuse::reference::naive_topk(c.models[0].queries, c.models[0].docs, 100);
        benchmark::DoNotOptimize(sets.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 128);
}

void BM_FuseCandidates(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
    std::vector<std::vector<simfuse::CandidateSet>> all;
    for (const auto& m : c.models) all.push_back(simfuse::topk_search(m.queries, m.docs, 1000));
    simfuse::FusionConfig config;
    config.weights = {0.5, 0.5};
    const simfuse::DocCatalog catalog(c.doc_ids);
    for (auto _ : state) {
        auto r = simfuse::fuse_run(all, config, catalog, c.query_ids, static_cast<int>(state.range(1)));
        benchmark::DoNotOptimize(r.data());
    }
}

void BM_FuseFullMatrix(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
    std::vector<simfuse::ScoreMatrix> full;
    for (const auto& m : c.models) full.push_back(simfuse::full_similarity(m.queries, m.docs));
    simfuse::FusionConfig config;
    config.weights = {0.5, 0.5};
    for (auto _ : state) {
        auto r = simfuse::reference::fuse_full_matrix(full, config, c.doc_ids, c.query_ids);
        benchmark::DoNotOptimize(r.data());
    }
}

}  // namespace

BENCHMARK(BM_TopkBlocked)->ArgsProduct({{10000, 50000}, {1, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TopkNaive)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FuseCandidates)->ArgsProduct({{10000}, {1, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FuseFullMatrix)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
