// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/fusion.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "simfuse/error.hpp"
#include "simfuse/parallel.hpp"

namespace simfuse {

namespace {

/// Candidate universe of one query with a dense (doc x model) table of
/// normalized scores; absent entries hold missing_fill.
struct QueryUnion {
    std::vector<std::uint32_t> docs;  // ascending doc index
    std::vector<double> values;       // docs.size() * models, row-major
    std::size_t models = 0;
};

struct Hit {
    std::uint32_t doc_index;
    double score;
};

QueryUnion build_union(std::span<const NormalizedSet> per_model, double missing_fill) {
    QueryUnion u;
    u.models = per_model.size();
    for (const auto& set : per_model) {
        for (const auto& e : set.entries) u.docs.push_back(e.doc_index);
    }
    std::sort(u.docs.begin(), u.docs.end());
    u.docs.erase(std::unique(u.docs.begin(), u.docs.end()), u.docs.end());
    u.values.assign(u.docs.size() * u.models, missing_fill);
    for (std::size_t m = 0; m < u.models; ++m) {
        for (const auto& e : per_model[m].entries) {
            const auto pos = static_cast<std::size_t>(
                std::lower_bound(u.docs.begin(), u.docs.end(), e.doc_index) - u.docs.begin());
            u.values[pos * u.models + m] = e.score;
        }
    }
    return u;
}

std::vector<Hit> rank_union(const QueryUnion& u, std::span<const double> weights, std::size_t k,
                            const DocCatalog& docs) {
    std::vector<Hit> hits(u.docs.size());
    for (std::size_t i = 0; i < u.docs.size(); ++i) {
        double fused = 0.0;
        const double* row = u.values.data() + i * u.models;
        for (std::size_t m = 0; m < u.models; ++m) fused += weights[m] * row[m];
        hits[i] = {u.docs[i], fused};
    }
    const auto before = [&docs](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return docs.lex_rank(a.doc_index) < docs.lex_rank(b.doc_index);
    };
    const std::size_t depth = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(depth), hits.end(), before);
    hits.resize(depth);
    return hits;
}

FusedRanking to_ranking(const std::vector<Hit>& hits, const DocCatalog& docs, std::string query_id) {
    FusedRanking ranking{std::move(query_id), {}};
    ranking.ranked.reserve(hits.size());
    for (const auto& h : hits) ranking.ranked.push_back({h.doc_index, docs.ids()[h.doc_index], h.score});
    return ranking;
}

void check_query_alignment(std::span<const std::vector<CandidateSet>> all_models) {
    if (all_models.empty()) throw Error(ErrorCode::invalid_argument, "no models to fuse");
    const auto& first = all_models.front();
    for (std::size_t m = 1; m < all_models.size(); ++m) {
        const auto& other = all_models[m];
        bool same = other.size() == first.size();
        for (std::size_t q = 0; same && q < first.size(); ++q) {
            same = other[q].query_index == first[q].query_index;
        }
        if (!same) {
            throw Error(ErrorCode::mismatch,
                        "query-set mismatch between model 0 and model " + std::to_string(m));
        }
    }
}

/// Normalizes every model's set for query position q.
std::vector<NormalizedSet> normalized_for_query(std::span<const std::vector<CandidateSet>> all_models,
                                                std::size_t q, double degenerate_fill) {
    std::vector<NormalizedSet> per_model;
    per_model.reserve(all_models.size());
    for (const auto& model : all_models) per_model.push_back(normalize_per_query(model[q], degenerate_fill));
    return per_model;
}

double json_number(const nlohmann::json& obj, const char* key, double fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw Error(ErrorCode::format, std::string("fusion config: '") + key + "' is not a number");
    return it->get<double>();
}

std::size_t json_count(const nlohmann::json& obj, const char* key, std::size_t fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_unsigned()) {
        throw Error(ErrorCode::format, std::string("fusion config: '") + key + "' must be a non-negative integer");
    }
    return it->get<std::size_t>();
}

}  // namespace

void FusionConfig::validate(std::optional<std::size_t> num_models) const {
    if (weights.empty()) throw Error(ErrorCode::invalid_argument, "no weights");
    if (num_models && weights.size() != *num_models) {
        throw Error(ErrorCode::mismatch, "weight/model count mismatch: " + std::to_string(weights.size()) +
                                             " weights, " + std::to_string(*num_models) + " models");
    }
    bool any_positive = false;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw Error(ErrorCode::invalid_argument, "weights must be finite and >= 0");
        any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) throw Error(ErrorCode::invalid_argument, "all-zero weights");
    if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
    if (M < k) {
        throw Error(ErrorCode::invalid_argument,
                    "M (" + std::to_string(M) + ") must be >= k (" + std::to_string(k) + ")");
    }
    if (!(0.0 <= missing_fill && missing_fill <= degenerate_fill && degenerate_fill <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "fills must satisfy 0 <= missing_fill <= degenerate_fill <= 1");
    }
}

std::vector<double> FusionConfig::uniform_weights(std::size_t num_models) {
    if (num_models == 0) throw Error(ErrorCode::invalid_argument, "no models");
    return std::vector<double>(num_models, 1.0 / static_cast<double>(num_models));
}

FusionConfig parse_fusion_config(const std::string& json_text) {
    auto obj = nlohmann::json::parse(json_text, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw Error(ErrorCode::format, "fusion config is not a JSON object");
    FusionConfig config;
    if (auto it = obj.find("weights"); it != obj.end()) {
        if (!it->is_array()) throw Error(ErrorCode::format, "fusion config: 'weights' is not an array");
        for (const auto& w : *it) {
            if (!w.is_number()) throw Error(ErrorCode::format, "fusion config: non-numeric weight");
            config.weights.push_back(w.get<double>());
        }
    }
    config.M = json_count(obj, "M", config.M);
    config.k = json_count(obj, "k", config.k);
    config.degenerate_fill = json_number(obj, "degenerate_fill", config.degenerate_fill);
    config.missing_fill = json_number(obj, "missing_fill", config.missing_fill);
    return config;
}

FusionConfig load_fusion_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_fusion_config(text);
}

std::string fusion_config_json(const FusionConfig& config, std::optional<double> validation_map) {
    nlohmann::ordered_json obj;
    obj["weights"] = config.weights;
    obj["M"] = config.M;
    obj["k"] = config.k;
    obj["degenerate_fill"] = config.degenerate_fill;
    obj["missing_fill"] = config.missing_fill;
    if (validation_map) obj["validation_map"] = *validation_map;
    return obj.dump(2) + "\n";
}

void save_fusion_config(const std::filesystem::path& path, const FusionConfig& config,
                        std::optional<double> validation_map) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    out << fusion_config_json(config, validation_map);
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

NormalizedSet normalize_per_query(const CandidateSet& cands, double degenerate_fill) {
    if (cands.entries.empty()) throw Error(ErrorCode::invalid_argument, "empty candidate set");
    float lo = cands.entries.front().score;
    float hi = lo;
    for (const auto& e : cands.entries) {
        lo = std::min(lo, e.score);
        hi = std::max(hi, e.score);
    }
    const double min = lo;
    const double range = static_cast<double>(hi) - min;
    NormalizedSet out{cands.query_index, {}};
    out.entries.reserve(cands.entries.size());
    for (const auto& e : cands.entries) {
        const double n = range < kDegenerateRange ? degenerate_fill : (static_cast<double>(e.score) - min) / range;
        out.entries.push_back({e.doc_index, n});
    }
    return out;
}

DocCatalog::DocCatalog(const IdTable& ids) : ids_(&ids), lex_rank_(ids.size()) {
    std::vector<std::uint32_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&ids](std::uint32_t a, std::uint32_t b) { return ids[a] < ids[b]; });
    for (std::size_t r = 0; r < order.size(); ++r) lex_rank_[order[r]] = static_cast<std::uint32_t>(r);
}

FusedRanking fuse(std::span<const NormalizedSet> per_model, const FusionConfig& config,
                  const DocCatalog& docs, const std::string& query_id) {
    config.validate(per_model.size());
    for (const auto& set : per_model) {
        for (const auto& e : set.entries) {
            if (e.doc_index >= docs.size()) throw Error(ErrorCode::mismatch, "doc index outside the catalog");
        }
    }
    const auto u = build_union(per_model, config.missing_fill);
    return to_ranking(rank_union(u, config.weights, config.k, docs), docs, query_id);
}

std::vector<FusedRanking> fuse_run(std::span<const std::vector<CandidateSet>> all_models,
                                   const FusionConfig& config, const DocCatalog& docs,
                                   const IdTable& query_ids, int threads) {
    check_query_alignment(all_models);
    config.validate(all_models.size());
    const auto& first = all_models.front();
    for (const auto& set : first) {
        if (set.query_index >= query_ids.size()) {
            throw Error(ErrorCode::mismatch, "query index outside the query id table");
        }
    }
    for (const auto& model : all_models) {
        for (const auto& set : model) {
            for (const auto& e : set.entries) {
                if (e.doc_index >= docs.size()) throw Error(ErrorCode::mismatch, "doc index outside the catalog");
            }
        }
    }

    std::vector<FusedRanking> out(first.size());
    const auto nq = static_cast<std::int64_t>(first.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16) num_threads(worker_count(threads))
    for (std::int64_t q = 0; q < nq; ++q) {
        try {
            const auto per_model = normalized_for_query(all_models, static_cast<std::size_t>(q), config.degenerate_fill);
            const auto u = build_union(per_model, config.missing_fill);
            out[q] = to_ranking(rank_union(u, config.weights, config.k, docs), docs,
                                query_ids[first[q].query_index]);
        } catch (...) {
#pragma omp critical(simfuse_fuse_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<std::vector<double>> simplex_grid(std::size_t num_models, std::size_t resolution) {
    if (resolution < 2) throw Error(ErrorCode::invalid_argument, "grid resolution must be >= 2");
    if (num_models == 0) throw Error(ErrorCode::invalid_argument, "no models");
    const std::size_t steps = resolution - 1;
    std::vector<std::vector<double>> grid;
    std::vector<std::size_t> counts(num_models, 0);
    // Lexicographic enumeration of compositions of `steps` into num_models parts.
    auto recurse = [&](auto&& self, std::size_t pos, std::size_t remaining) -> void {
        if (pos + 1 == num_models) {
            counts[pos] = remaining;
            std::vector<double> w(num_models);
            for (std::size_t m = 0; m < num_models; ++m) {
                w[m] = static_cast<double>(counts[m]) / static_cast<double>(steps);
            }
            grid.push_back(std::move(w));
            return;
        }
        for (std::size_t c = 0; c <= remaining; ++c) {
            counts[pos] = c;
            self(self, pos + 1, remaining - c);
        }
    };
    recurse(recurse, 0, steps);
    return grid;
}

TuneResult tune_weights(std::span<const std::vector<CandidateSet>> all_models, const Qrels& qrels,
                        std::size_t grid_resolution, const FusionConfig& config,
                        const DocCatalog& docs, const IdTable& query_ids, int threads) {
    check_query_alignment(all_models);
    const auto grid = simplex_grid(all_models.size(), grid_resolution);
    {
        FusionConfig probe = config;
        probe.weights = FusionConfig::uniform_weights(all_models.size());
        probe.validate(all_models.size());
    }
    if (qrels.empty()) throw Error(ErrorCode::invalid_argument, "empty qrels");

    // Position of each query in the candidate lists.
    const auto& first = all_models.front();
    std::vector<std::int64_t> position(query_ids.size(), -1);
    for (std::size_t q = 0; q < first.size(); ++q) {
        if (first[q].query_index >= query_ids.size()) {
            throw Error(ErrorCode::mismatch, "query index outside the query id table");
        }
        position[first[q].query_index] = static_cast<std::int64_t>(q);
    }

    struct Judged {
        QueryUnion u;
        std::unordered_set<std::uint64_t> relevant;
    };
    std::vector<Judged> judged;
    std::uint64_t unknown_doc = docs.size();
    for (const auto& [qid, rel_docs] : qrels) {
        const auto qi = query_ids.find(qid);
        if (!qi || position[*qi] < 0) continue;
        const auto pos = static_cast<std::size_t>(position[*qi]);
        Judged j;
        j.u = build_union(normalized_for_query(all_models, pos, config.degenerate_fill), config.missing_fill);
        // Relevant docs outside the corpus still count toward |relevant|.
        for (const auto& d : rel_docs) {
            const auto di = docs.ids().find(d);
            j.relevant.insert(di ? static_cast<std::uint64_t>(*di) : unknown_doc++);
        }
        judged.push_back(std::move(j));
    }
    if (judged.empty()) throw Error(ErrorCode::mismatch, "empty qrels intersection with the run");

    std::vector<double> maps(grid.size(), 0.0);
    const auto ngrid = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count(threads))
    for (std::int64_t g = 0; g < ngrid; ++g) {
        double sum = 0.0;
        std::vector<std::uint64_t> top;
        for (const auto& j : judged) {
            const auto hits = rank_union(j.u, grid[g], config.k, docs);
            top.clear();
            for (const auto& h : hits) top.push_back(h.doc_index);
            sum += average_precision_unchecked(std::span<const std::uint64_t>(top), j.relevant, config.k);
        }
        maps[g] = sum / static_cast<double>(qrels.size());
    }

    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (maps[g] > maps[best]) best = g;
    }
    return {grid[best], maps[best], grid.size()};
}

RunRanking to_run_ranking(std::span<const FusedRanking> rankings) {
    RunRanking run;
    for (const auto& r : rankings) {
        auto& docs = run[r.query_id];
        docs.clear();
        for (const auto& e : r.ranked) docs.push_back(e.doc_id);
    }
    return run;
}

void write_submission(std::ostream& out, std::span<const FusedRanking> rankings, std::size_t k) {
    for (const auto& r : rankings) {
        if (r.ranked.size() < k) {
            throw Error(ErrorCode::invariant, "short ranking for query '" + r.query_id + "': " +
                                                  std::to_string(r.ranked.size()) + " < k=" + std::to_string(k));
        }
        if (r.ranked.size() > k) {
            throw Error(ErrorCode::invariant, "long ranking for query '" + r.query_id + "': " +
                                                  std::to_string(r.ranked.size()) + " > k=" + std::to_string(k));
        }
    }
    std::string line;
    for (const auto& r : rankings) {
        line.clear();
        for (std::size_t i = 0; i < r.ranked.size(); ++i) {
            if (i > 0) line.push_back(' ');
            line += r.ranked[i].doc_id;
        }
        line.push_back('\n');
        out.write(line.data(), static_cast<std::streamsize>(line.size()));
    }
}

void write_submission(const std::filesystem::path& path, std::span<const FusedRanking> rankings,
                      std::size_t k) {
    std::ostringstream buffer;
    write_submission(buffer, rankings, k);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    out << buffer.str();
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace simfuse
