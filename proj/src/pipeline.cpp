// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "simfuse/error.hpp"
#include "simfuse/promptkit.hpp"
#include "simfuse/runio.hpp"
#include "simfuse/simsearch.hpp"

namespace simfuse {

namespace {

[[noreturn]] void rethrow_for_model(const std::string& model, const Error& e) {
    throw Error(e.code(), "model '" + model + "': " + e.what());
}

void ensure_parent(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorCode::io, "cannot create " + path.parent_path().string() + ": " + ec.message());
    }
}

std::filesystem::path run_path_for(const Manifest& manifest, const ModelEntry& model,
                                   const std::optional<std::filesystem::path>& runs_dir) {
    if (runs_dir) return *runs_dir / (model.name + ".tsv");
    return manifest.run_path(model);
}

IdTable shared_ids(const Manifest& manifest, bool queries) {
    IdTable first;
    for (std::size_t m = 0; m < manifest.models.size(); ++m) {
        const auto& model = manifest.models[m];
        IdTable ids;
        try {
            ids = read_id_sidecar(manifest.resolve(queries ? model.queries : model.docs));
        } catch (const Error& e) {
            rethrow_for_model(model.name, e);
        }
        if (m == 0) {
            first = std::move(ids);
        } else if (!(ids == first)) {
            throw Error(ErrorCode::mismatch, std::string(queries ? "query" : "doc") +
                                                 " id table mismatch between '" + manifest.models[0].name +
                                                 "' and '" + model.name + "'");
        }
    }
    return first;
}

std::vector<std::vector<CandidateSet>> load_runs(const Manifest& manifest,
                                                 const std::optional<std::filesystem::path>& runs_dir,
                                                 const IdTable& query_ids, const IdTable& doc_ids,
                                                 std::size_t M) {
    std::vector<std::vector<CandidateSet>> all;
    for (const auto& model : manifest.models) {
        try {
            auto sets = read_candidate_run_file(run_path_for(manifest, model, runs_dir), query_ids, doc_ids);
            for (auto& s : sets) {
                if (s.entries.size() > M) s.entries.resize(M);
            }
            all.push_back(std::move(sets));
        } catch (const Error& e) {
            rethrow_for_model(model.name, e);
        }
    }
    return all;
}

RunTable to_run_table(const std::vector<FusedRanking>& rankings) {
    RunTable run;
    run.reserve(rankings.size());
    for (const auto& r : rankings) {
        RankedList list{r.query_id, {}};
        for (const auto& e : r.ranked) list.entries.push_back({e.doc_id, e.score});
        run.push_back(std::move(list));
    }
    return run;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

IdTable manifest_query_ids(const Manifest& manifest) { return shared_ids(manifest, true); }
IdTable manifest_doc_ids(const Manifest& manifest) { return shared_ids(manifest, false); }

FusionConfig resolve_fusion_config(const Manifest& manifest, const ConfigOverrides& overrides) {
    FusionConfig config;
    if (overrides.config) {
        config = load_fusion_config(*overrides.config);
    } else if (!manifest.fusion_config.empty()) {
        config = load_fusion_config(manifest.resolve(manifest.fusion_config));
    }
    if (overrides.M) config.M = *overrides.M;
    if (overrides.k) config.k = *overrides.k;
    if (config.weights.empty()) config.weights = FusionConfig::uniform_weights(manifest.models.size());
    config.validate(manifest.models.size());
    return config;
}

std::vector<std::filesystem::path> cmd_search(const SearchRequest& request) {
    const Manifest& manifest = request.manifest;
    manifest.validate();
    const FusionConfig config = resolve_fusion_config(manifest, request.overrides);
    const IdTable query_ids = manifest_query_ids(manifest);
    const IdTable doc_ids = manifest_doc_ids(manifest);

    SearchOptions options;
    options.threads = request.threads;
    std::vector<std::filesystem::path> written;
    for (const auto& model : manifest.models) {
        try {
            const auto queries = read_embf(manifest.resolve(model.queries));
            const auto docs = read_embf(manifest.resolve(model.docs));
            const auto sets = topk_search(queries.matrix, docs.matrix, config.M, options);
            const auto path = run_path_for(manifest, model, request.runs_dir);
            ensure_parent(path);
            write_candidate_run_file(path, sets, query_ids, doc_ids);
            written.push_back(path);
        } catch (const Error& e) {
            rethrow_for_model(model.name, e);
        }
    }
    return written;
}

FuseOutputs cmd_fuse(const FuseRequest& request) {
    const Manifest& manifest = request.manifest;
    manifest.validate();
    const FusionConfig config = resolve_fusion_config(manifest, request.overrides);
    const IdTable query_ids = manifest_query_ids(manifest);
    const IdTable doc_ids = manifest_doc_ids(manifest);
    const DocCatalog catalog(doc_ids);

    const auto all = load_runs(manifest, request.runs_dir, query_ids, doc_ids, config.M);
    const auto rankings = fuse_run(all, config, catalog, query_ids, request.threads);

    FuseOutputs out;
    out.submission = request.submission.value_or(manifest.resolve(manifest.outputs.submission));
    out.fused_run = request.fused_run.value_or(manifest.resolve(manifest.outputs.fused_run));
    out.queries = rankings.size();
    ensure_parent(out.submission);
    ensure_parent(out.fused_run);
    write_submission(out.submission, rankings, config.k);
    write_run_file(out.fused_run, to_run_table(rankings));
    return out;
}

TuneOutputs cmd_tune(const TuneRequest& request) {
    const Manifest& manifest = request.manifest;
    manifest.validate();
    FusionConfig config = resolve_fusion_config(manifest, request.overrides);
    std::filesystem::path qrels_path;
    if (request.qrels) {
        qrels_path = *request.qrels;
    } else if (!manifest.qrels.empty()) {
        qrels_path = manifest.resolve(manifest.qrels);
    } else {
        throw Error(ErrorCode::invalid_argument, "tune needs qrels (--qrels or manifest 'qrels')");
    }
    const Qrels qrels = read_qrels_file(qrels_path);
    const IdTable query_ids = manifest_query_ids(manifest);
    const IdTable doc_ids = manifest_doc_ids(manifest);
    const DocCatalog catalog(doc_ids);
    const auto all = load_runs(manifest, request.runs_dir, query_ids, doc_ids, config.M);

    TuneOutputs out;
    out.result = tune_weights(all, qrels, request.resolution, config, catalog, query_ids, request.threads);
    config.weights = out.result.weights;
    out.config = config;
    out.config_path = request.out.value_or(manifest.resolve(manifest.outputs.tuned_config));
    ensure_parent(out.config_path);
    save_fusion_config(out.config_path, config, out.result.map);
    return out;
}

RunRanking read_any_run(const std::filesystem::path& path, const IdTable* query_ids) {
    const std::string text = read_text(path);
    RunRanking run;
    if (text.find('\t') != std::string::npos) {
        std::istringstream in(text);
        for (auto& list : read_run(in)) {
            auto& docs = run[list.query_id];
            for (auto& e : list.entries) docs.push_back(std::move(e.doc_id));
        }
        return run;
    }
    if (query_ids == nullptr) {
        throw Error(ErrorCode::invalid_argument, "submission-format run needs a query id table (--query-ids or --manifest)");
    }
    std::istringstream in(text);
    std::string line;
    std::size_t q = 0;
    while (std::getline(in, line)) {
        if (q >= query_ids->size()) {
            throw Error(ErrorCode::mismatch, "submission has more lines than the query id table");
        }
        std::istringstream words(line);
        auto& docs = run[(*query_ids)[q]];
        for (std::string d; words >> d;) docs.push_back(d);
        ++q;
    }
    if (q != query_ids->size()) {
        throw Error(ErrorCode::mismatch, "submission has " + std::to_string(q) + " lines for " +
                                             std::to_string(query_ids->size()) + " queries");
    }
    return run;
}

EvalReport cmd_eval(const EvalRequest& request) {
    std::optional<IdTable> qids;
    if (request.query_ids) qids = decode_id_sidecar(read_text(*request.query_ids));
    const RunRanking run = read_any_run(request.run, qids ? &*qids : nullptr);
    const Qrels qrels = read_qrels_file(request.qrels);
    return evaluate(run, qrels, request.k);
}

void print_report(std::ostream& out, const EvalReport& report, bool per_query) {
    out << "queries_judged\t" << report.judged_queries << '\n';
    out << "queries_in_run\t" << report.matched_queries << '\n';
    out << "MAP@" << report.k << '\t' << fixed6(report.map) << '\n';
    out << "Recall@" << report.k << '\t' << fixed6(report.mean_recall) << '\n';
    if (per_query) {
        for (const auto& q : report.per_query) {
            out << "AP@" << report.k << '\t' << q.query_id << '\t' << fixed6(q.ap) << '\n';
        }
    }
}

void cmd_submit(const SubmitRequest& request) {
    const RunTable run = read_run_file(request.run);
    std::unordered_map<std::string, const RankedList*> by_query;
    for (const auto& list : run) by_query[list.query_id] = &list;
    std::vector<FusedRanking> rankings;
    rankings.reserve(request.query_ids.size());
    for (std::size_t q = 0; q < request.query_ids.size(); ++q) {
        FusedRanking r{request.query_ids[q], {}};
        if (auto it = by_query.find(r.query_id); it != by_query.end()) {
            const auto& entries = it->second->entries;
            for (std::size_t i = 0; i < std::min(request.k, entries.size()); ++i) {
                r.ranked.push_back({0, entries[i].doc_id, entries[i].score});
            }
        }
        rankings.push_back(std::move(r));
    }
    ensure_parent(request.out);
    write_submission(request.out, rankings, request.k);
}

void cmd_gen_synth(const SynthSpec& spec, const std::filesystem::path& dir, std::size_t M,
                   std::size_t k, int threads) {
    FusionConfig probe;
    probe.weights = FusionConfig::uniform_weights(std::max<std::size_t>(spec.n_models, 1));
    probe.M = M;
    probe.k = k;
    probe.validate();
    write_synthetic(generate_synthetic(spec, threads), dir, M, k);
}

std::size_t cmd_ingest(const IngestRequest& request, std::ostream& out) {
    if (!request.template_override) promptkit::tag_template(request.tag_id);
    if (request.queries && !request.instruction_override) promptkit::instruction(request.instruction_id);

    std::ifstream in(request.input, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + request.input.string());
    std::string line;
    std::size_t line_no = 0;
    std::size_t count = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::ordered_json obj;
        if (request.queries) {
            const auto q = promptkit::parse_query_line(line, line_no);
            const std::string_view pattern = request.template_override
                                                 ? std::string_view(*request.template_override)
                                                 : promptkit::tag_template(request.tag_id).pattern;
            const std::string_view instr = request.instruction_override
                                               ? std::string_view(*request.instruction_override)
                                               : promptkit::instruction(request.instruction_id).text;
            obj["id"] = q.id;
            obj["text"] = promptkit::wrap_query(instr, promptkit::substitute(pattern, q.title, q.body));
        } else {
            const auto d = promptkit::parse_doc_line(line, line_no);
            obj["id"] = d.id;
            obj["text"] = request.template_override
                              ? promptkit::substitute(*request.template_override, d.title, d.abstract)
                              : promptkit::render_document(d);
        }
        out << obj.dump() << '\n';
        ++count;
    }
    return count;
}

}  // namespace simfuse
