// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

// simfuse: multi-model dense retrieval similarity fusion.
//
//   simfuse gen-synth --out DIR [--queries N --docs N --dim D --models K ...]
//   simfuse search    --manifest DIR/manifest.json [--M 1000]
//   simfuse tune      --manifest ... [--qrels FILE --resolution 11]
//   simfuse fuse      --manifest ... [--config FILE --k 20]
//   simfuse submit    --run FUSED.tsv --manifest ... --out FILE
//   simfuse eval      --run RUN --qrels FILE [--k 20]
//   simfuse ingest    --input FILE.jsonl --kind query|document [--tag N --instruction N]
//
// On failure prints one line `simfuse: error: <code>: <message>` to stderr
// and exits with status 1.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "simfuse/error.hpp"
#include "simfuse/parallel.hpp"
#include "simfuse/pipeline.hpp"

namespace {

using simfuse::ConfigOverrides;

struct Common {
    std::string manifest;
    std::string config;
    std::string qrels;
    std::string out;
    std::size_t k = simfuse::kDefaultK;
    std::size_t M = simfuse::kDefaultM;
    std::optional<int> threads;
};

void add_threads(CLI::App* cmd, Common& c) {
    cmd->add_option("--threads", c.threads, "Worker threads (fallback: $SIMFUSE_THREADS)");
}

ConfigOverrides overrides(const Common& c, const CLI::App* cmd) {
    ConfigOverrides o;
    if (!c.config.empty()) o.config = c.config;
    if (cmd->count("--M") > 0) o.M = c.M;
    if (cmd->count("--k") > 0) o.k = c.k;
    return o;
}

std::optional<std::filesystem::path> opt_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

int fail(const std::string& code, const std::string& message) {
    std::string line = message;
    for (auto& ch : line) {
        if (ch == '\n' || ch == '\r') ch = ' ';
    }
    std::fprintf(stderr, "simfuse: error: %s: %s\n", code.c_str(), line.c_str());
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-model dense retrieval similarity fusion"};
    app.require_subcommand(1);
    Common c;

    auto* search = app.add_subcommand("search", "Exact top-M search for every model in the manifest");
    search->add_option("--manifest", c.manifest, "Pipeline manifest (JSON)")->required();
    search->add_option("--config", c.config, "Fusion config (JSON); overrides the manifest");
    search->add_option("--M", c.M, "Candidates retained per query and model");
    search->add_option("--k", c.k, "Output depth (validated against M)");
    search->add_option("--out", c.out, "Directory for per-model run files");
    add_threads(search, c);

    auto* fuse = app.add_subcommand("fuse", "Normalize, fuse, and write the submission + fused run");
    std::string fused_run;
    fuse->add_option("--manifest", c.manifest, "Pipeline manifest (JSON)")->required();
    fuse->add_option("--config", c.config, "Fusion config (JSON)");
    fuse->add_option("--M", c.M, "Candidates used per query and model");
    fuse->add_option("--k", c.k, "Output depth");
    fuse->add_option("--out", c.out, "Submission path");
    fuse->add_option("--fused-run", fused_run, "Fused TSV run path");
    add_threads(fuse, c);

    auto* tune = app.add_subcommand("tune", "Grid-search fusion weights against validation qrels");
    std::size_t resolution = simfuse::kDefaultGridResolution;
    tune->add_option("--manifest", c.manifest, "Pipeline manifest (JSON)")->required();
    tune->add_option("--config", c.config, "Base fusion config (JSON)");
    tune->add_option("--qrels", c.qrels, "Validation qrels (TSV)");
    tune->add_option("--resolution", resolution, "Grid points per weight axis (>= 2)");
    tune->add_option("--M", c.M, "Candidates used per query and model");
    tune->add_option("--k", c.k, "Evaluation/output depth");
    tune->add_option("--out", c.out, "Tuned config path");
    add_threads(tune, c);

    auto* eval = app.add_subcommand("eval", "MAP@k and Recall@k of a run against qrels");
    std::string run_path, query_ids_path;
    bool per_query = false;
    eval->add_option("--run", run_path, "TSV run or submission file")->required();
    eval->add_option("--qrels", c.qrels, "Qrels (TSV)")->required();
    eval->add_option("--k", c.k, "Cutoff");
    eval->add_option("--query-ids", query_ids_path, "Query id list for submission-format runs");
    eval->add_option("--manifest", c.manifest, "Take query ids from this manifest");
    eval->add_option("--out", c.out, "Write the report here instead of stdout");
    eval->add_flag("--per-query", per_query, "Also print AP per query");

    auto* submit = app.add_subcommand("submit", "Convert a ranked TSV run into the submission format");
    submit->add_option("--run", run_path, "Ranked TSV run (e.g. the fused run)")->required();
    submit->add_option("--manifest", c.manifest, "Manifest supplying the query order");
    submit->add_option("--query-ids", query_ids_path, "Query id list giving the line order");
    submit->add_option("--k", c.k, "IDs per line");
    submit->add_option("--out", c.out, "Submission path")->required();

    auto* gen = app.add_subcommand("gen-synth", "Generate a planted-relevance synthetic corpus");
    simfuse::SynthSpec spec;
    std::uint64_t seed = spec.seed;
    gen->add_option("--queries", spec.n_queries, "Number of queries");
    gen->add_option("--docs", spec.n_docs, "Number of documents");
    gen->add_option("--dim", spec.dim, "Embedding dimension (>= 2)");
    gen->add_option("--models", spec.n_models, "Number of models");
    gen->add_option("--relevant", spec.relevant_per_query, "Relevant documents per query");
    gen->add_option("--noise", spec.noise, "Per-model perturbation scale relative to the signal");
    gen->add_option("--seed", seed, "Generator seed");
    gen->add_option("--M", c.M, "M written into fusion.json");
    gen->add_option("--k", c.k, "k written into fusion.json");
    gen->add_option("--out", c.out, "Output directory")->required();
    add_threads(gen, c);

    auto* ingest = app.add_subcommand("ingest", "Render JSON-lines records into encoder-ready text");
    simfuse::IngestRequest ing;
    std::string input, kind = "query", template_override, instruction_override;
    ingest->add_option("--input", input, "JSON-lines records")->required();
    ingest->add_option("--kind", kind, "query or document")->check(CLI::IsMember({"query", "document"}));
    ingest->add_option("--tag", ing.tag_id, "Tag format 1..5");
    ingest->add_option("--instruction", ing.instruction_id, "Instruction 1..4");
    ingest->add_option("--template", template_override, "Custom pattern with {title} and {body}");
    ingest->add_option("--instruction-text", instruction_override, "Custom instruction text");
    ingest->add_option("--out", c.out, "Output JSON-lines (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail("usage", e.what());
    }

    try {
        const int threads = simfuse::resolve_threads(c.threads);
        std::optional<simfuse::Manifest> manifest;
        if (!c.manifest.empty()) manifest = simfuse::load_manifest(c.manifest);

        if (*search) {
            simfuse::SearchRequest req{*manifest, overrides(c, search), opt_path(c.out), threads};
            for (const auto& p : simfuse::cmd_search(req)) std::cout << p.string() << '\n';
        } else if (*fuse) {
            simfuse::FuseRequest req{*manifest, overrides(c, fuse), std::nullopt, opt_path(c.out),
                                     opt_path(fused_run), threads};
            const auto out = simfuse::cmd_fuse(req);
            std::cout << out.submission.string() << '\n' << out.fused_run.string() << '\n';
        } else if (*tune) {
            simfuse::TuneRequest req{*manifest, overrides(c, tune), opt_path(c.qrels), std::nullopt,
                                     opt_path(c.out), resolution, threads};
            const auto out = simfuse::cmd_tune(req);
            std::cout << out.config_path.string() << '\n';
            std::cout << "grid_points\t" << out.result.evaluated << '\n';
            std::cout << "validation_MAP@" << out.config.k << '\t' << out.result.map << '\n';
        } else if (*eval) {
            simfuse::EvalRequest req{run_path, c.qrels, c.k, opt_path(query_ids_path)};
            simfuse::EvalReport report;
            if (!req.query_ids && manifest) {
                const auto ids = simfuse::manifest_query_ids(*manifest);
                report = simfuse::evaluate(simfuse::read_any_run(run_path, &ids),
                                           simfuse::read_qrels_file(c.qrels), c.k);
            } else {
                report = simfuse::cmd_eval(req);
            }
            if (c.out.empty()) {
                simfuse::print_report(std::cout, report, per_query);
            } else {
                std::ofstream out(c.out, std::ios::binary | std::ios::trunc);
                simfuse::print_report(out, report, per_query);
                if (!out) throw simfuse::Error(simfuse::ErrorCode::io, "write failed for " + c.out);
            }
        } else if (*submit) {
            simfuse::IdTable ids;
            if (!query_ids_path.empty()) {
                std::ifstream in(query_ids_path, std::ios::binary);
                if (!in) throw simfuse::Error(simfuse::ErrorCode::io, "cannot open " + query_ids_path);
                std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
                ids = simfuse::decode_id_sidecar(text);
            } else if (manifest) {
                ids = simfuse::manifest_query_ids(*manifest);
            } else {
                throw simfuse::Error(simfuse::ErrorCode::invalid_argument, "submit needs --manifest or --query-ids");
            }
            simfuse::cmd_submit({run_path, std::move(ids), c.k, c.out});
        } else if (*gen) {
            spec.seed = seed;
            simfuse::cmd_gen_synth(spec, c.out, c.M, c.k, threads);
            std::cout << (std::filesystem::path(c.out) / "manifest.json").string() << '\n';
        } else if (*ingest) {
            ing.input = input;
            ing.queries = kind == "query";
            if (!template_override.empty()) ing.template_override = template_override;
            if (!instruction_override.empty()) ing.instruction_override = instruction_override;
            if (c.out.empty()) {
                simfuse::cmd_ingest(ing, std::cout);
            } else {
                std::ofstream out(c.out, std::ios::binary | std::ios::trunc);
                if (!out) throw simfuse::Error(simfuse::ErrorCode::io, "cannot open " + c.out);
                simfuse::cmd_ingest(ing, out);
                if (!out) throw simfuse::Error(simfuse::ErrorCode::io, "write failed for " + c.out);
            }
        }
    } catch (const simfuse::Error& e) {
        return fail(std::string(simfuse::to_string(e.code())), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
