// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// The operations behind each CLI subcommand. Optional fields override the
// corresponding manifest or config values.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "simfuse/evalkit.hpp"
#include "simfuse/fusion.hpp"
#include "simfuse/manifest.hpp"
#include "simfuse/synth.hpp"

namespace simfuse {

inline constexpr std::size_t kDefaultM = 1000;
inline constexpr std::size_t kDefaultK = 20;
inline constexpr std::size_t kDefaultGridResolution = 11;

struct ConfigOverrides {
    std::optional<std::filesystem::path> config;
    std::optional<std::size_t> M;
    std::optional<std::size_t> k;
};

/// Config from the override path, else the manifest's, else defaults; then
/// flag overrides; uniform weights when none are given. Validated against the
/// manifest's model count.
FusionConfig resolve_fusion_config(const Manifest& manifest, const ConfigOverrides& overrides);

struct SearchRequest {
    Manifest manifest;
    ConfigOverrides overrides;
    std::optional<std::filesystem::path> runs_dir;
    int threads = 0;
};

/// One run file per model. Returns the paths written.
std::vector<std::filesystem::path> cmd_search(const SearchRequest& request);

struct FuseRequest {
    Manifest manifest;
    ConfigOverrides overrides;
    std::optional<std::filesystem::path> runs_dir;
    std::optional<std::filesystem::path> submission;
    std::optional<std::filesystem::path> fused_run;
    int threads = 0;
};

struct FuseOutputs {
    std::filesystem::path submission;
    std::filesystem::path fused_run;
    std::size_t queries = 0;
};

FuseOutputs cmd_fuse(const FuseRequest& request);

struct TuneRequest {
    Manifest manifest;
    ConfigOverrides overrides;
    std::optional<std::filesystem::path> qrels;
    std::optional<std::filesystem::path> runs_dir;
    std::optional<std::filesystem::path> out;
    std::size_t resolution = kDefaultGridResolution;
    int threads = 0;
};

struct TuneOutputs {
    std::filesystem::path config_path;
    FusionConfig config;
    TuneResult result;
};

TuneOutputs cmd_tune(const TuneRequest& request);

struct EvalRequest {
    std::filesystem::path run;
    std::filesystem::path qrels;
    std::size_t k = kDefaultK;
    /// Needed for submission-format runs (one line per query, no ids).
    std::optional<std::filesystem::path> query_ids;
};

/// Reads a TSV run or a submission file (detected by the absence of tabs).
RunRanking read_any_run(const std::filesystem::path& path, const IdTable* query_ids);
EvalReport cmd_eval(const EvalRequest& request);
void print_report(std::ostream& out, const EvalReport& report, bool per_query);

struct SubmitRequest {
    std::filesystem::path run;
    IdTable query_ids;
    std::size_t k = kDefaultK;
    std::filesystem::path out;
};

/// Rewrites a ranked TSV run as a submission in query-table order.
void cmd_submit(const SubmitRequest& request);

void cmd_gen_synth(const SynthSpec& spec, const std::filesystem::path& dir, std::size_t M,
                   std::size_t k, int threads);

struct IngestRequest {
    std::filesystem::path input;
    bool queries = true;
    int tag_id = 1;
    int instruction_id = 1;
    std::optional<std::string> template_override;
    std::optional<std::string> instruction_override;
};

/// JSON-lines in, JSON-lines `{"id":..., "text":...}` out.
std::size_t cmd_ingest(const IngestRequest& request, std::ostream& out);

/// Query ids shared by every model of the manifest (read from sidecars).
IdTable manifest_query_ids(const Manifest& manifest);
IdTable manifest_doc_ids(const Manifest& manifest);

}  // namespace simfuse
