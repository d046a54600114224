// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Pipeline manifest (JSON). Relative paths resolve against the directory
// holding the manifest file.
//
// {
//   "models": [{"name": "m1", "queries": "m1.queries.embf",
//               "docs": "m1.docs.embf", "run": "runs/m1.tsv"}],
//   "fusion_config": "fusion.json",
//   "qrels": "qrels.tsv",
//   "outputs": {"runs_dir": "runs", "submission": "submission.txt",
//               "fused_run": "fused.tsv", "tuned_config": "tuned.json"}
// }

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace simfuse {

struct ModelEntry {
    std::string name;
    std::filesystem::path queries;
    std::filesystem::path docs;
    std::filesystem::path run;  // optional; defaults to <runs_dir>/<name>.tsv
};

struct ManifestOutputs {
    std::filesystem::path runs_dir = "runs";
    std::filesystem::path submission = "submission.txt";
    std::filesystem::path fused_run = "fused.tsv";
    std::filesystem::path tuned_config = "tuned.json";
};

struct Manifest {
    std::filesystem::path base_dir;
    std::vector<ModelEntry> models;
    std::filesystem::path fusion_config;  // may be empty
    std::filesystem::path qrels;          // may be empty
    ManifestOutputs outputs;

    /// `p` unchanged if absolute, else base_dir / p.
    std::filesystem::path resolve(const std::filesystem::path& p) const;
    std::filesystem::path run_path(const ModelEntry& model) const;

    /// At least one model, unique non-empty names, query/doc paths set.
    void validate() const;
};

Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace simfuse
