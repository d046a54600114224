// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

#include "simfuse/error.hpp"

namespace simfuse {

namespace {

std::string string_field(const nlohmann::json& obj, const char* key, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) throw Error(ErrorCode::format, std::string("manifest: missing '") + key + "'");
        return {};
    }
    if (!it->is_string()) throw Error(ErrorCode::format, std::string("manifest: '") + key + "' is not a string");
    return it->get<std::string>();
}

}  // namespace

std::filesystem::path Manifest::resolve(const std::filesystem::path& p) const {
    if (p.empty() || p.is_absolute()) return p;
    return base_dir / p;
}

std::filesystem::path Manifest::run_path(const ModelEntry& model) const {
    if (!model.run.empty()) return resolve(model.run);
    return resolve(outputs.runs_dir) / (model.name + ".tsv");
}

void Manifest::validate() const {
    if (models.empty()) throw Error(ErrorCode::invalid_argument, "manifest lists no models");
    std::set<std::string> names;
    for (const auto& m : models) {
        if (m.name.empty()) throw Error(ErrorCode::invalid_argument, "manifest model with empty name");
        if (!names.insert(m.name).second) {
            throw Error(ErrorCode::invalid_argument, "duplicate model name '" + m.name + "'");
        }
        if (m.queries.empty() || m.docs.empty()) {
            throw Error(ErrorCode::invalid_argument, "model '" + m.name + "' needs queries and docs paths");
        }
    }
}

Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir) {
    auto obj = nlohmann::json::parse(json_text, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw Error(ErrorCode::format, "manifest is not a JSON object");
    Manifest m;
    m.base_dir = base_dir;
    auto models = obj.find("models");
    if (models == obj.end() || !models->is_array()) throw Error(ErrorCode::format, "manifest: 'models' must be an array");
    for (const auto& entry : *models) {
        if (!entry.is_object()) throw Error(ErrorCode::format, "manifest: model entry is not an object");
        m.models.push_back({string_field(entry, "name", true), string_field(entry, "queries", true),
                            string_field(entry, "docs", true), string_field(entry, "run", false)});
    }
    m.fusion_config = string_field(obj, "fusion_config", false);
    m.qrels = string_field(obj, "qrels", false);
    if (auto out = obj.find("outputs"); out != obj.end()) {
        if (!out->is_object()) throw Error(ErrorCode::format, "manifest: 'outputs' is not an object");
        if (auto s = string_field(*out, "runs_dir", false); !s.empty()) m.outputs.runs_dir = s;
        if (auto s = string_field(*out, "submission", false); !s.empty()) m.outputs.submission = s;
        if (auto s = string_field(*out, "fused_run", false); !s.empty()) m.outputs.fused_run = s;
        if (auto s = string_field(*out, "tuned_config", false); !s.empty()) m.outputs.tuned_config = s;
    }
    m.validate();
    return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open manifest " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text, path.parent_path());
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    nlohmann::ordered_json obj;
    obj["models"] = nlohmann::ordered_json::array();
    for (const auto& m : manifest.models) {
        nlohmann::ordered_json e;
        e["name"] = m.name;
        e["queries"] = m.queries.generic_string();
        e["docs"] = m.docs.generic_string();
        if (!m.run.empty()) e["run"] = m.run.generic_string();
        obj["models"].push_back(std::move(e));
    }
    if (!manifest.fusion_config.empty()) obj["fusion_config"] = manifest.fusion_config.generic_string();
    if (!manifest.qrels.empty()) obj["qrels"] = manifest.qrels.generic_string();
    obj["outputs"] = {{"runs_dir", manifest.outputs.runs_dir.generic_string()},
                      {"submission", manifest.outputs.submission.generic_string()},
                      {"fused_run", manifest.outputs.fused_run.generic_string()},
                      {"tuned_config", manifest.outputs.tuned_config.generic_string()}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    out << obj.dump(2) << "\n";
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace simfuse
