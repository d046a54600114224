// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Query/document text rendering for embedding extraction, plus the registry
// of tag patterns, instructions, and the measured tag/instruction configs.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simfuse::promptkit {

struct QueryRecord {
    std::string id;
    std::string title;
    std::string body;
};

struct DocRecord {
    std::string id;
    std::string title;
    std::string abstract;
};

struct TagTemplate {
    int tag_id;
    std::string_view pattern;  // contains "{title}" and "{body}"
};

struct InstructionText {
    int instruction_id;
    std::string_view text;
};

struct ConfigEntry {
    std::string_view model_name;
    int tag_id;
    int instruction_id;
    std::optional<double> reported_score;
};

std::span<const TagTemplate> tag_templates();
std::span<const InstructionText> instructions();

/// Throws Error("unknown tag N") / Error("unknown instruction N").
const TagTemplate& tag_template(int tag_id);
const InstructionText& instruction(int instruction_id);

/// Substitutes {title} and {body} into an arbitrary pattern, verbatim.
std::string substitute(std::string_view pattern, std::string_view title, std::string_view body);

std::string render_tag(const QueryRecord& query, int tag_id);

/// "Instruct: {instruction}\nQuery: {tagged query}"
std::string wrap_query(std::string_view instruction_text, std::string_view tagged);
std::string render_query_prompt(const QueryRecord& query, int tag_id, int instruction_id);

/// "{title}\n{abstract}", no instruction.
std::string render_document(const DocRecord& doc);

/// Measured tag/instruction configurations per model, in table order.
std::span<const ConfigEntry> config_matrix();

/// JSON-lines parsing. Errors carry the 1-based line number.
QueryRecord parse_query_line(std::string_view line, std::size_t line_no = 0);
DocRecord parse_doc_line(std::string_view line, std::size_t line_no = 0);

}  // namespace simfuse::promptkit
