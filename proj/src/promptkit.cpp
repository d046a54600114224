// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/promptkit.hpp"

#include <array>
#include <json.hpp>

#include "simfuse/error.hpp"

namespace simfuse::promptkit {

namespace {

constexpr std::array<TagTemplate, 5> kTags{{
    {1, "{title}\n{body}"},
    {2, "<question_title> {title} </question_title>\n<question_body> {body} </question_body>"},
    {3, "{title}. {body}"},
    {4, "Title: {title}\nContent: {body}"},
    {5, "<title> {title} </title>\n<content> {body} </content>"},
}};

constexpr std::array<InstructionText, 4> kInstructions{{
    {1, "Given a question including title and body, retrieve relevant papers that answer the "
        "question."},
    {2, "Given a question including title and body, retrieve the paper's title and abstract "
        "that answer the question."},
    {3, "Given a web search query, retrieve relevant passages that answer the query."},
    {4, "Given a question, retrieve passages that answer the question."},
}};

// Instruction id 5 appears in the measurements but its text was never
// published, so it cannot be rendered.
const std::array<ConfigEntry, 17> kConfigs{{
    {"SFR-Embedding-Mistral", 1, 1, 0.18390},
    {"SFR-Embedding-Mistral", 1, 2, 0.18659},
    {"SFR-Embedding-Mistral", 1, 5, 0.18503},
    {"GritLM-7B", 2, 1, 0.18622},
    {"GritLM-7B", 2, 2, 0.18367},
    {"GritLM-7B", 2, 4, 0.18603},
    {"Linq-Embed-Mistral", 4, 1, 0.18521},
    {"Linq-Embed-Mistral", 4, 2, 0.18925},
    {"Linq-Embed-Mistral", 4, 3, 0.18468},
    {"Linq-Embed-Mistral", 4, 4, 0.18530},
    {"NV-Embed-v1", 1, 1, 0.18103},
    {"NV-Embed-v1", 3, 1, 0.18315},
    {"NV-Embed-v1", 4, 1, 0.18285},
    {"NV-Embed-v1", 4, 2, 0.18251},
    {"NV-Embed-v1", 4, 3, 0.18185},
    {"NV-Embed-v1", 4, 4, 0.18228},
    {"NV-Embed-v1", 4, 5, 0.18174},
}};

constexpr std::string_view kTitle = "{title}";
constexpr std::string_view kBody = "{body}";

std::string string_field(const nlohmann::json& obj, const char* key, std::size_t line_no) {
    auto it = obj.find(key);
    if (it == obj.end()) return {};
    if (!it->is_string()) {
        throw Error(ErrorCode::format, "line " + std::to_string(line_no) + ": field '" + key +
                                           "' is not a string");
    }
    return it->get<std::string>();
}

nlohmann::json parse_object(std::string_view line, std::size_t line_no) {
    auto obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw Error(ErrorCode::format, "line " + std::to_string(line_no) + ": not a JSON object");
    }
    return obj;
}

}  // namespace

std::span<const TagTemplate> tag_templates() { return kTags; }
std::span<const InstructionText> instructions() { return kInstructions; }
std::span<const ConfigEntry> config_matrix() { return kConfigs; }

const TagTemplate& tag_template(int tag_id) {
    for (const auto& t : kTags) {
        if (t.tag_id == tag_id) return t;
    }
    throw Error(ErrorCode::invalid_argument, "unknown tag " + std::to_string(tag_id));
}

const InstructionText& instruction(int instruction_id) {
    for (const auto& i : kInstructions) {
        if (i.instruction_id == instruction_id) return i;
    }
    throw Error(ErrorCode::invalid_argument, "unknown instruction " + std::to_string(instruction_id));
}

std::string substitute(std::string_view pattern, std::string_view title, std::string_view body) {
    std::string out;
    out.reserve(pattern.size() + title.size() + body.size());
    std::size_t pos = 0;
    while (pos < pattern.size()) {
        if (pattern.substr(pos).starts_with(kTitle)) {
            out += title;
            pos += kTitle.size();
        } else if (pattern.substr(pos).starts_with(kBody)) {
            out += body;
            pos += kBody.size();
        } else {
            out.push_back(pattern[pos++]);
        }
    }
    return out;
}

std::string render_tag(const QueryRecord& query, int tag_id) {
    return substitute(tag_template(tag_id).pattern, query.title, query.body);
}

std::string wrap_query(std::string_view instruction_text, std::string_view tagged) {
    std::string out = "Instruct: ";
    out += instruction_text;
    out += "\nQuery: ";
    out += tagged;
    return out;
}

std::string render_query_prompt(const QueryRecord& query, int tag_id, int instruction_id) {
    const auto& tag = tag_template(tag_id);
    const auto& instr = instruction(instruction_id);
    return wrap_query(instr.text, substitute(tag.pattern, query.title, query.body));
}

std::string render_document(const DocRecord& doc) {
    return doc.title + "\n" + doc.abstract;
}

QueryRecord parse_query_line(std::string_view line, std::size_t line_no) {
    const auto obj = parse_object(line, line_no);
    QueryRecord q{string_field(obj, "id", line_no), string_field(obj, "title", line_no),
                  string_field(obj, "body", line_no)};
    if (q.id.empty()) throw Error(ErrorCode::format, "line " + std::to_string(line_no) + ": missing id");
    if (q.title.empty() && q.body.empty()) {
        throw Error(ErrorCode::format,
                    "line " + std::to_string(line_no) + ": query has neither title nor body");
    }
    return q;
}

DocRecord parse_doc_line(std::string_view line, std::size_t line_no) {
    const auto obj = parse_object(line, line_no);
    DocRecord d{string_field(obj, "id", line_no), string_field(obj, "title", line_no),
                string_field(obj, "abstract", line_no)};
    if (d.id.empty()) throw Error(ErrorCode::format, "line " + std::to_string(line_no) + ": missing id");
    return d;
}

}  // namespace simfuse::promptkit
