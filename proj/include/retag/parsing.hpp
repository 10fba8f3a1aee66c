#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "retag/text.hpp"
#include "retag/util.hpp"

namespace retag {

inline const std::set<std::string>& entity_types() {
  static const std::set<std::string> types = {"organization", "person", "geo", "event"};
  return types;
}

struct ExtractedEntity {
  std::string name;  // normalized (uppercase, collapsed whitespace)
  std::string type;
  std::string description;
};

struct ExtractedRelation {
  std::string source;  // normalized
  std::string target;  // normalized
  std::string description;
  double strength = 0.0;
  bool dangling = false;  // an endpoint was not extracted as an entity in this record
};

struct ExtractionRecord {
  std::string chunk_id;
  std::vector<ExtractedEntity> entities;
  std::vector<ExtractedRelation> relations;
  int skipped = 0;       // malformed records dropped by the parser
  bool failed = false;   // extraction gave no parseable output even after re-prompt
};

struct TupleDelimiters {
  std::string tuple = "<|>";
  std::string record = "##";
  std::string completion = "<|COMPLETE|>";
};

namespace detail {

inline std::vector<std::string> split_on(std::string_view text, const std::string& delim) {
  std::vector<std::string> parts;
  size_t pos = 0;
  while (true) {
    size_t next = text.find(delim, pos);
    if (next == std::string_view::npos) {
      parts.emplace_back(text.substr(pos));
      return parts;
    }
    parts.emplace_back(text.substr(pos, next - pos));
    pos = next + delim.size();
  }
}

// Strips one layer of surrounding parentheses and whitespace.
inline std::string strip_parens(std::string_view s) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '(' && t.back() == ')') t = trim(t.substr(1, t.size() - 2));
  return t;
}

inline std::string unquote(std::string_view s) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  return trim(t);
}

}  // namespace detail

// Parses the tuple-record extraction format: records separated by
// record_delim, fields by tuple_delim, stream terminated by completion_delim.
// Malformed records are skipped and counted. Throws ParseError only when the
// completion had content but not a single record could be parsed.
inline ExtractionRecord parse_tuple_records(std::string_view text, const TupleDelimiters& delims = {}) {
  if (delims.tuple.empty() || delims.record.empty() || delims.completion.empty())
    throw ContractError("tuple delimiters must be nonempty");
  if (delims.tuple == delims.record || delims.tuple == delims.completion ||
      delims.record == delims.completion)
    throw ContractError("tuple delimiters must be mutually distinct");

  std::string_view body = text;
  if (size_t done = body.find(delims.completion); done != std::string_view::npos)
    body = body.substr(0, done);

  ExtractionRecord out;
  std::string payload = trim(body);
  if (payload.empty()) return out;

  std::set<std::string> entity_names;
  for (const auto& raw : detail::split_on(payload, delims.record)) {
    std::string rec = detail::strip_parens(raw);
    if (rec.empty()) continue;
    auto fields = detail::split_on(rec, delims.tuple);
    std::string tag = to_lower(detail::unquote(fields[0]));
    if (tag == "entity" && fields.size() == 4) {
      ExtractedEntity e;
      e.name = normalize_entity_name(detail::unquote(fields[1]));
      e.type = to_lower(trim(fields[2]));
      e.description = trim(fields[3]);
      if (e.name.empty() || !entity_types().count(e.type)) {
        ++out.skipped;
        continue;
      }
      entity_names.insert(e.name);
      out.entities.push_back(std::move(e));
    } else if (tag == "relationship" && fields.size() == 5) {
      ExtractedRelation r;
      r.source = normalize_entity_name(detail::unquote(fields[1]));
      r.target = normalize_entity_name(detail::unquote(fields[2]));
      r.description = trim(fields[3]);
      try {
        r.strength = std::stod(detail::strip_parens(fields[4]));
      } catch (const std::exception&) {
        ++out.skipped;
        continue;
      }
      if (r.source.empty() || r.target.empty()) {
        ++out.skipped;
        continue;
      }
      out.relations.push_back(std::move(r));
    } else {
      ++out.skipped;
    }
  }
  for (auto& r : out.relations)
    r.dangling = !entity_names.count(r.source) || !entity_names.count(r.target);

  if (out.entities.empty() && out.relations.empty())
    throw ParseError("no parseable records in nonempty extraction output");
  return out;
}

// Inverse of parse_tuple_records for well-formed records. Used by the
// scripted backend and round-trip tests.
inline std::string format_tuple_records(const ExtractionRecord& rec,
                                        const TupleDelimiters& delims = {}) {
  std::string out;
  bool first = true;
  auto push = [&](const std::string& record) {
    if (!first) out += delims.record + "\n";
    out += record;
    first = false;
  };
  for (const auto& e : rec.entities)
    push("(\"entity\"" + delims.tuple + e.name + delims.tuple + e.type + delims.tuple +
         e.description + ")");
  for (const auto& r : rec.relations)
    push("(\"relationship\"" + delims.tuple + r.source + delims.tuple + r.target + delims.tuple +
         r.description + delims.tuple + std::to_string(r.strength) + ")");
  if (!first) out += "\n";
  out += delims.completion;
  return out;
}

// Extracts the first balanced JSON object or array embedded in `text`
// (models often wrap JSON in prose). String literals and escapes are
// respected while scanning for the matching close.
inline std::optional<nlohmann::json> first_json_payload(std::string_view text) {
  for (size_t i = 0; i < text.size(); ++i) {
    char open = text[i];
    if (open != '{' && open != '[') continue;
    char close = open == '{' ? '}' : ']';
    int depth = 0;
    bool in_string = false;
    for (size_t j = i; j < text.size(); ++j) {
      char c = text[j];
      if (in_string) {
        if (c == '\\')
          ++j;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"')
        in_string = true;
      else if (c == open || (open == '{' && c == '{') || (open == '[' && c == '['))
        ++depth;
      else if (c == close)
        --depth;
      if (depth == 0 && j > i) {
        auto parsed = nlohmann::json::parse(text.substr(i, j - i + 1), nullptr, false);
        if (!parsed.is_discarded()) return parsed;
        break;  // balanced but invalid; try the next opener
      }
    }
  }
  return std::nullopt;
}

// Parses and schema-checks a JSON payload. required_keys applies to objects;
// want_array demands a top-level array.
inline nlohmann::json parse_json_payload(std::string_view text,
                                         const std::vector<std::string>& required_keys = {},
                                         bool want_array = false) {
  auto payload = first_json_payload(text);
  if (!payload) throw ParseError("no balanced JSON payload found");
  if (want_array) {
    if (!payload->is_array()) throw ParseError("expected a JSON array payload");
    return *payload;
  }
  if (!required_keys.empty() && !payload->is_object())
    throw ParseError("expected a JSON object payload");
  for (const auto& key : required_keys)
    if (!payload->contains(key)) throw ParseError("JSON payload missing required key: " + key);
  return *payload;
}

}  // namespace retag
