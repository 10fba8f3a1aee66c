#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "retag/corpus.hpp"
#include "retag/llm.hpp"
#include "retag/parsing.hpp"
#include "retag/text.hpp"

namespace retag {

struct EntityContext {
  std::string description;
  std::string chunk_id;
  bool operator==(const EntityContext&) const = default;
};

struct EntityNode {
  std::string name;  // normalized; the canonical key
  std::string type;
  std::vector<EntityContext> contexts;
  int degree = 0;  // incident merged edges, undirected
};

struct RelationContext {
  std::string description;
  double strength = 0.0;
  std::string chunk_id;
  bool operator==(const RelationContext&) const = default;
};

// Key is the unordered endpoint pair; source/target keep the first-seen
// orientation for display.
struct RelationEdge {
  std::string source;
  std::string target;
  std::vector<RelationContext> contexts;
};

using EdgeKey = std::pair<std::string, std::string>;

inline EdgeKey edge_key(const std::string& a, const std::string& b) {
  return a <= b ? EdgeKey{a, b} : EdgeKey{b, a};
}

inline std::string edge_key_str(const EdgeKey& k) { return k.first + "|" + k.second; }

struct ContextGraph {
  std::map<std::string, EntityNode> nodes;
  std::map<EdgeKey, RelationEdge> edges;
  std::string corpus_hash;
  std::string config_hash;
  std::optional<std::string> topic;

  bool empty() const { return nodes.empty(); }
};

// Folds per-chunk extraction records into one contextualized graph.
// Records are first put into a canonical order so any permutation of the
// input yields an identical graph; duplicate contexts (same description and
// chunk) collapse, which also makes the fold idempotent. Relations whose
// endpoints were never extracted as entities get placeholder nodes carrying
// the relation description as context.
inline ContextGraph merge_records(std::vector<ExtractionRecord> records) {
  std::sort(records.begin(), records.end(), [](const ExtractionRecord& a, const ExtractionRecord& b) {
    if (a.chunk_id != b.chunk_id) return a.chunk_id < b.chunk_id;
    if (a.entities.size() != b.entities.size()) return a.entities.size() < b.entities.size();
    return a.relations.size() < b.relations.size();
  });

  ContextGraph g;
  auto add_context = [](std::vector<EntityContext>& ctxs, EntityContext ctx) {
    if (std::find(ctxs.begin(), ctxs.end(), ctx) == ctxs.end()) ctxs.push_back(std::move(ctx));
  };

  // Entities first so placeholders are only created for endpoints that no
  // record anywhere extracted as an entity.
  for (const auto& rec : records) {
    for (const auto& e : rec.entities) {
      auto [it, inserted] = g.nodes.try_emplace(e.name);
      if (inserted) {
        it->second.name = e.name;
        it->second.type = e.type;  // type is first-seen in canonical order
      }
      add_context(it->second.contexts, {e.description, rec.chunk_id});
    }
  }
  for (const auto& rec : records) {
    for (const auto& r : rec.relations) {
      if (r.source == r.target) continue;  // self relations carry no structure
      for (const auto& endpoint : {r.source, r.target}) {
        auto [it, inserted] = g.nodes.try_emplace(endpoint);
        if (inserted) {
          it->second.name = endpoint;
          it->second.type = "unknown";  // placeholder for a dangling endpoint
        }
        if (it->second.type == "unknown")
          add_context(it->second.contexts, {r.description, rec.chunk_id});
      }
      auto key = edge_key(r.source, r.target);
      auto [it, inserted] = g.edges.try_emplace(key);
      if (inserted) {
        it->second.source = r.source;
        it->second.target = r.target;
      }
      RelationContext ctx{r.description, r.strength, rec.chunk_id};
      if (std::find(it->second.contexts.begin(), it->second.contexts.end(), ctx) ==
          it->second.contexts.end())
        it->second.contexts.push_back(std::move(ctx));
    }
  }

  for (const auto& [key, edge] : g.edges) {
    g.nodes.at(key.first).degree += 1;
    g.nodes.at(key.second).degree += 1;
  }
  return g;
}

// Edge prominence: sum of the endpoint degrees over the merged undirected
// edge set. The removal priority key during context truncation.
inline int prominence(const EdgeKey& key, const ContextGraph& g) {
  auto it = g.edges.find(key);
  if (it == g.edges.end())
    throw ContractError("prominence: edge not in graph: " + edge_key_str(key));
  return g.nodes.at(key.first).degree + g.nodes.at(key.second).degree;
}

inline int prominence(const RelationEdge& edge, const ContextGraph& g) {
  return prominence(edge_key(edge.source, edge.target), g);
}

// ---------------------------------------------------------------------------
// Chunk extraction
// ---------------------------------------------------------------------------

struct ExtractorOptions {
  TupleDelimiters delimiters;
  double temperature = 0.0;
  int max_tokens = 1536;
  bool reflect = true;  // one self-reflection pass after the initial extraction
};

// Runs the (general or topic-filtered) extraction prompt over one chunk,
// then asks once whether anything was missed; an affirmative answer triggers
// a single additional pass whose results are unioned in.
class ChunkExtractor {
 public:
  ChunkExtractor(const Gateway& gateway, const PromptLibrary& prompts, ExtractorOptions opts = {})
      : gateway_(gateway), prompts_(prompts), opts_(std::move(opts)) {}

  ExtractionRecord extract(const Chunk& chunk, const std::optional<std::string>& topic = {}) const {
    VarMap vars{{"input_text", chunk.text},
                {"tuple_delimiter", opts_.delimiters.tuple},
                {"record_delimiter", opts_.delimiters.record},
                {"completion_delimiter", opts_.delimiters.completion}};
    std::string tpl = "extract_entities";
    if (topic) {
      tpl = "extract_entities_topic";
      vars["topic"] = *topic;
    }

    ExtractionRecord rec = run_parse(tpl, vars, chunk.id());
    if (rec.failed) return rec;

    if (opts_.reflect) {
      VarMap rvars{{"input_text", chunk.text}, {"previous_output", describe_record(rec)}};
      std::string verdict =
          trim(gateway_.run(prompts_, "extract_reflection", rvars, opts_.temperature, 16));
      if (to_upper(verdict).rfind("YES", 0) == 0) {
        ExtractionRecord second = run_parse(tpl, vars, chunk.id());
        if (!second.failed) union_into(rec, second);
      }
    }
    return rec;
  }

 private:
  ExtractionRecord run_parse(const std::string& tpl, const VarMap& vars,
                             const std::string& chunk_id) const {
    for (int attempt = 0; attempt < 2; ++attempt) {
      VarMap v = vars;
      if (attempt == 1)
        v["input_text"] += "\n\nReminder: output only the requested record format.";
      std::string raw = gateway_.run(prompts_, tpl, v, opts_.temperature, opts_.max_tokens);
      try {
        ExtractionRecord rec = parse_tuple_records(raw, opts_.delimiters);
        rec.chunk_id = chunk_id;
        return rec;
      } catch (const ParseError&) {
        // fall through to the re-prompt, then give up
      }
    }
    ExtractionRecord failed;
    failed.chunk_id = chunk_id;
    failed.failed = true;
    return failed;
  }

  static std::string describe_record(const ExtractionRecord& rec) {
    std::string out = "entities:";
    for (const auto& e : rec.entities) out += " " + e.name;
    out += "; relations: " + std::to_string(rec.relations.size());
    return out;
  }

  static void union_into(ExtractionRecord& base, const ExtractionRecord& extra) {
    std::set<std::string> names;
    for (const auto& e : base.entities) names.insert(e.name);
    for (const auto& e : extra.entities)
      if (names.insert(e.name).second) base.entities.push_back(e);
    std::set<std::string> rels;
    for (const auto& r : base.relations) rels.insert(edge_key_str(edge_key(r.source, r.target)));
    for (const auto& r : extra.relations)
      if (rels.insert(edge_key_str(edge_key(r.source, r.target))).second)
        base.relations.push_back(r);
    base.skipped += extra.skipped;
  }

  const Gateway& gateway_;
  const PromptLibrary& prompts_;
  ExtractorOptions opts_;
};

// ---------------------------------------------------------------------------
// Persistence: graph/nodes.jsonl + graph/edges.jsonl, one record per line,
// keys sorted for diffability.
// ---------------------------------------------------------------------------

inline void save_graph(const ContextGraph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "nodes.jsonl", std::ios::binary);
    for (const auto& [name, node] : g.nodes) {
      nlohmann::json j;
      j["name"] = node.name;
      j["type"] = node.type;
      j["degree"] = node.degree;
      auto ctxs = nlohmann::json::array();
      for (const auto& c : node.contexts)
        ctxs.push_back({{"chunk", c.chunk_id}, {"description", c.description}});
      j["contexts"] = ctxs;
      out << j.dump() << "\n";
    }
  }
  {
    std::ofstream out(dir / "edges.jsonl", std::ios::binary);
    for (const auto& [key, edge] : g.edges) {
      nlohmann::json j;
      j["source"] = edge.source;
      j["target"] = edge.target;
      auto ctxs = nlohmann::json::array();
      for (const auto& c : edge.contexts)
        ctxs.push_back(
            {{"chunk", c.chunk_id}, {"description", c.description}, {"strength", c.strength}});
      j["contexts"] = ctxs;
      out << j.dump() << "\n";
    }
  }
}

inline ContextGraph load_graph(const std::filesystem::path& dir) {
  ContextGraph g;
  std::ifstream nodes(dir / "nodes.jsonl");
  if (!nodes) throw StoreError("missing graph files under " + dir.string());
  std::string line;
  while (std::getline(nodes, line)) {
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    EntityNode node;
    node.name = j.at("name").get<std::string>();
    node.type = j.at("type").get<std::string>();
    node.degree = j.at("degree").get<int>();
    for (const auto& c : j.at("contexts"))
      node.contexts.push_back(
          {c.at("description").get<std::string>(), c.at("chunk").get<std::string>()});
    g.nodes.emplace(node.name, std::move(node));
  }
  std::ifstream edges(dir / "edges.jsonl");
  while (std::getline(edges, line)) {
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    RelationEdge edge;
    edge.source = j.at("source").get<std::string>();
    edge.target = j.at("target").get<std::string>();
    for (const auto& c : j.at("contexts"))
      edge.contexts.push_back({c.at("description").get<std::string>(),
                               c.at("strength").get<double>(),
                               c.at("chunk").get<std::string>()});
    g.edges.emplace(edge_key(edge.source, edge.target), std::move(edge));
  }
  return g;
}

}  // namespace retag
