#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "retag/community.hpp"
#include "retag/graph.hpp"
#include "retag/respond.hpp"
#include "retag/retrieve.hpp"

namespace retag {

struct TopicSet {
  std::vector<std::string> topics;  // case-insensitively deduplicated, first casing kept
  std::map<int, std::vector<std::string>> per_level_sources;
  std::string description;
};

inline const char* kTopicMiningQuery = "list relevant topics covering the entire corpus";
inline const char* kDescriptionQuery = "construct a corpus description summarizing its characteristics";

struct MiningOptions {
  uint64_t seed = 42;
  int window_tokens = 4000;
  int max_inflight = 4;
};

// Case-insensitive union across levels; original casing of the first
// occurrence survives (levels visited in ascending order).
inline std::vector<std::string> union_topics(const std::map<int, std::vector<std::string>>& per_level) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& [level, topics] : per_level)
    for (const auto& t : topics) {
      std::string trimmed = trim(t);
      if (trimmed.empty()) continue;
      if (seen.insert(to_lower(trimmed)).second) out.push_back(trimmed);
    }
  return out;
}

// Topic mining is the topic-listing global query run through the responder
// at every level with the mining prompt pair; the final set is the union of
// the per-level answers.
inline TopicSet mine_topics(const Gateway& gateway, const PromptLibrary& prompts,
                            const std::function<std::vector<CommunitySummary>(int)>& summaries_at,
                            int depth, const MiningOptions& opts = {}) {
  TopicSet out;
  MapReduceSpec spec;
  spec.sub_template = "topic_mine_sub";
  spec.final_template = "topic_mine_final";
  spec.max_inflight = opts.max_inflight;

  int failures = 0;
  for (int level = 1; level <= depth; ++level) {
    try {
      auto result = run_map_reduce(gateway, prompts, summaries_at(level), kTopicMiningQuery,
                                   opts.seed, opts.window_tokens, spec);
      auto payload = parse_json_payload(result.text, {"answer"});
      std::vector<std::string> topics;
      for (const auto& t : payload.at("answer"))
        if (t.is_string()) topics.push_back(t.get<std::string>());
      out.per_level_sources[level] = std::move(topics);
    } catch (const std::exception&) {
      ++failures;
    }
  }
  if (failures == depth) throw ParseError("topic mining failed at every level");
  out.topics = union_topics(out.per_level_sources);
  return out;
}

inline std::string mine_description(const Gateway& gateway, const PromptLibrary& prompts,
                                    const std::function<std::vector<CommunitySummary>(int)>& summaries_at,
                                    int depth, const MiningOptions& opts = {}) {
  if (depth < 1) throw ContractError("description mining requires built summaries");
  MapReduceSpec spec;
  spec.sub_template = "describe_sub";
  spec.final_template = "describe_final";
  spec.max_inflight = opts.max_inflight;

  std::vector<std::string> per_level;
  for (int level = 1; level <= depth; ++level) {
    try {
      auto result = run_map_reduce(gateway, prompts, summaries_at(level), kDescriptionQuery,
                                   opts.seed, opts.window_tokens, spec);
      auto payload = parse_json_payload(result.text, {"answer"});
      if (payload.at("answer").is_string()) per_level.push_back(payload.at("answer").get<std::string>());
    } catch (const std::exception&) {
      // tolerated unless every level fails
    }
  }
  if (per_level.empty()) throw ParseError("description mining failed at every level");

  // Aggregate the per-level descriptions with one more reduce call.
  if (per_level.size() == 1) return per_level.front();
  std::string joined;
  for (size_t i = 0; i < per_level.size(); ++i)
    joined += "--- Level " + std::to_string(i + 1) + " ---\n" + per_level[i] + "\n";
  std::string raw = gateway.run(prompts, "describe_final",
                                {{"question", kDescriptionQuery}, {"report_data", joined}}, 0.0, 512);
  try {
    auto payload = parse_json_payload(raw, {"answer"});
    if (payload.at("answer").is_string()) return payload.at("answer").get<std::string>();
  } catch (const ParseError&) {
  }
  return per_level.front();
}

// Classifies a question against the mined topics. Returns nullopt for an
// explicit "null", an empty topic list, or any unusable payload (fail-open
// to the general index). A case-insensitive near-miss is canonicalized to
// the listed casing.
inline std::optional<std::string> classify(const Gateway& gateway, const PromptLibrary& prompts,
                                           const std::string& question, const TopicSet& topics) {
  if (topics.topics.empty()) return std::nullopt;
  nlohmann::json payload{{"question", question},
                         {"topics", topics.topics},
                         {"dataset_description", topics.description}};
  VarMap vars{{"payload", payload.dump()}};
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string raw;
    try {
      raw = gateway.run(prompts, "classify_topic", vars, 0.0, 128);
      auto j = parse_json_payload(raw, {"choosed_topic"});
      const auto& value = j.at("choosed_topic");
      if (value.is_null()) return std::nullopt;
      std::string chosen = trim(value.get<std::string>());
      if (chosen.empty() || to_lower(chosen) == "null") return std::nullopt;
      for (const auto& t : topics.topics)
        if (t == chosen) return t;
      for (const auto& t : topics.topics)
        if (to_lower(t) == to_lower(chosen)) return t;  // near-miss: canonicalize casing
      return std::nullopt;
    } catch (const std::exception&) {
      // retry once, then fall open
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Topic index construction
// ---------------------------------------------------------------------------

struct TopicIndex {
  std::string topic;
  ContextGraph graph;
  Hierarchy hierarchy;
  std::map<std::string, CommunitySummary> summaries;
  bool empty = false;  // no topic-relevant extractions anywhere
};

struct TopicIndexOptions {
  HierarchyParams hierarchy;
  SummarizerOptions summarizer;
  ExtractorOptions extractor;
  int max_inflight = 4;
};

// Re-extracts every chunk with the topic-filtered prompt, then runs the
// regular merge -> cluster -> summarize stack with topic-aware prompts.
inline TopicIndex build_topic_index(const Gateway& gateway, const PromptLibrary& prompts,
                                    const std::vector<Chunk>& chunks, const std::string& topic,
                                    TopicIndexOptions opts = {},
                                    const TokenCounter& counter = default_counter()) {
  TopicIndex index;
  index.topic = topic;

  ChunkExtractor extractor(gateway, prompts, opts.extractor);
  std::vector<ExtractionRecord> records(chunks.size());
  parallel_for(chunks.size(), opts.max_inflight,
               [&](size_t i) { records[i] = extractor.extract(chunks[i], topic); });
  index.graph = merge_records(std::move(records));
  index.graph.topic = topic;

  if (index.graph.empty()) {
    index.empty = true;
    return index;
  }

  index.hierarchy = normalize_levels(build_hierarchy(index.graph, opts.hierarchy));
  SummarizerOptions sopts = opts.summarizer;
  sopts.topic = topic;
  CommunitySummarizer summarizer(gateway, prompts, sopts, counter);
  index.summaries = summarizer.summarize_all(index.hierarchy, index.graph);
  return index;
}

// ---------------------------------------------------------------------------
// Persistence: topics.json + description.txt
// ---------------------------------------------------------------------------

inline void save_topics(const TopicSet& topics, const std::filesystem::path& store_dir) {
  nlohmann::json j;
  j["topics"] = topics.topics;
  nlohmann::json per_level = nlohmann::json::object();
  for (const auto& [level, list] : topics.per_level_sources)
    per_level[std::to_string(level)] = list;
  j["per_level"] = std::move(per_level);
  std::ofstream out(store_dir / "topics.json", std::ios::binary);
  out << j.dump(2) << "\n";
  std::ofstream desc(store_dir / "description.txt", std::ios::binary);
  desc << topics.description;
}

inline TopicSet load_topics(const std::filesystem::path& store_dir) {
  std::ifstream in(store_dir / "topics.json");
  if (!in) throw StoreError("no mined topics in store (run the topics command first)");
  nlohmann::json j;
  in >> j;
  TopicSet out;
  out.topics = j.at("topics").get<std::vector<std::string>>();
  for (const auto& [level, list] : j.at("per_level").items())
    out.per_level_sources[std::stoi(level)] = list.get<std::vector<std::string>>();
  std::ifstream desc(store_dir / "description.txt", std::ios::binary);
  std::ostringstream buf;
  buf << desc.rdbuf();
  out.description = buf.str();
  return out;
}

}  // namespace retag
