#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "retag/community.hpp"
#include "retag/llm.hpp"
#include "retag/parsing.hpp"
#include "retag/text.hpp"
#include "retag/util.hpp"

namespace retag {

struct SummaryChunk {
  std::string id;  // "<community_id>#<j>"
  std::string text;
  size_t tokens = 0;
};

struct Window {
  int id = 0;
  std::vector<std::string> chunk_ids;
  std::vector<std::string> chunk_texts;
  size_t token_total = 0;

  std::string render() const {
    std::string out;
    for (size_t i = 0; i < chunk_texts.size(); ++i) {
      out += "--- " + chunk_ids[i] + " ---\n" + chunk_texts[i] + "\n";
    }
    return out;
  }
};

struct SubAnswer {
  int window_id = 0;
  int helpfulness = 0;  // 0..100
  std::string text;
  size_t tokens = 0;
  bool flagged = false;  // unparseable or clamped payload
};

struct Answer {
  std::string question;
  std::string scope = "general";  // "general" or "topic:<t>"
  int level = 1;
  std::string text;
  std::vector<int> selected_windows;
  double timing_seconds = 0.0;
};

inline const char* kInsufficientAnswer =
    "The provided reports contain insufficient information to answer this question.";

namespace detail {

template <typename T>
void seeded_shuffle(std::vector<T>& v, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace detail

// Splits each summary's text into <=600-token chunks, shuffles the whole
// pool with the given seed, and first-fit packs the shuffled order into
// windows of at most data_budget tokens. Summaries are canonicalized by id
// first so the packing does not depend on caller ordering (retrieval order
// and plain level order pack identically when they contain the same set).
inline std::vector<Window> prepare_windows(std::vector<CommunitySummary> summaries, uint64_t seed,
                                           size_t data_budget, int summary_chunk_tokens = 600,
                                           const TokenCounter& counter = default_counter()) {
  if (data_budget < static_cast<size_t>(summary_chunk_tokens))
    throw ContractError("window budget smaller than a summary chunk");
  std::sort(summaries.begin(), summaries.end(),
            [](const CommunitySummary& a, const CommunitySummary& b) {
              return a.community_id < b.community_id;
            });

  std::vector<SummaryChunk> pool;
  for (const auto& s : summaries) {
    Document doc{s.community_id, s.summary};
    auto chunks = chunk_document(doc, summary_chunk_tokens, 0, counter);
    for (const auto& c : chunks)
      pool.push_back({c.id(), c.text, c.token_count});
  }
  detail::seeded_shuffle(pool, seed);

  std::vector<Window> windows;
  for (auto& chunk : pool) {
    bool placed = false;
    for (auto& w : windows) {
      if (w.token_total + chunk.tokens <= data_budget) {
        w.chunk_ids.push_back(chunk.id);
        w.chunk_texts.push_back(chunk.text);
        w.token_total += chunk.tokens;
        placed = true;
        break;
      }
    }
    if (!placed) {
      Window w;
      w.id = static_cast<int>(windows.size());
      w.chunk_ids.push_back(chunk.id);
      w.chunk_texts.push_back(chunk.text);
      w.token_total = chunk.tokens;
      windows.push_back(std::move(w));
    }
  }
  return windows;
}

struct MapReduceSpec {
  std::string sub_template = "sub_answer";
  std::string final_template = "final_answer";
  double temperature = 0.0;
  int max_tokens = 1200;
  int max_inflight = 4;
};

// One sub-answer per window: parses {"helpfulness_score", "answer"} and
// clamps the score to [0, 100]; unparseable output self-excludes with
// helpfulness 0.
inline SubAnswer sub_answer(const Gateway& gateway, const PromptLibrary& prompts,
                            const Window& window, const std::string& question,
                            const MapReduceSpec& spec = {},
                            const TokenCounter& counter = default_counter()) {
  if (window.chunk_ids.empty()) throw ContractError("sub_answer requires a nonempty window");
  VarMap vars{{"question", question}, {"input_text", window.render()}};
  SubAnswer out;
  out.window_id = window.id;
  for (int attempt = 0; attempt < 2; ++attempt) {
    VarMap v = vars;
    if (attempt == 1) v["input_text"] += "\n\nReminder: return only the requested JSON object.";
    std::string raw =
        gateway.run(prompts, spec.sub_template, v, spec.temperature, spec.max_tokens);
    try {
      auto j = parse_json_payload(raw, {"helpfulness_score", "answer"});
      double score = j.at("helpfulness_score").is_number()
                         ? j.at("helpfulness_score").get<double>()
                         : std::stod(j.at("helpfulness_score").get<std::string>());
      if (score < 0 || score > 100) out.flagged = true;
      out.helpfulness = static_cast<int>(std::clamp(score, 0.0, 100.0));
      out.text = j.at("answer").is_string() ? j.at("answer").get<std::string>() : j.at("answer").dump();
      out.tokens = counter.count(out.text);
      return out;
    } catch (const std::exception&) {
      // fall through to the re-prompt, then self-exclude
    }
  }
  out.helpfulness = 0;
  out.flagged = true;
  return out;
}

// Discard zero scores, order by (helpfulness desc, window id asc), and keep
// the greedy prefix whose cumulative token count fits the budget.
inline std::vector<SubAnswer> select_sub_answers(std::vector<SubAnswer> subs, size_t data_budget) {
  subs.erase(std::remove_if(subs.begin(), subs.end(),
                            [](const SubAnswer& s) { return s.helpfulness == 0; }),
             subs.end());
  std::sort(subs.begin(), subs.end(), [](const SubAnswer& a, const SubAnswer& b) {
    if (a.helpfulness != b.helpfulness) return a.helpfulness > b.helpfulness;
    return a.window_id < b.window_id;
  });
  std::vector<SubAnswer> out;
  size_t used = 0;
  for (auto& s : subs) {
    if (used + s.tokens > data_budget) break;
    used += s.tokens;
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string render_report_data(const std::vector<SubAnswer>& selected) {
  std::string out;
  for (const auto& s : selected) {
    out += "--- Report (window " + std::to_string(s.window_id) +
           ", helpfulness " + std::to_string(s.helpfulness) + ") ---\n" + s.text + "\n";
  }
  return out;
}

// Aggregates the selected sub-answers (already in score order) into the
// final response. An empty selection yields the fixed insufficiency message.
inline std::string final_answer(const Gateway& gateway, const PromptLibrary& prompts,
                                const std::vector<SubAnswer>& selected, const std::string& question,
                                const MapReduceSpec& spec = {}) {
  if (selected.empty()) return kInsufficientAnswer;
  VarMap vars{{"question", question}, {"report_data", render_report_data(selected)}};
  std::string raw = gateway.run(prompts, spec.final_template, vars, spec.temperature, spec.max_tokens);
  try {
    auto j = parse_json_payload(raw, {"answer"});
    return j.at("answer").is_string() ? j.at("answer").get<std::string>() : j.at("answer").dump();
  } catch (const ParseError&) {
    return trim(raw);  // degraded: treat the whole completion as the answer
  }
}

struct MapReduceResult {
  std::string text;
  std::vector<Window> windows;
  std::vector<SubAnswer> sub_answers;  // all, by window id
  std::vector<int> selected_windows;
};

inline size_t scaffold_budget(const PromptLibrary& prompts, const std::string& template_name,
                              const VarMap& empty_vars, int window_tokens,
                              const TokenCounter& counter = default_counter()) {
  size_t scaffold = counter.count(render_template(prompts.get(template_name), empty_vars));
  size_t window = static_cast<size_t>(window_tokens);
  return window > scaffold + 16 ? window - scaffold : 16;
}

// The full map-reduce pass over a set of community summaries. The same
// machinery answers user queries and runs the topic/description mining
// queries (which swap in their own prompt pair).
inline MapReduceResult run_map_reduce(const Gateway& gateway, const PromptLibrary& prompts,
                                      const std::vector<CommunitySummary>& summaries,
                                      const std::string& question, uint64_t seed, int window_tokens,
                                      const MapReduceSpec& spec = {},
                                      const TokenCounter& counter = default_counter()) {
  MapReduceResult result;
  size_t pack_budget = scaffold_budget(prompts, spec.sub_template,
                                       {{"question", question}, {"input_text", ""}}, window_tokens,
                                       counter);
  size_t chunk_tokens = std::min<size_t>(600, pack_budget);
  result.windows = prepare_windows(summaries, seed, pack_budget, static_cast<int>(chunk_tokens),
                                   counter);
  if (result.windows.empty()) {
    result.text = kInsufficientAnswer;
    return result;
  }

  result.sub_answers.resize(result.windows.size());
  parallel_for(result.windows.size(), spec.max_inflight, [&](size_t i) {
    result.sub_answers[i] = sub_answer(gateway, prompts, result.windows[i], question, spec, counter);
  });

  size_t select_budget = scaffold_budget(prompts, spec.final_template,
                                         {{"question", question}, {"report_data", ""}},
                                         window_tokens, counter);
  auto selected = select_sub_answers(result.sub_answers, select_budget);
  for (const auto& s : selected) result.selected_windows.push_back(s.window_id);
  result.text = final_answer(gateway, prompts, selected, question, spec);
  return result;
}

}  // namespace retag
