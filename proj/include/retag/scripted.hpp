#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "retag/llm.hpp"
#include "retag/parsing.hpp"
#include "retag/text.hpp"

namespace retag {

// All-caps tokens (letters first, length >= 2) in first-occurrence order.
// This is the scripted notion of "capitalized token" used by its extraction
// and topic-mining rules.
inline std::vector<std::string> capitalized_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& raw : default_counter().tokenize(text)) {
    std::string tok = strip_punct(raw);
    if (tok.size() < 2) continue;
    if (tok[0] < 'A' || tok[0] > 'Z') continue;
    bool caps = true;
    for (char c : tok)
      if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) {
        caps = false;
        break;
      }
    if (caps && seen.insert(tok).second) out.push_back(tok);
  }
  return out;
}

// Deterministic backend used by tests and the fixture pipeline. Every reply
// is a pure function of (prompt name, rendered inputs, seed), so pipelines
// built on it are byte-reproducible. The rules:
//   extraction        all-caps tokens become person entities; co-occurring
//                     pairs become relations with strength 5
//   reflection        re-extract only when the text mentions RECHECK
//   summarization     fixed JSON skeleton echoing entity names, context
//                     truncated to the request budget
//   sub-answer        helpfulness = round(100 * query-term overlap)
//   final answer      concatenation of the ranked report data
//   topic mining      top-5 most frequent all-caps tokens
//   classification    topic with maximal lexical overlap, zero -> null
//   keyword expansion question content terms (length >= 4)
//   judging           greater query-term overlap wins, tie -> 0
//   relevance         YES iff overlap fraction >= 0.5
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(uint64_t seed = 0) : seed_(seed) {}

  std::string name() const override { return "scripted"; }

  std::string complete(const CompletionRequest& req) override {
    const std::string& p = req.prompt_name;
    if (p == "extract_entities") return extract(var(req, "input_text"), req);
    if (p == "extract_entities_topic") {
      const std::string text = var(req, "input_text");
      const std::string topic = var(req, "topic");
      if (!topic_relevant(topic, text)) return delims_.completion;
      return extract(text, req);
    }
    if (p == "extract_reflection")
      return term_set(var(req, "input_text")).count("recheck") ? "YES" : "NO";
    if (p == "summarize_leaf" || p == "summarize_nonleaf") return report(req, "");
    if (p == "summarize_leaf_topic" || p == "summarize_nonleaf_topic")
      return report(req, var(req, "topic"));
    if (p == "sub_answer") return sub_answer(req);
    if (p == "final_answer") return final_answer(req);
    if (p == "topic_mine_sub") return mine_topics_sub(var(req, "input_text"));
    if (p == "topic_mine_final") return mine_topics_final(var(req, "report_data"));
    if (p == "describe_sub") return describe(var(req, "input_text"), true);
    if (p == "describe_final") return describe(var(req, "report_data"), false);
    if (p == "classify_topic") return classify(var(req, "payload"));
    if (p == "expand_keywords") return keywords(var(req, "payload"));
    if (p == "gen_users") return gen_users(req);
    if (p == "gen_tasks") return gen_tasks(req);
    if (p == "gen_questions") return gen_questions(req);
    if (p == "judge_pair") return judge(req);
    if (p == "label_relevance") return relevance(var(req, "payload"));
    throw ConfigError("scripted backend has no rule for prompt: " + p);
  }

  void set_delimiters(TupleDelimiters d) { delims_ = std::move(d); }

 private:
  static std::string var(const CompletionRequest& req, const std::string& key) {
    auto it = req.vars.find(key);
    if (it == req.vars.end())
      throw ContractError("scripted backend: request missing var '" + key + "'");
    return it->second;
  }

  static bool topic_relevant(const std::string& topic, const std::string& text) {
    auto text_terms = term_set(text);
    for (const auto& t : term_set(topic))
      if (text_terms.count(t)) return true;
    return false;
  }

  std::string extract(const std::string& text, const CompletionRequest&) const {
    auto names = capitalized_tokens(text);
    ExtractionRecord rec;
    std::string snippet = default_counter().truncate(text, 18);
    for (const auto& n : names)
      rec.entities.push_back({n, "person", n + " is mentioned in: " + snippet});
    for (size_t i = 0; i < names.size(); ++i)
      for (size_t j = i + 1; j < names.size(); ++j)
        rec.relations.push_back(
            {names[i], names[j], names[i] + " and " + names[j] + " appear together", 5.0, false});
    return format_tuple_records(rec, delims_);
  }

  // Entity names are read back from the bundle's "entity|NAME|..." lines so
  // reports echo their community's membership.
  std::string report(const CompletionRequest& req, const std::string& topic) const {
    const std::string input = var(req, "input_text");
    std::vector<std::string> names;
    std::set<std::string> seen;
    size_t pos = 0;
    while (pos < input.size() && names.size() < 12) {
      size_t eol = input.find('\n', pos);
      if (eol == std::string::npos) eol = input.size();
      std::string line = input.substr(pos, eol - pos);
      pos = eol + 1;
      if (line.rfind("entity|", 0) == 0) {
        size_t bar = line.find('|', 7);
        std::string name = line.substr(7, bar == std::string::npos ? std::string::npos : bar - 7);
        if (!name.empty() && seen.insert(name).second) names.push_back(name);
      }
    }
    std::string joined;
    for (size_t i = 0; i < names.size(); ++i) joined += (i ? ", " : "") + names[i];

    size_t budget = std::min<size_t>(static_cast<size_t>(std::max(req.max_tokens, 16)), 160);
    nlohmann::json out;
    out["title"] = names.empty() ? std::string("Report") : "Report: " + joined;
    std::string summary = topic.empty() ? "" : "Topic " + topic + ": ";
    summary += joined.empty() ? "" : joined + " - ";
    summary += default_counter().truncate(input, budget);
    out["summary"] = summary;
    out["rating"] = 5.0;
    out["rating explanation"] = "Deterministic scripted rating.";
    auto findings = nlohmann::json::array();
    for (size_t i = 0; i < names.size() && i < 3; ++i)
      findings.push_back({{"summary", "Key entity " + names[i]},
                          {"explanation", names[i] + " is central to this community."}});
    out["findings"] = findings;
    return out.dump();
  }

  std::string sub_answer(const CompletionRequest& req) const {
    const std::string question = var(req, "question");
    const std::string input = var(req, "input_text");
    int score = static_cast<int>(std::llround(100.0 * term_overlap(question, input)));
    nlohmann::json out;
    out["helpfulness_score"] = score;
    out["answer"] = "Based on the provided reports: " + default_counter().truncate(input, 80);
    return out.dump();
  }

  std::string final_answer(const CompletionRequest& req) const {
    const std::string reports = var(req, "report_data");
    nlohmann::json out;
    out["answer"] = "## Synthesized answer\n\n" +
                    default_counter().truncate(reports, static_cast<size_t>(std::max(req.max_tokens, 16)));
    return out.dump();
  }

  static std::vector<std::string> top_caps(const std::string& text, size_t k) {
    std::map<std::string, int> counts;
    for (const auto& raw : default_counter().tokenize(text)) {
      std::string tok = strip_punct(raw);
      if (tok.size() < 2 || tok[0] < 'A' || tok[0] > 'Z') continue;
      bool caps = true;
      for (char c : tok)
        if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) {
          caps = false;
          break;
        }
      if (caps) ++counts[tok];
    }
    std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    std::vector<std::string> out;
    for (size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].first);
    return out;
  }

  std::string mine_topics_sub(const std::string& input) const {
    auto topics = top_caps(input, 5);
    nlohmann::json out;
    out["helpfulness_score"] = topics.empty() ? 0 : 100;
    out["answer"] = topics;
    return out.dump();
  }

  std::string mine_topics_final(const std::string& reports) const {
    nlohmann::json out;
    out["answer"] = top_caps(reports, 5);
    return out.dump();
  }

  std::string describe(const std::string& input, bool sub) const {
    auto subjects = top_caps(input, 3);
    std::string joined;
    for (size_t i = 0; i < subjects.size(); ++i) joined += (i ? ", " : "") + subjects[i];
    std::string desc = "A corpus of community reports about " +
                       (joined.empty() ? std::string("miscellaneous subjects") : joined) + ".";
    nlohmann::json out;
    if (sub) out["helpfulness_score"] = subjects.empty() ? 0 : 100;
    out["answer"] = desc;
    return out.dump();
  }

  std::string classify(const std::string& payload) const {
    auto in = nlohmann::json::parse(payload);
    const std::string question = in.at("question").get<std::string>();
    auto qterms = term_set(question);
    std::string best;
    size_t best_overlap = 0;
    for (const auto& t : in.at("topics")) {
      std::string topic = t.get<std::string>();
      size_t overlap = 0;
      for (const auto& term : term_set(topic))
        if (qterms.count(term)) ++overlap;
      if (overlap > best_overlap || (overlap == best_overlap && overlap > 0 && topic < best)) {
        best = topic;
        best_overlap = overlap;
      }
    }
    nlohmann::json out;
    out["choosed_topic"] = best_overlap == 0 ? "null" : best;
    return out.dump();
  }

  std::string keywords(const std::string& payload) const {
    auto in = nlohmann::json::parse(payload);
    const std::string question = in.at("question").get<std::string>();
    std::vector<std::string> kws;
    std::set<std::string> seen;
    for (const auto& raw : default_counter().tokenize(question)) {
      std::string tok = to_lower(strip_punct(raw));
      if (tok.size() < 4) continue;
      if (seen.insert(tok).second) kws.push_back(tok);
      if (kws.size() == 8) break;
    }
    return nlohmann::json(kws).dump();
  }

  static int count_of(const CompletionRequest& req) {
    auto it = req.vars.find("n");
    return it == req.vars.end() ? 5 : std::stoi(it->second);
  }

  std::string gen_users(const CompletionRequest& req) const {
    static const char* roles[] = {"analyst", "researcher", "journalist", "strategist", "educator"};
    const std::string desc = var(req, "dataset_desc");
    std::string snippet = default_counter().truncate(desc, 6);
    int n = count_of(req);
    auto out = nlohmann::json::array();
    for (int i = 1; i <= n; ++i)
      out.push_back("Persona " + std::to_string(i) + ": " + roles[(i - 1) % 5] + " studying " +
                    snippet);
    return out.dump();
  }

  std::string gen_tasks(const CompletionRequest& req) const {
    const std::string persona = var(req, "persona");
    std::string snippet = default_counter().truncate(persona, 2);
    int n = count_of(req);
    auto tasks = nlohmann::json::array();
    for (int i = 1; i <= n; ++i)
      tasks.push_back("Task " + std::to_string(i) + " of " + snippet + ": map recurring themes");
    return nlohmann::json{{"task", tasks}}.dump();
  }

  std::string gen_questions(const CompletionRequest& req) const {
    const std::string persona = var(req, "persona");
    const std::string task = var(req, "task");
    std::string pid = default_counter().truncate(persona, 2);
    std::string tid = default_counter().truncate(task, 2);
    int n = count_of(req);
    auto qs = nlohmann::json::array();
    for (int i = 1; i <= n; ++i)
      qs.push_back("Question " + std::to_string(i) + " [" + pid + " / " + tid +
                   "]: what patterns span the corpus?");
    return nlohmann::json{{"question", qs}}.dump();
  }

  std::string judge(const CompletionRequest& req) const {
    const std::string question = var(req, "question");
    double a = term_overlap(question, var(req, "answer_a"));
    double b = term_overlap(question, var(req, "answer_b"));
    int winner = a > b ? 1 : (b > a ? 2 : 0);
    nlohmann::json out;
    out["winner"] = winner;
    out["reasoning"] = winner == 0 ? "The answers are fundamentally similar."
                                   : "Answer " + std::to_string(winner) +
                                         " overlaps the question terms more closely.";
    return out.dump();
  }

  std::string relevance(const std::string& payload) const {
    auto in = nlohmann::json::parse(payload);
    double overlap = term_overlap(in.at("question").get<std::string>(),
                                  in.at("report").get<std::string>());
    return overlap >= 0.5 ? "YES" : "NO";
  }

  uint64_t seed_;
  TupleDelimiters delims_;
};

}  // namespace retag
