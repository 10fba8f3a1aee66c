#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "retag/community.hpp"
#include "retag/llm.hpp"
#include "retag/parsing.hpp"
#include "retag/text.hpp"

namespace retag {

// Okapi BM25 over community-summary full texts. Terms are lowercased
// whitespace tokens, no stemming.
struct SummaryIndex {
  std::map<std::string, std::vector<std::pair<std::string, int>>> postings;  // term -> (id, tf)
  std::map<std::string, size_t> doc_lengths;  // id -> tokens
  double avgdl = 0.0;
  size_t N = 0;
  double k1 = 1.2;
  double b = 0.75;
};

struct RankedHit {
  std::string summary_id;
  double score = 0.0;
  int rank = 0;  // 1-based
};

inline std::vector<std::string> index_terms(std::string_view text,
                                            const TokenCounter& counter = default_counter()) {
  std::vector<std::string> out;
  for (const auto& tok : counter.tokenize(text)) out.push_back(to_lower(tok));
  return out;
}

inline SummaryIndex build_index(const std::vector<CommunitySummary>& summaries, double k1 = 1.2,
                                double b = 0.75,
                                const TokenCounter& counter = default_counter()) {
  if (k1 <= 0 || b < 0 || b > 1) throw ConfigError("BM25 parameters out of range");
  SummaryIndex index;
  index.k1 = k1;
  index.b = b;
  index.N = summaries.size();
  size_t total_len = 0;
  for (const auto& s : summaries) {
    auto terms = index_terms(s.full_text, counter);
    index.doc_lengths[s.community_id] = terms.size();
    total_len += terms.size();
    std::map<std::string, int> tf;
    for (const auto& t : terms) ++tf[t];
    for (const auto& [term, count] : tf) index.postings[term].push_back({s.community_id, count});
  }
  for (auto& [term, posting] : index.postings)
    std::sort(posting.begin(), posting.end());
  index.avgdl = index.N == 0 ? 0.0 : static_cast<double>(total_len) / static_cast<double>(index.N);
  return index;
}

// score(d) = sum_t IDF(t) * tf * (k1+1) / (tf + k1*(1 - b + b*|d|/avgdl)),
// IDF(t) = ln((N - df + 0.5)/(df + 0.5) + 1). Query terms are the question's
// tokens plus each expanded keyword's tokens, summed with multiplicity.
inline std::vector<RankedHit> search(const SummaryIndex& index, const std::string& question,
                                     const std::vector<std::string>& keywords, int p,
                                     const TokenCounter& counter = default_counter()) {
  if (p < 1) throw ContractError("retrieval cutoff p must be >= 1");

  std::vector<std::string> query = index_terms(question, counter);
  for (const auto& kw : keywords)
    for (const auto& t : index_terms(kw, counter)) query.push_back(t);

  std::map<std::string, double> scores;
  for (const auto& [id, len] : index.doc_lengths) scores[id] = 0.0;

  const double n = static_cast<double>(index.N);
  for (const auto& term : query) {
    auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    double df = static_cast<double>(it->second.size());
    double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    for (const auto& [id, tf] : it->second) {
      double dl = static_cast<double>(index.doc_lengths.at(id));
      double norm = index.avgdl > 0 ? dl / index.avgdl : 0.0;
      double denom = tf + index.k1 * (1.0 - index.b + index.b * norm);
      scores[id] += idf * (tf * (index.k1 + 1.0)) / denom;
    }
  }

  std::vector<RankedHit> hits;
  hits.reserve(scores.size());
  for (const auto& [id, score] : scores) hits.push_back({id, score, 0});
  std::sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.summary_id < b.summary_id;
  });
  if (hits.size() > static_cast<size_t>(p)) hits.resize(static_cast<size_t>(p));
  for (size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i) + 1;
  return hits;
}

// Corpus-aware query keywords. Fails open: any parse trouble yields an empty
// list and retrieval proceeds with the bare question.
struct KeywordExpansion {
  std::vector<std::string> keywords;
  bool flagged = false;  // the model returned something other than an array
};

inline KeywordExpansion expand_keywords(const Gateway& gateway, const PromptLibrary& prompts,
                                        const std::string& question,
                                        const std::string& description) {
  nlohmann::json payload{{"question", question}, {"dataset_description", description}};
  KeywordExpansion out;
  try {
    std::string raw = gateway.run(prompts, "expand_keywords", {{"payload", payload.dump()}}, 0.0, 256);
    auto parsed = parse_json_payload(raw, {}, true);
    for (const auto& item : parsed)
      if (item.is_string()) out.keywords.push_back(item.get<std::string>());
  } catch (const std::exception&) {
    out.flagged = true;
  }
  return out;
}

// Optional on-disk cache: retrieve/index-{scope}-{level}.json
inline void save_index(const SummaryIndex& index, const std::filesystem::path& file) {
  std::filesystem::create_directories(file.parent_path());
  nlohmann::json j;
  j["k1"] = index.k1;
  j["b"] = index.b;
  j["n"] = index.N;
  j["avgdl"] = index.avgdl;
  j["doc_lengths"] = index.doc_lengths;
  nlohmann::json postings = nlohmann::json::object();
  for (const auto& [term, posting] : index.postings) {
    auto arr = nlohmann::json::array();
    for (const auto& [id, tf] : posting) arr.push_back({{"id", id}, {"tf", tf}});
    postings[term] = std::move(arr);
  }
  j["postings"] = std::move(postings);
  std::ofstream out(file, std::ios::binary);
  out << j.dump() << "\n";
}

inline SummaryIndex load_index(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw StoreError("missing retrieval index: " + file.string());
  nlohmann::json j;
  in >> j;
  SummaryIndex index;
  index.k1 = j.at("k1").get<double>();
  index.b = j.at("b").get<double>();
  index.N = j.at("n").get<size_t>();
  index.avgdl = j.at("avgdl").get<double>();
  index.doc_lengths = j.at("doc_lengths").get<std::map<std::string, size_t>>();
  for (const auto& [term, posting] : j.at("postings").items())
    for (const auto& entry : posting)
      index.postings[term].push_back({entry.at("id").get<std::string>(), entry.at("tf").get<int>()});
  return index;
}

}  // namespace retag
