#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "retag/text.hpp"
#include "retag/util.hpp"

namespace retag {

struct Document {
  std::string id;    // unique within a corpus
  std::string text;  // may be empty
};

struct Chunk {
  std::string doc_id;
  int index = 0;           // ordinal within the document
  size_t token_begin = 0;  // [token_begin, token_end) in the document token stream
  size_t token_end = 0;
  std::string text;        // original substring covering the span
  size_t token_count = 0;

  std::string id() const { return doc_id + "#" + std::to_string(index); }
};

// Overlapping token-bounded chunks. stride = size - overlap; chunk i covers
// [i*stride, min(i*stride + size, N)). The last chunk ends at N and may be
// shorter than `overlap`; it is never merged into its predecessor so the
// spans always cover the whole token stream.
inline std::vector<Chunk> chunk_document(const Document& doc, int size, int overlap,
                                         const TokenCounter& counter = default_counter()) {
  if (size <= 0) throw ConfigError("chunk size must be positive");
  if (overlap < 0 || overlap >= size)
    throw ConfigError("chunk overlap must satisfy 0 <= overlap < size");

  auto ranges = counter.token_ranges(doc.text);
  const size_t n = ranges.size();
  std::vector<Chunk> out;
  if (n == 0) return out;

  const size_t stride = static_cast<size_t>(size - overlap);
  for (size_t start = 0, i = 0; start < n; start += stride, ++i) {
    size_t end = std::min(start + static_cast<size_t>(size), n);
    Chunk c;
    c.doc_id = doc.id;
    c.index = static_cast<int>(i);
    c.token_begin = start;
    c.token_end = end;
    c.token_count = end - start;
    c.text = doc.text.substr(ranges[start].begin, ranges[end - 1].end - ranges[start].begin);
    out.push_back(std::move(c));
    if (end == n) break;  // a further chunk would be fully contained in this one
  }
  return out;
}

inline std::vector<Chunk> chunk_corpus(const std::vector<Document>& docs, int size, int overlap,
                                       const TokenCounter& counter = default_counter()) {
  std::vector<Chunk> out;
  for (const auto& doc : docs) {
    auto chunks = chunk_document(doc, size, overlap, counter);
    out.insert(out.end(), chunks.begin(), chunks.end());
  }
  return out;
}

// Corpus input is either a directory of UTF-8 .txt files (id = relative
// path) or a JSON-lines file of {"id":..., "text":...} records.
inline std::vector<Document> load_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<Document> docs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::ostringstream body;
      body << in.rdbuf();
      docs.push_back({fs::relative(f, path).generic_string(), body.str()});
    }
  } else if (fs::is_regular_file(path)) {
    std::ifstream in(path);
    if (!in) throw StoreError("cannot open corpus file: " + path.string());
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.contains("id") || !rec.contains("text"))
        throw ParseError("corpus line " + std::to_string(lineno) +
                         ": expected {\"id\":..., \"text\":...}");
      docs.push_back({rec.at("id").get<std::string>(), rec.at("text").get<std::string>()});
    }
  } else {
    throw StoreError("corpus path not found: " + path.string());
  }
  std::set<std::string> seen;
  for (const auto& d : docs)
    if (!seen.insert(d.id).second) throw ConfigError("duplicate document id: " + d.id);
  return docs;
}

inline std::string corpus_hash(const std::vector<Document>& docs) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& d : docs) {
    h = fnv1a64(d.id, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(d.text, h);
    h = fnv1a64("\x1e", h);
  }
  return to_hex(h);
}

}  // namespace retag
