#pragma once

#include <algorithm>
#include <cctype>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace retag {

// Byte range [begin, end) of one token inside the original text.
struct TokenRange {
  size_t begin = 0;
  size_t end = 0;
};

// Pluggable token accounting. Every budget in the pipeline (chunk sizes,
// context windows, packing limits) is expressed in this counter's units, so a
// subword counter can be swapped in by overriding token_ranges().
class TokenCounter {
 public:
  virtual ~TokenCounter() = default;

  // Byte ranges of the tokens of `text`, in order, non-overlapping.
  virtual std::vector<TokenRange> token_ranges(std::string_view text) const = 0;

  virtual size_t count(std::string_view text) const { return token_ranges(text).size(); }

  std::vector<std::string> tokenize(std::string_view text) const {
    std::vector<std::string> out;
    for (const auto& r : token_ranges(text)) out.emplace_back(text.substr(r.begin, r.end - r.begin));
    return out;
  }

  // First max_tokens tokens of `text`, as a substring of the original.
  std::string truncate(std::string_view text, size_t max_tokens) const {
    auto ranges = token_ranges(text);
    if (ranges.size() <= max_tokens) return std::string(text);
    if (max_tokens == 0) return std::string();
    size_t end = ranges[max_tokens - 1].end;
    return std::string(text.substr(0, end));
  }
};

namespace detail {

// Decodes one UTF-8 codepoint starting at i; advances i past it. Invalid
// bytes are treated as single-byte codepoints.
inline uint32_t decode_utf8(std::string_view s, size_t& i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) {
    ++i;
    return c;
  }
  int extra = 0;
  uint32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    cp = c & 0x1F;
    extra = 1;
  } else if ((c & 0xF0) == 0xE0) {
    cp = c & 0x0F;
    extra = 2;
  } else if ((c & 0xF8) == 0xF0) {
    cp = c & 0x07;
    extra = 3;
  } else {
    ++i;
    return c;
  }
  size_t j = i + 1;
  for (int k = 0; k < extra; ++k, ++j) {
    if (j >= s.size() || (static_cast<unsigned char>(s[j]) & 0xC0) != 0x80) {
      ++i;
      return c;
    }
    cp = (cp << 6) | (static_cast<unsigned char>(s[j]) & 0x3F);
  }
  i = j;
  return cp;
}

inline bool is_unicode_space(uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

}  // namespace detail

// Default counter: maximal runs of non-whitespace codepoints, whitespace per
// Unicode (ASCII space/tabs/newlines plus the common Unicode space set).
class WhitespaceTokenizer final : public TokenCounter {
 public:
  std::vector<TokenRange> token_ranges(std::string_view text) const override {
    std::vector<TokenRange> out;
    size_t i = 0;
    bool in_token = false;
    size_t start = 0;
    while (i < text.size()) {
      size_t at = i;
      uint32_t cp = detail::decode_utf8(text, i);
      bool ws = detail::is_unicode_space(cp);
      if (!ws && !in_token) {
        in_token = true;
        start = at;
      } else if (ws && in_token) {
        out.push_back({start, at});
        in_token = false;
      }
    }
    if (in_token) out.push_back({start, text.size()});
    return out;
  }
};

inline const TokenCounter& default_counter() {
  static const WhitespaceTokenizer instance;
  return instance;
}

// ---- small string helpers shared across modules ----

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Uppercase + whitespace collapse. The canonical entity merge key.
inline std::string normalize_entity_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (const auto& tok : default_counter().tokenize(raw)) {
    if (pending_space) out.push_back(' ');
    out += to_upper(tok);
    pending_space = true;
  }
  return out;
}

// Lowercased distinct terms, with leading/trailing punctuation stripped.
// Shared by the scripted backend rules and BM25 term extraction.
inline std::string strip_punct(std::string_view tok) {
  size_t b = 0, e = tok.size();
  while (b < e && !std::isalnum(static_cast<unsigned char>(tok[b]))) ++b;
  while (e > b && !std::isalnum(static_cast<unsigned char>(tok[e - 1]))) --e;
  return std::string(tok.substr(b, e - b));
}

inline std::set<std::string> term_set(std::string_view text) {
  std::set<std::string> out;
  for (const auto& tok : default_counter().tokenize(text)) {
    std::string t = strip_punct(tok);
    if (!t.empty()) out.insert(to_lower(t));
  }
  return out;
}

// Fraction of `query`'s distinct terms present in `text`. 0 when the query
// has no terms.
inline double term_overlap(std::string_view query, std::string_view text) {
  auto q = term_set(query);
  if (q.empty()) return 0.0;
  auto t = term_set(text);
  size_t hit = 0;
  for (const auto& term : q)
    if (t.count(term)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(q.size());
}

inline std::string slugify(std::string_view s) {
  std::string out;
  bool dash = false;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
      dash = false;
    } else if (!out.empty() && !dash) {
      out.push_back('-');
      dash = true;
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  if (out.empty()) out = "topic";
  return out;
}

}  // namespace retag
