#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "retag/graph.hpp"
#include "retag/leiden.hpp"
#include "retag/llm.hpp"
#include "retag/parsing.hpp"
#include "retag/text.hpp"

namespace retag {

struct Community {
  std::string id;  // "L{level}-{k}"
  int level = 1;   // 1 = coarsest
  std::vector<std::string> members;  // sorted entity names
  std::optional<std::string> parent;
  std::vector<std::string> children;  // sorted ids
  std::optional<std::string> replicated_from;

  bool is_leaf() const { return children.empty(); }
};

struct Hierarchy {
  std::map<std::string, Community> by_id;
  int depth = 0;  // L; 0 for an empty graph

  // Community ids per level (index 0 = level 1). Before normalization the
  // deeper levels may not cover the whole graph.
  std::vector<std::vector<std::string>> level_ids;

  const Community& at(const std::string& id) const { return by_id.at(id); }
};

struct HierarchyParams {
  int max_cluster_size = 10;
  double resolution = 1.0;
  uint64_t seed = 42;
};

namespace detail {

struct RawCommunity {
  std::vector<int> members;
  int level = 1;
  int parent = -1;
  std::vector<int> children;
};

// Induced subgraph over `members` (original vertex ids), reindexed densely.
inline LocalGraph induced_subgraph(const LocalGraph& g, const std::vector<int>& members,
                                   std::vector<int>& local_to_global) {
  std::map<int, int> global_to_local;
  local_to_global = members;
  for (size_t i = 0; i < members.size(); ++i) global_to_local[members[i]] = static_cast<int>(i);
  std::vector<std::pair<int, int>> edges;
  std::vector<double> weights;
  for (size_t i = 0; i < members.size(); ++i) {
    int v = members[i];
    for (const auto& [u, w] : g.adj[v]) {
      if (u < v) continue;
      auto it = global_to_local.find(u);
      if (it == global_to_local.end()) continue;
      edges.push_back({static_cast<int>(i), it->second});
      weights.push_back(w);
    }
  }
  return LocalGraph::from_edges(static_cast<int>(members.size()), edges, weights);
}

}  // namespace detail

// Hierarchical Leiden: the top-level partition forms level 1; any community
// larger than max_cluster_size is re-clustered on its induced subgraph and
// the resulting parts become its children one level deeper. A community the
// algorithm declines to split stays a leaf regardless of its size.
inline Hierarchy build_hierarchy(const ContextGraph& graph, const HierarchyParams& params) {
  Hierarchy out;
  if (graph.nodes.empty()) return out;

  std::vector<std::string> names;
  names.reserve(graph.nodes.size());
  for (const auto& [name, node] : graph.nodes) names.push_back(name);

  std::map<std::string, int> index_of;
  for (size_t i = 0; i < names.size(); ++i) index_of[names[i]] = static_cast<int>(i);

  std::vector<std::pair<int, int>> edges;
  for (const auto& [key, edge] : graph.edges)
    edges.push_back({index_of.at(key.first), index_of.at(key.second)});
  LocalGraph g = LocalGraph::from_edges(static_cast<int>(names.size()), edges);

  std::vector<detail::RawCommunity> raw;

  // Seeds for sub-clustering derive from the configured seed plus the
  // community's smallest member, so results do not depend on traversal order.
  auto derived_seed = [&](const std::vector<int>& members) {
    uint64_t h = params.seed ^ 0x9e3779b97f4a7c15ull;
    h = fnv1a64(names[members.front()], h);
    return h;
  };

  // Recursive split; members arrive sorted by vertex id.
  auto split = [&](auto&& self, int raw_idx) -> void {
    const std::vector<int> members = raw[raw_idx].members;
    if (static_cast<int>(members.size()) <= params.max_cluster_size) return;
    std::vector<int> local_to_global;
    LocalGraph sub = detail::induced_subgraph(g, members, local_to_global);
    std::vector<int> labels = leiden_partition(sub, params.resolution, derived_seed(members));
    int ncomms = *std::max_element(labels.begin(), labels.end()) + 1;
    if (ncomms <= 1) return;  // declined to split; stays a leaf
    std::vector<std::vector<int>> parts(ncomms);
    for (size_t i = 0; i < labels.size(); ++i) parts[labels[i]].push_back(local_to_global[i]);
    for (auto& part : parts) {
      std::sort(part.begin(), part.end());
      detail::RawCommunity child;
      child.members = std::move(part);
      child.level = raw[raw_idx].level + 1;
      child.parent = raw_idx;
      raw.push_back(std::move(child));
      raw[raw_idx].children.push_back(static_cast<int>(raw.size()) - 1);
      self(self, static_cast<int>(raw.size()) - 1);
    }
  };

  std::vector<int> top_labels = leiden_partition(g, params.resolution, params.seed);
  int top_n = *std::max_element(top_labels.begin(), top_labels.end()) + 1;
  std::vector<std::vector<int>> top_parts(top_n);
  for (size_t i = 0; i < top_labels.size(); ++i) top_parts[top_labels[i]].push_back(static_cast<int>(i));
  for (auto& part : top_parts) {
    std::sort(part.begin(), part.end());
    detail::RawCommunity c;
    c.members = std::move(part);
    c.level = 1;
    raw.push_back(std::move(c));
    split(split, static_cast<int>(raw.size()) - 1);
  }

  // Canonical ids: per level, order by smallest member name.
  int depth = 0;
  for (const auto& r : raw) depth = std::max(depth, r.level);
  out.depth = depth;
  out.level_ids.resize(depth);

  std::vector<std::string> raw_id(raw.size());
  for (int level = 1; level <= depth; ++level) {
    std::vector<int> at_level;
    for (size_t i = 0; i < raw.size(); ++i)
      if (raw[i].level == level) at_level.push_back(static_cast<int>(i));
    std::sort(at_level.begin(), at_level.end(), [&](int a, int b) {
      return names[raw[a].members.front()] < names[raw[b].members.front()];
    });
    for (size_t k = 0; k < at_level.size(); ++k) {
      int i = at_level[k];
      raw_id[i] = "L" + std::to_string(level) + "-" + std::to_string(k);
      out.level_ids[level - 1].push_back(raw_id[i]);
    }
  }

  for (size_t i = 0; i < raw.size(); ++i) {
    Community c;
    c.id = raw_id[i];
    c.level = raw[i].level;
    for (int v : raw[i].members) c.members.push_back(names[v]);
    if (raw[i].parent >= 0) c.parent = raw_id[raw[i].parent];
    for (int child : raw[i].children) c.children.push_back(raw_id[child]);
    std::sort(c.children.begin(), c.children.end());
    out.by_id.emplace(c.id, std::move(c));
  }
  return out;
}

// Leaf replication: a leaf community at level l < L is copied into every
// deeper level (chained parent links), so each level's community set becomes
// a disjoint cover of the graph. Replica ids extend the level's numbering.
inline Hierarchy normalize_levels(const Hierarchy& tree) {
  Hierarchy out = tree;
  if (out.depth == 0) return out;

  std::vector<std::pair<std::string, std::string>> pending;  // (leaf id, origin id)
  for (const auto& [id, c] : tree.by_id)
    if (c.is_leaf() && c.level < out.depth) pending.push_back({id, id});

  for (int level = 2; level <= out.depth; ++level) {
    // Replicas to create at this level, ordered by smallest member name.
    std::vector<std::pair<std::string, std::string>> due;  // (current id, origin)
    for (auto& [current, origin] : pending)
      if (out.by_id.at(current).level == level - 1) due.push_back({current, origin});
    std::sort(due.begin(), due.end(), [&](const auto& a, const auto& b) {
      return out.by_id.at(a.first).members.front() < out.by_id.at(b.first).members.front();
    });

    size_t k = out.level_ids[level - 1].size();
    for (auto& [current, origin] : due) {
      std::string id = "L" + std::to_string(level) + "-" + std::to_string(k++);
      Community replica;
      replica.id = id;
      replica.level = level;
      replica.members = out.by_id.at(current).members;
      replica.parent = current;
      replica.replicated_from = origin;
      out.by_id.at(current).children.push_back(id);
      out.level_ids[level - 1].push_back(id);
      out.by_id.emplace(id, std::move(replica));
      // advance the chain
      for (auto& p : pending)
        if (p.first == current && p.second == origin) p.first = id;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Community context assembly and reduction
// ---------------------------------------------------------------------------

enum class ItemKind { node_ctx, edge_ctx, child_summary };

struct ContextItem {
  ItemKind kind = ItemKind::node_ctx;
  std::string key;         // node name, edge key, or community id
  std::string source;      // edge endpoints (edge items only)
  std::string target;
  std::string text;
  size_t tokens = 0;
  int prominence = 0;      // edge prominence; node items carry the max incident value
};

struct ContextBundle {
  std::vector<ContextItem> items;
  size_t total_tokens = 0;

  void recount() {
    total_tokens = 0;
    for (const auto& it : items) total_tokens += it.tokens;
  }

  std::string render() const {
    std::string out;
    for (const auto& it : items) {
      out += it.text;
      out.push_back('\n');
    }
    return out;
  }
};

// One item per member node (all its contexts joined) and one per
// intra-community edge. Node items carry the max prominence of their
// incident intra-community edges, 0 if isolated within the community.
inline ContextBundle assemble_context(const Community& c, const ContextGraph& g,
                                      const TokenCounter& counter = default_counter()) {
  ContextBundle bundle;
  std::set<std::string> member_set(c.members.begin(), c.members.end());

  std::vector<std::pair<EdgeKey, int>> intra_edges;
  std::map<std::string, int> node_prominence;
  for (const auto& [key, edge] : g.edges) {
    if (!member_set.count(key.first) || !member_set.count(key.second)) continue;
    int p = prominence(key, g);
    intra_edges.push_back({key, p});
    node_prominence[key.first] = std::max(node_prominence[key.first], p);
    node_prominence[key.second] = std::max(node_prominence[key.second], p);
  }

  for (const auto& name : c.members) {
    const EntityNode& node = g.nodes.at(name);
    std::string text = "entity|" + node.name + "|" + node.type + "|";
    for (size_t i = 0; i < node.contexts.size(); ++i)
      text += (i ? " ; " : "") + node.contexts[i].description;
    ContextItem item;
    item.kind = ItemKind::node_ctx;
    item.key = name;
    item.text = std::move(text);
    item.tokens = counter.count(item.text);
    auto it = node_prominence.find(name);
    item.prominence = it == node_prominence.end() ? 0 : it->second;
    bundle.items.push_back(std::move(item));
  }
  for (const auto& [key, p] : intra_edges) {
    const RelationEdge& edge = g.edges.at(key);
    std::string text = "relation|" + key.first + "|" + key.second + "|";
    for (size_t i = 0; i < edge.contexts.size(); ++i)
      text += (i ? " ; " : "") + edge.contexts[i].description;
    ContextItem item;
    item.kind = ItemKind::edge_ctx;
    item.key = edge_key_str(key);
    item.source = key.first;
    item.target = key.second;
    item.text = std::move(text);
    item.tokens = counter.count(item.text);
    item.prominence = p;
    bundle.items.push_back(std::move(item));
  }
  bundle.recount();
  return bundle;
}

// Leaf-context reduction: while over budget, drop the lowest-(prominence,
// key) edge item together with any node item whose every incident
// intra-community edge has been dropped. Nodes that never had intra edges
// are only dropped once no edges remain, lowest prominence first. If a lone
// surviving item still exceeds the budget its text is truncated to W tokens.
inline ContextBundle reduce_leaf_context(const ContextBundle& bundle, size_t budget,
                                         const TokenCounter& counter = default_counter()) {
  if (budget == 0) throw ContractError("reduction budget must be positive");
  if (bundle.total_tokens <= budget) return bundle;

  std::vector<char> alive(bundle.items.size(), 1);
  size_t total = bundle.total_tokens;

  std::map<std::string, std::vector<size_t>> edges_of_node;  // node -> edge item indices
  std::map<std::string, size_t> node_item;
  std::vector<size_t> edge_items;
  for (size_t i = 0; i < bundle.items.size(); ++i) {
    const auto& it = bundle.items[i];
    if (it.kind == ItemKind::edge_ctx) {
      edge_items.push_back(i);
      edges_of_node[it.source].push_back(i);
      edges_of_node[it.target].push_back(i);
    } else if (it.kind == ItemKind::node_ctx) {
      node_item[it.key] = i;
    }
  }

  std::sort(edge_items.begin(), edge_items.end(), [&](size_t a, size_t b) {
    const auto& ia = bundle.items[a];
    const auto& ib = bundle.items[b];
    if (ia.prominence != ib.prominence) return ia.prominence < ib.prominence;
    return ia.key < ib.key;
  });

  std::map<std::string, int> remaining_edges;
  for (const auto& [node, edges] : edges_of_node) remaining_edges[node] = static_cast<int>(edges.size());

  auto drop = [&](size_t idx) {
    if (!alive[idx]) return;
    alive[idx] = 0;
    total -= bundle.items[idx].tokens;
  };

  for (size_t e : edge_items) {
    if (total <= budget) break;
    drop(e);
    for (const auto& endpoint : {bundle.items[e].source, bundle.items[e].target}) {
      if (--remaining_edges[endpoint] == 0) {
        auto it = node_item.find(endpoint);
        if (it != node_item.end()) drop(it->second);
      }
    }
  }

  if (total > budget) {
    // Only never-connected node items can remain besides nothing.
    std::vector<size_t> rest;
    for (size_t i = 0; i < bundle.items.size(); ++i)
      if (alive[i]) rest.push_back(i);
    std::sort(rest.begin(), rest.end(), [&](size_t a, size_t b) {
      const auto& ia = bundle.items[a];
      const auto& ib = bundle.items[b];
      if (ia.prominence != ib.prominence) return ia.prominence < ib.prominence;
      return ia.key < ib.key;
    });
    for (size_t i = 0; i + 1 < rest.size() && total > budget; ++i) drop(rest[i]);
  }

  ContextBundle out;
  for (size_t i = 0; i < bundle.items.size(); ++i)
    if (alive[i]) out.items.push_back(bundle.items[i]);
  out.recount();

  if (out.items.size() == 1 && out.total_tokens > budget) {
    out.items[0].text = counter.truncate(out.items[0].text, budget);
    out.items[0].tokens = counter.count(out.items[0].text);
    out.recount();
  }
  return out;
}

// Non-leaf reduction over the union of descendant leaf contexts. Each step
// replaces the largest contribution: a raw context becomes its community's
// summary; a summary collapses into its parent's summary, absorbing every
// contribution under that parent. When the largest contribution is already a
// direct child's summary, the remaining siblings are dropped and the text is
// truncated to the budget.
struct NonLeafReduction {
  ContextBundle bundle;
  size_t iterations = 0;
};

inline NonLeafReduction reduce_nonleaf_context(
    const Community& c, const Hierarchy& hier,
    const std::map<std::string, std::string>& leaf_context_text,
    const std::map<std::string, std::string>& summary_text, size_t budget,
    const TokenCounter& counter = default_counter()) {
  if (budget == 0) throw ContractError("reduction budget must be positive");

  struct Part {
    std::string community;
    bool is_summary = false;
    std::string text;
    size_t tokens = 0;
  };

  // Collect descendant leaves depth-first in sorted child order. Replica
  // chains do not contribute separately; a community whose only children are
  // replicas of itself is an original leaf.
  std::vector<Part> parts;
  auto collect = [&](auto&& self, const std::string& id) -> void {
    const Community& node = hier.at(id);
    if (node.replicated_from) return;
    bool has_real_child = false;
    for (const auto& child : node.children)
      if (!hier.at(child).replicated_from) {
        has_real_child = true;
        self(self, child);
      }
    if (!has_real_child) {
      auto it = leaf_context_text.find(id);
      std::string text = it == leaf_context_text.end() ? std::string() : it->second;
      parts.push_back({id, false, text, counter.count(text)});
    }
  };
  for (const auto& child : c.children) collect(collect, child);

  auto total = [&] {
    size_t t = 0;
    for (const auto& p : parts) t += p.tokens;
    return t;
  };
  auto summary_of = [&](const std::string& id) {
    auto it = summary_text.find(id);
    if (it == summary_text.end())
      throw ContractError("non-leaf reduction requires summarized descendant: " + id);
    return it->second;
  };
  auto is_descendant_or_self = [&](const std::string& id, const std::string& ancestor) {
    std::string cur = id;
    while (true) {
      if (cur == ancestor) return true;
      const auto& node = hier.at(cur);
      if (!node.parent) return false;
      cur = *node.parent;
    }
  };

  NonLeafReduction result;
  while (total() > budget) {
    ++result.iterations;
    // largest contribution; ties to the lexicographically smaller id
    size_t best = 0;
    for (size_t i = 1; i < parts.size(); ++i) {
      if (parts[i].tokens > parts[best].tokens ||
          (parts[i].tokens == parts[best].tokens && parts[i].community < parts[best].community))
        best = i;
    }
    Part& target = parts[best];
    if (!target.is_summary) {
      target.text = summary_of(target.community);
      target.tokens = counter.count(target.text);
      target.is_summary = true;
      continue;
    }
    const Community& node = hier.at(target.community);
    if (node.parent && *node.parent != c.id) {
      // collapse the whole parent subtree into the parent's summary
      std::string parent = *node.parent;
      std::vector<Part> kept;
      for (auto& p : parts)
        if (!is_descendant_or_self(p.community, parent)) kept.push_back(std::move(p));
      std::string text = summary_of(parent);
      size_t tokens = counter.count(text);
      kept.push_back({parent, true, std::move(text), tokens});
      std::sort(kept.begin(), kept.end(),
                [](const Part& a, const Part& b) { return a.community < b.community; });
      parts = std::move(kept);
      continue;
    }
    // Already a direct child's summary: drop the siblings and truncate.
    Part last = std::move(target);
    last.text = counter.truncate(last.text, budget);
    last.tokens = counter.count(last.text);
    parts.clear();
    parts.push_back(std::move(last));
    break;
  }

  for (auto& p : parts) {
    ContextItem item;
    item.kind = p.is_summary ? ItemKind::child_summary : ItemKind::node_ctx;
    item.key = p.community;
    item.text = std::move(p.text);
    item.tokens = p.tokens;
    result.bundle.items.push_back(std::move(item));
  }
  result.bundle.recount();
  return result;
}

// ---------------------------------------------------------------------------
// Summarization
// ---------------------------------------------------------------------------

struct Finding {
  std::string summary;
  std::string explanation;
};

struct CommunitySummary {
  std::string community_id;
  std::string scope = "general";  // "general" or "topic:<t>"
  std::string title;
  std::string summary;
  double rating = 0.0;  // clamped to [0, 10]
  std::string rating_explanation;
  std::vector<Finding> findings;
  std::string full_text;
  std::optional<std::string> replicated_from;
  bool degraded = false;  // schema failure fallback
  bool clamped = false;   // rating was outside [0, 10]
};

inline std::string render_summary_text(const CommunitySummary& s) {
  std::string out = s.title + "\n\n" + s.summary;
  for (const auto& f : s.findings) out += "\n\n" + f.summary + ": " + f.explanation;
  return out;
}

struct SummarizerOptions {
  int window_tokens = 4000;
  double temperature = 0.0;
  int max_tokens = 1200;
  std::optional<std::string> topic;  // topic-aware prompts when set
};

class CommunitySummarizer {
 public:
  CommunitySummarizer(const Gateway& gateway, const PromptLibrary& prompts, SummarizerOptions opts,
                      const TokenCounter& counter = default_counter())
      : gateway_(gateway), prompts_(prompts), opts_(std::move(opts)), counter_(counter) {}

  // Budget left for community data once the prompt scaffold is accounted for.
  size_t data_budget(const std::string& template_name) const {
    VarMap vars{{"input_text", ""}};
    if (opts_.topic) vars["topic"] = *opts_.topic;
    size_t scaffold = counter_.count(render_template(prompts_.get(template_name), vars));
    size_t window = static_cast<size_t>(opts_.window_tokens);
    return window > scaffold + 16 ? window - scaffold : 16;
  }

  std::string template_for(bool leaf) const {
    if (opts_.topic) return leaf ? "summarize_leaf_topic" : "summarize_nonleaf_topic";
    return leaf ? "summarize_leaf" : "summarize_nonleaf";
  }

  // Summarizes every community bottom-up; replicated communities reuse their
  // origin's report. Returns summaries keyed by community id.
  std::map<std::string, CommunitySummary> summarize_all(const Hierarchy& hier,
                                                        const ContextGraph& graph) const {
    std::map<std::string, CommunitySummary> out;
    std::map<std::string, std::string> leaf_context;  // rendered leaf bundles
    std::map<std::string, std::string> summary_full_text;

    for (int level = hier.depth; level >= 1; --level) {
      for (const auto& id : hier.level_ids[level - 1]) {
        const Community& c = hier.at(id);
        if (c.replicated_from) continue;  // replicas resolved after originals
        CommunitySummary s;
        bool original_leaf = c.is_leaf() ||
                             (c.children.size() == 1 &&
                              hier.at(c.children.front()).replicated_from.has_value());
        if (original_leaf) {
          ContextBundle bundle = assemble_context(c, graph, counter_);
          leaf_context[id] = bundle.render();
          ContextBundle reduced =
              reduce_leaf_context(bundle, data_budget(template_for(true)), counter_);
          s = summarize(c, reduced.render(), true);
        } else {
          auto reduced = reduce_nonleaf_context(c, hier, leaf_context, summary_full_text,
                                                data_budget(template_for(false)), counter_);
          s = summarize(c, reduced.bundle.render(), false);
        }
        summary_full_text[id] = s.full_text;
        out.emplace(id, std::move(s));
      }
    }

    // Replicas share the origin's report under their own id.
    for (const auto& [id, c] : hier.by_id) {
      if (!c.replicated_from) continue;
      CommunitySummary s = out.at(*c.replicated_from);
      s.community_id = id;
      s.replicated_from = c.replicated_from;
      out.emplace(id, std::move(s));
    }
    return out;
  }

  CommunitySummary summarize(const Community& c, const std::string& context_text, bool leaf) const {
    VarMap vars{{"input_text", context_text}};
    if (opts_.topic) vars["topic"] = *opts_.topic;
    const std::string tpl = template_for(leaf);

    CommunitySummary s;
    s.community_id = c.id;
    s.scope = opts_.topic ? "topic:" + *opts_.topic : "general";

    for (int attempt = 0; attempt < 2; ++attempt) {
      VarMap v = vars;
      if (attempt == 1)
        v["input_text"] += "\n\nReminder: return only the requested JSON object.";
      std::string raw = gateway_.run(prompts_, tpl, v, opts_.temperature, opts_.max_tokens);
      try {
        auto j = parse_json_payload(raw, {"title", "summary", "rating"});
        s.title = j.at("title").get<std::string>();
        s.summary = j.at("summary").get<std::string>();
        double rating = j.at("rating").is_number() ? j.at("rating").get<double>()
                                                   : std::stod(j.at("rating").get<std::string>());
        if (rating < 0.0 || rating > 10.0) {
          s.clamped = true;
          rating = std::clamp(rating, 0.0, 10.0);
        }
        s.rating = rating;
        if (j.contains("rating explanation"))
          s.rating_explanation = j["rating explanation"].get<std::string>();
        else if (j.contains("rating_explanation"))
          s.rating_explanation = j["rating_explanation"].get<std::string>();
        if (j.contains("findings") && j["findings"].is_array())
          for (const auto& f : j["findings"])
            s.findings.push_back({f.value("summary", ""), f.value("explanation", "")});
        s.full_text = render_summary_text(s);
        return s;
      } catch (const std::exception&) {
        // fall through to re-prompt, then degrade
      }
    }
    s.degraded = true;
    s.title = c.id;
    s.summary = counter_.truncate(context_text, data_budget(tpl));
    s.rating = 0.0;
    s.rating_explanation = "degraded: unparseable summarization output";
    s.full_text = render_summary_text(s);
    return s;
  }

 private:
  const Gateway& gateway_;
  const PromptLibrary& prompts_;
  SummarizerOptions opts_;
  const TokenCounter& counter_;
};

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline void save_hierarchy(const Hierarchy& hier, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (int level = 1; level <= hier.depth; ++level) {
    nlohmann::json communities = nlohmann::json::array();
    for (const auto& id : hier.level_ids[level - 1]) {
      const Community& c = hier.at(id);
      nlohmann::json j;
      j["id"] = c.id;
      j["level"] = c.level;
      j["members"] = c.members;
      j["parent"] = c.parent ? nlohmann::json(*c.parent) : nlohmann::json(nullptr);
      j["children"] = c.children;
      j["replicated_from"] =
          c.replicated_from ? nlohmann::json(*c.replicated_from) : nlohmann::json(nullptr);
      communities.push_back(std::move(j));
    }
    std::ofstream out(dir / ("level-" + std::to_string(level) + ".json"), std::ios::binary);
    out << nlohmann::json{{"communities", communities}, {"level", level}}.dump(2) << "\n";
  }
}

inline Hierarchy load_hierarchy(const std::filesystem::path& dir, int depth) {
  Hierarchy hier;
  hier.depth = depth;
  hier.level_ids.resize(depth);
  for (int level = 1; level <= depth; ++level) {
    std::ifstream in(dir / ("level-" + std::to_string(level) + ".json"));
    if (!in) throw StoreError("missing community level file for level " + std::to_string(level));
    nlohmann::json j;
    in >> j;
    for (const auto& cj : j.at("communities")) {
      Community c;
      c.id = cj.at("id").get<std::string>();
      c.level = cj.at("level").get<int>();
      c.members = cj.at("members").get<std::vector<std::string>>();
      if (!cj.at("parent").is_null()) c.parent = cj.at("parent").get<std::string>();
      c.children = cj.at("children").get<std::vector<std::string>>();
      if (!cj.at("replicated_from").is_null())
        c.replicated_from = cj.at("replicated_from").get<std::string>();
      hier.level_ids[level - 1].push_back(c.id);
      hier.by_id.emplace(c.id, std::move(c));
    }
  }
  return hier;
}

inline void save_summaries(const std::map<std::string, CommunitySummary>& summaries,
                           const Hierarchy& hier, const std::filesystem::path& scope_dir) {
  std::filesystem::create_directories(scope_dir);
  for (int level = 1; level <= hier.depth; ++level) {
    std::ofstream out(scope_dir / ("level-" + std::to_string(level) + ".jsonl"), std::ios::binary);
    for (const auto& id : hier.level_ids[level - 1]) {
      const CommunitySummary& s = summaries.at(id);
      nlohmann::json j;
      j["community"] = id;
      j["scope"] = s.scope;
      j["title"] = s.title;
      j["summary"] = s.summary;
      j["rating"] = s.rating;
      j["rating_explanation"] = s.rating_explanation;
      auto findings = nlohmann::json::array();
      for (const auto& f : s.findings)
        findings.push_back({{"summary", f.summary}, {"explanation", f.explanation}});
      j["findings"] = findings;
      j["full_text"] = s.full_text;
      j["replicated_from"] =
          s.replicated_from ? nlohmann::json(*s.replicated_from) : nlohmann::json(nullptr);
      j["degraded"] = s.degraded;
      out << j.dump() << "\n";
    }
  }
}

inline std::vector<CommunitySummary> load_summaries_level(const std::filesystem::path& scope_dir,
                                                          int level) {
  std::ifstream in(scope_dir / ("level-" + std::to_string(level) + ".jsonl"));
  if (!in) throw StoreError("missing summaries for level " + std::to_string(level) + " under " +
                            scope_dir.string());
  std::vector<CommunitySummary> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    CommunitySummary s;
    s.community_id = j.at("community").get<std::string>();
    s.scope = j.at("scope").get<std::string>();
    s.title = j.at("title").get<std::string>();
    s.summary = j.at("summary").get<std::string>();
    s.rating = j.at("rating").get<double>();
    s.rating_explanation = j.at("rating_explanation").get<std::string>();
    for (const auto& f : j.at("findings"))
      s.findings.push_back({f.at("summary").get<std::string>(), f.at("explanation").get<std::string>()});
    s.full_text = j.at("full_text").get<std::string>();
    if (!j.at("replicated_from").is_null())
      s.replicated_from = j.at("replicated_from").get<std::string>();
    s.degraded = j.at("degraded").get<bool>();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace retag
