#include "kagrmn/syntaxgraph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace kagrmn {

void validate_tree(const DependencyParse& parse) {
  const int n = parse.size();
  if (n == 0) throw std::runtime_error("dependency parse is empty");
  if (parse.rels.size() != parse.heads.size())
    throw std::runtime_error("dependency parse: heads and rels lengths differ");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const int h = parse.heads[static_cast<size_t>(i)];
    if (h == -1) {
      ++roots;
      continue;
    }
    if (h < 0 || h >= n)
      throw std::runtime_error("dependency parse: head index out of range at token " +
                               std::to_string(i));
    if (h == i) throw std::runtime_error("dependency parse: self-loop at token " + std::to_string(i));
  }
  if (roots != 1)
    throw std::runtime_error("dependency parse: expected exactly one root, found " +
                             std::to_string(roots));
  // Every token must reach the root without revisiting a node.
  for (int i = 0; i < n; ++i) {
    int steps = 0;
    int cur = i;
    while (parse.heads[static_cast<size_t>(cur)] != -1) {
      cur = parse.heads[static_cast<size_t>(cur)];
      if (++steps > n) throw std::runtime_error("dependency parse: cycle detected");
    }
  }
}

bool SparseGraph::has_edge(int a, int b) const {
  const auto& adj = adjacency[static_cast<size_t>(a)];
  return std::binary_search(adj.begin(), adj.end(), b);
}

static void check_span(Span span, int n) {
  if (span.start < 0 || span.end > n || span.start >= span.end)
    throw std::runtime_error("aspect span [" + std::to_string(span.start) + ", " +
                             std::to_string(span.end) + ") invalid for " + std::to_string(n) +
                             " tokens");
}

SparseGraph build_sparse(const DependencyParse& parse, Span aspect_span) {
  validate_tree(parse);
  const int n = parse.size();
  check_span(aspect_span, n);
  const int n_a = aspect_span.length();
  const int merged = n - n_a + 1;

  auto map_node = [&](int tok) {
    if (tok < aspect_span.start) return tok;
    if (tok < aspect_span.end) return aspect_span.start;
    return tok - (n_a - 1);
  };

  std::set<std::pair<int, int>> edges;
  for (int tok = 0; tok < n; ++tok) {
    const int head = parse.heads[static_cast<size_t>(tok)];
    if (head == -1) continue;
    const int a = map_node(tok);
    const int b = map_node(head);
    if (a == b) continue;  // aspect-internal edge
    edges.emplace(std::min(a, b), std::max(a, b));
  }

  SparseGraph g;
  g.node_count = merged;
  g.aspect_node = aspect_span.start;
  g.adjacency.assign(static_cast<size_t>(merged), {});
  for (const auto& [a, b] : edges) {
    g.adjacency[static_cast<size_t>(a)].push_back(b);
    g.adjacency[static_cast<size_t>(b)].push_back(a);
  }
  g.degrees.resize(static_cast<size_t>(merged));
  for (int i = 0; i < merged; ++i) {
    auto& adj = g.adjacency[static_cast<size_t>(i)];
    std::sort(adj.begin(), adj.end());
    g.degrees[static_cast<size_t>(i)] = static_cast<int>(adj.size());
  }
  return g;
}

std::vector<int> tree_distances(const DependencyParse& parse, const std::vector<int>& sources) {
  const int n = parse.size();
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (int tok = 0; tok < n; ++tok) {
    const int head = parse.heads[static_cast<size_t>(tok)];
    if (head == -1) continue;
    adj[static_cast<size_t>(tok)].push_back(head);
    adj[static_cast<size_t>(head)].push_back(tok);
  }
  std::vector<int> dist(static_cast<size_t>(n), -1);
  std::deque<int> queue;
  for (int s : sources) {
    dist[static_cast<size_t>(s)] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    for (int nb : adj[static_cast<size_t>(cur)]) {
      if (dist[static_cast<size_t>(nb)] == -1) {
        dist[static_cast<size_t>(nb)] = dist[static_cast<size_t>(cur)] + 1;
        queue.push_back(nb);
      }
    }
  }
  return dist;
}

RelationVocab::RelationVocab(std::vector<std::string> dependency_labels, int distance_cap)
    : distance_cap_(distance_cap) {
  std::sort(dependency_labels.begin(), dependency_labels.end());
  dependency_labels.erase(std::unique(dependency_labels.begin(), dependency_labels.end()),
                          dependency_labels.end());
  labels_ = std::move(dependency_labels);
  for (int k = 1; k <= distance_cap; ++k) labels_.push_back("dist:" + std::to_string(k));
  labels_.push_back("dist:far");
  for (int i = 0; i < size(); ++i) ids_[labels_[static_cast<size_t>(i)]] = i;
}

RelationVocab RelationVocab::from_lines(const std::vector<std::string>& lines, int distance_cap) {
  RelationVocab v;
  v.distance_cap_ = distance_cap;
  v.labels_ = lines;
  for (int i = 0; i < v.size(); ++i) v.ids_[v.labels_[static_cast<size_t>(i)]] = i;
  return v;
}

int RelationVocab::id(const std::string& label) const {
  auto it = ids_.find(label);
  return it == ids_.end() ? -1 : it->second;
}

int RelationVocab::id_or_throw(const std::string& label) const {
  const int i = id(label);
  if (i < 0) throw std::runtime_error("unknown relation label: " + label);
  return i;
}

const std::string& RelationVocab::label(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("relation id out of range");
  return labels_[static_cast<size_t>(id)];
}

std::string RelationVocab::distance_bucket(int hops) const {
  if (hops <= distance_cap_) return "dist:" + std::to_string(hops);
  return "dist:far";
}

DenseGraph build_dense(const DependencyParse& parse, Span aspect_span,
                       const RelationVocab& vocab) {
  validate_tree(parse);
  const int n = parse.size();
  check_span(aspect_span, n);
  const int n_a = aspect_span.length();
  const int merged = n - n_a + 1;

  auto is_aspect = [&](int tok) { return tok >= aspect_span.start && tok < aspect_span.end; };
  auto map_node = [&](int tok) {
    if (tok < aspect_span.start) return tok;
    if (tok < aspect_span.end) return aspect_span.start;
    return tok - (n_a - 1);
  };

  // Dependency label of the first original edge connecting node j to the
  // aspect, scanning dependents in token order (first occurrence wins).
  std::vector<std::string> direct_label(static_cast<size_t>(merged));
  for (int tok = 0; tok < n; ++tok) {
    const int head = parse.heads[static_cast<size_t>(tok)];
    if (head == -1) continue;
    const bool ta = is_aspect(tok), ha = is_aspect(head);
    if (ta == ha) continue;
    const int ctx = map_node(ta ? head : tok);
    if (direct_label[static_cast<size_t>(ctx)].empty())
      direct_label[static_cast<size_t>(ctx)] = parse.rels[static_cast<size_t>(tok)];
  }

  std::vector<int> sources;
  for (int tok = aspect_span.start; tok < aspect_span.end; ++tok) sources.push_back(tok);
  const std::vector<int> dist = tree_distances(parse, sources);

  DenseGraph g;
  g.node_count = merged;
  g.aspect_node = aspect_span.start;
  g.relation_ids.assign(static_cast<size_t>(merged), -1);
  for (int tok = 0; tok < n; ++tok) {
    if (is_aspect(tok)) continue;
    const int node = map_node(tok);
    std::string label;
    if (!direct_label[static_cast<size_t>(node)].empty())
      label = direct_label[static_cast<size_t>(node)];
    else
      label = vocab.distance_bucket(dist[static_cast<size_t>(tok)]);
    g.relation_ids[static_cast<size_t>(node)] = vocab.id_or_throw(label);
  }
  return g;
}

std::vector<double> position_weights(int n, int tau) {
  if (tau < 0 || tau >= n) throw std::runtime_error("position_weights: tau out of range");
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] = 1.0 - std::abs(i - tau) / static_cast<double>(n + 1);
  return w;
}

}  // namespace kagrmn
