#pragma once

// Random dependency-tree generator shared by the graph tests and the
// acceptance suite.

#include <random>
#include <vector>

#include "kagrmn/syntaxgraph.hpp"

namespace kagrmn::testing {

inline const std::vector<std::string>& tree_labels() {
  static const std::vector<std::string> labels = {"nsubj", "obj", "det", "amod", "advmod", "punct"};
  return labels;
}

// Attaches each node (in a random order) to a previously placed node, so the
// result is always a single rooted tree.
inline DependencyParse random_tree(int n, std::mt19937& rng) {
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);

  DependencyParse parse;
  parse.heads.assign(static_cast<size_t>(n), -1);
  parse.rels.assign(static_cast<size_t>(n), "");
  std::uniform_int_distribution<size_t> label_dist(0, tree_labels().size() - 1);
  for (int k = 0; k < n; ++k) {
    const int node = order[static_cast<size_t>(k)];
    if (k == 0) {
      parse.heads[static_cast<size_t>(node)] = -1;
      parse.rels[static_cast<size_t>(node)] = "root";
      continue;
    }
    std::uniform_int_distribution<int> pick(0, k - 1);
    parse.heads[static_cast<size_t>(node)] = order[static_cast<size_t>(pick(rng))];
    parse.rels[static_cast<size_t>(node)] = tree_labels()[label_dist(rng)];
  }
  return parse;
}

inline Span random_span(int n, std::mt19937& rng) {
  std::uniform_int_distribution<int> len_dist(1, std::min(3, n));
  const int len = len_dist(rng);
  std::uniform_int_distribution<int> start_dist(0, n - len);
  const int start = start_dist(rng);
  return {start, start + len};
}

// All-pairs hop distances by Floyd-Warshall; deliberately a different
// algorithm from the implementation's BFS.
inline std::vector<std::vector<int>> all_pairs_distances(const DependencyParse& parse) {
  const int n = parse.size();
  const int inf = 1 << 20;
  std::vector<std::vector<int>> d(static_cast<size_t>(n),
                                  std::vector<int>(static_cast<size_t>(n), inf));
  for (int i = 0; i < n; ++i) d[static_cast<size_t>(i)][static_cast<size_t>(i)] = 0;
  for (int i = 0; i < n; ++i) {
    const int h = parse.heads[static_cast<size_t>(i)];
    if (h == -1) continue;
    d[static_cast<size_t>(i)][static_cast<size_t>(h)] = 1;
    d[static_cast<size_t>(h)][static_cast<size_t>(i)] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            std::min(d[static_cast<size_t>(i)][static_cast<size_t>(j)],
                     d[static_cast<size_t>(i)][static_cast<size_t>(k)] +
                         d[static_cast<size_t>(k)][static_cast<size_t>(j)]);
  return d;
}

}  // namespace kagrmn::testing
