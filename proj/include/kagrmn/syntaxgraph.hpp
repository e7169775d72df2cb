#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace kagrmn {

// Aspect span as a half-open token range [start, end).
struct Span {
  int start = 0;
  int end = 0;
  int length() const { return end - start; }
};

// Heads/labels straight from the dataset: heads[i] is the head token index of
// token i, -1 for the root; rels[i] labels the edge (i, heads[i]).
struct DependencyParse {
  std::vector<int> heads;
  std::vector<std::string> rels;
  int size() const { return static_cast<int>(heads.size()); }
};

// Throws if heads do not form a single rooted tree over the tokens.
void validate_tree(const DependencyParse& parse);

// Dependency graph with all aspect tokens merged into one node. Node ids keep
// original token order; the merged aspect node sits at the span start.
struct SparseGraph {
  int node_count = 0;
  int aspect_node = 0;
  std::vector<std::vector<int>> adjacency;  // sorted, no self-loops, deduplicated
  std::vector<int> degrees;                 // == adjacency[i].size()

  bool has_edge(int a, int b) const;
};

// Star graph: every context node carries the id of its relation to the
// aspect node. The aspect node's own slot holds -1.
struct DenseGraph {
  int node_count = 0;
  int aspect_node = 0;
  std::vector<int> relation_ids;
};

// Relation label inventory: dependency labels from the corpus plus the
// distance buckets dist:1..dist:<cap> and dist:far. Ids are persisted as a
// plain line file so they stay stable across save/load.
class RelationVocab {
 public:
  RelationVocab() = default;
  RelationVocab(std::vector<std::string> dependency_labels, int distance_cap);

  static RelationVocab from_lines(const std::vector<std::string>& lines, int distance_cap);

  int id(const std::string& label) const;  // -1 when unknown
  int id_or_throw(const std::string& label) const;
  const std::string& label(int id) const;
  int size() const { return static_cast<int>(labels_.size()); }
  int distance_cap() const { return distance_cap_; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::string distance_bucket(int hops) const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> ids_;
  int distance_cap_ = 4;
};

// Merges the aspect span into a single node A: edges between aspect tokens
// and context tokens re-attach to A (deduplicated), aspect-internal edges are
// dropped, everything else is reindexed in original order.
SparseGraph build_sparse(const DependencyParse& parse, Span aspect_span);

// Labels each context node by its relation to A: the dependency label when it
// touches the aspect directly, otherwise the bucketed tree distance to the
// nearest aspect token (capped at dist:far).
DenseGraph build_dense(const DependencyParse& parse, Span aspect_span, const RelationVocab& vocab);

// Position weights over merged nodes: w[i] = 1 - |i - tau| / (N + 1).
std::vector<double> position_weights(int n, int tau);

// Hop distances from the token set `sources` over the undirected parse tree.
std::vector<int> tree_distances(const DependencyParse& parse, const std::vector<int>& sources);

}  // namespace kagrmn
