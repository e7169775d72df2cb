#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kagrmn {

// Static word embeddings used only for description disambiguation; the
// trainable encoder never sees these. File format: token then the vector
// components, space-separated, one entry per line.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  void insert(const std::string& token, Eigen::VectorXd vec);
  const Eigen::VectorXd* find(const std::string& token) const;
  bool contains(const std::string& token) const { return find(token) != nullptr; }
  int dim() const { return dim_; }
  size_t size() const { return table_.size(); }

  static EmbeddingTable load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::unordered_map<std::string, Eigen::VectorXd> table_;
  int dim_ = 0;
};

// Suffix-rule stemmer: lower-cases, strips possessives, plural and common
// verb endings. Deliberately rule-based so keys are reproducible.
std::string lemmatize(const std::string& token);

class StopWords {
 public:
  StopWords() = default;
  explicit StopWords(std::vector<std::string> words);
  static StopWords load(const std::string& path);
  static StopWords builtin();  // compiled-in default list

  bool contains(const std::string& token) const;
  size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// Aspect key -> candidate descriptions (token lists). Keys are normalized:
// lower-cased, stop words removed, each remaining token lemmatized.
class KnowledgeStore {
 public:
  KnowledgeStore() = default;

  static KnowledgeStore load(const std::string& path, const StopWords& stops);
  void save(const std::string& path) const;

  void add(const std::string& key, std::vector<std::vector<std::string>> candidates);
  const std::vector<std::vector<std::string>>* find(const std::string& key) const;
  size_t size() const { return entries_.size(); }
  const std::unordered_map<std::string, std::vector<std::vector<std::string>>>& entries() const {
    return entries_;
  }

 private:
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> entries_;
};

struct RetrievalConfig {
  double alpha = 0.5;
  std::string domain_label;
};

std::string normalize_key(const std::vector<std::string>& tokens, const StopWords& stops);

// Mean embedding of the non-stop-word tokens present in the table.
// Throws when nothing is embeddable.
Eigen::VectorXd avg_embedding(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                              const StopWords& stops);

// cos(alpha * avg(context) + (1 - alpha) * e(domain_label), avg(candidate)).
double similarity(const std::vector<std::string>& context_tokens,
                  const std::vector<std::string>& candidate_tokens, const EmbeddingTable& table,
                  const StopWords& stops, const RetrievalConfig& cfg);

struct Resolution {
  bool resolved = false;
  std::string key;
  int candidate_index = -1;
  double score = 0.0;
  std::vector<std::string> description;
};

// Looks the aspect up by normalized key and picks the candidate most similar
// to the context; ties and unscorable candidates fall back to the lowest
// index. A missing key is a value (resolved=false), not an error.
Resolution resolve(const std::vector<std::string>& aspect_tokens,
                   const std::vector<std::string>& context_tokens, const KnowledgeStore& store,
                   const EmbeddingTable& table, const StopWords& stops,
                   const RetrievalConfig& cfg);

}  // namespace kagrmn
