#include "kagrmn/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace kagrmn {

void EmbeddingTable::insert(const std::string& token, Eigen::VectorXd vec) {
  if (dim_ == 0)
    dim_ = static_cast<int>(vec.size());
  else if (static_cast<int>(vec.size()) != dim_)
    throw std::runtime_error("embedding dimension mismatch for token: " + token);
  table_[token] = std::move(vec);
}

const Eigen::VectorXd* EmbeddingTable::find(const std::string& token) const {
  auto it = table_.find(token);
  return it == table_.end() ? nullptr : &it->second;
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read embedding file: " + path);
  EmbeddingTable t;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vals;
    double x;
    while (ss >> x) vals.push_back(x);
    if (token.empty() || vals.empty())
      throw std::runtime_error("malformed embedding line " + std::to_string(line_no) + " in " +
                               path);
    Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
    t.insert(token, std::move(v));
  }
  return t;
}

void EmbeddingTable::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write embedding file: " + path);
  os.precision(10);
  std::vector<std::string> keys;
  keys.reserve(table_.size());
  for (const auto& [k, _] : table_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (const auto& k : keys) {
    os << k;
    const auto& v = table_.at(k);
    for (Eigen::Index i = 0; i < v.size(); ++i) os << " " << v[i];
    os << "\n";
  }
}

static std::string to_lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

static bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string lemmatize(const std::string& token) {
  std::string t = to_lower(token);
  if (ends_with(t, "'s")) t.erase(t.size() - 2);
  if (ends_with(t, "ies") && t.size() > 4) {
    t.erase(t.size() - 3);
    t += "y";
  } else if (ends_with(t, "sses") && t.size() > 5) {
    t.erase(t.size() - 2);
  } else if (ends_with(t, "es") && t.size() > 4 &&
             (ends_with(t.substr(0, t.size() - 2), "sh") || ends_with(t.substr(0, t.size() - 2), "ch") ||
              t[t.size() - 3] == 'x' || t[t.size() - 3] == 'z' || t[t.size() - 3] == 's')) {
    t.erase(t.size() - 2);
  } else if (ends_with(t, "s") && !ends_with(t, "ss") && t.size() > 3) {
    t.erase(t.size() - 1);
  }
  if (ends_with(t, "ing") && t.size() > 5)
    t.erase(t.size() - 3);
  else if (ends_with(t, "ed") && t.size() > 4)
    t.erase(t.size() - 2);
  return t;
}

StopWords::StopWords(std::vector<std::string> words) {
  for (auto& w : words) words_.insert(to_lower(w));
}

StopWords StopWords::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read stop-word file: " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return StopWords(std::move(words));
}

StopWords StopWords::builtin() {
  return StopWords({"a",    "an",   "and",  "are", "as",   "at",   "be",   "but", "by",
                    "for",  "from", "has",  "had", "have", "he",   "her",  "his", "i",
                    "if",   "in",   "into", "is",  "it",   "its",  "my",   "no",  "not",
                    "of",   "on",   "or",   "our", "she",  "so",   "that", "the", "their",
                    "them", "they", "this", "to",  "was",  "were", "will", "with", "you",
                    "your", "very", "while"});
}

bool StopWords::contains(const std::string& token) const {
  return words_.count(to_lower(token)) > 0;
}

KnowledgeStore KnowledgeStore::load(const std::string& path, const StopWords& stops) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read knowledge store: " + path);
  nlohmann::json j;
  is >> j;
  if (!j.is_object()) throw std::runtime_error("knowledge store must be a JSON object: " + path);
  KnowledgeStore store;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::vector<std::vector<std::string>> candidates;
    if (!it.value().is_array() || it.value().empty())
      throw std::runtime_error("knowledge entry '" + it.key() +
                               "' must be a non-empty array of candidates");
    for (const auto& cand : it.value()) {
      std::vector<std::string> tokens = cand.at("tokens").get<std::vector<std::string>>();
      if (tokens.empty())
        throw std::runtime_error("knowledge entry '" + it.key() + "' has an empty candidate");
      candidates.push_back(std::move(tokens));
    }
    // Keys in the file may be raw surface forms; normalize on ingest.
    std::istringstream ss(it.key());
    std::vector<std::string> key_tokens;
    std::string tok;
    while (ss >> tok) key_tokens.push_back(tok);
    store.add(normalize_key(key_tokens, stops), std::move(candidates));
  }
  return store;
}

void KnowledgeStore::save(const std::string& path) const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, candidates] : entries_) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& cand : candidates) arr.push_back({{"tokens", cand}});
    j[key] = std::move(arr);
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write knowledge store: " + path);
  os << j.dump(2) << "\n";
}

void KnowledgeStore::add(const std::string& key,
                         std::vector<std::vector<std::string>> candidates) {
  if (candidates.empty()) throw std::runtime_error("knowledge entry must have candidates: " + key);
  entries_[key] = std::move(candidates);
}

const std::vector<std::vector<std::string>>* KnowledgeStore::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string normalize_key(const std::vector<std::string>& tokens, const StopWords& stops) {
  std::vector<std::string> parts;
  for (const auto& t : tokens)
    if (!stops.contains(t)) parts.push_back(lemmatize(t));
  if (parts.empty())
    for (const auto& t : tokens) parts.push_back(lemmatize(t));
  std::string key;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) key += ' ';
    key += parts[i];
  }
  return key;
}

Eigen::VectorXd avg_embedding(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                              const StopWords& stops) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dim());
  int count = 0;
  for (const auto& t : tokens) {
    if (stops.contains(t)) continue;
    const Eigen::VectorXd* e = table.find(to_lower(t));
    if (!e) continue;
    sum += *e;
    ++count;
  }
  if (count == 0) throw std::runtime_error("avg_embedding: no embeddable tokens");
  return sum / count;
}

static double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw std::runtime_error("cosine: zero-norm vector (degenerate embedding)");
  return a.dot(b) / (na * nb);
}

double similarity(const std::vector<std::string>& context_tokens,
                  const std::vector<std::string>& candidate_tokens, const EmbeddingTable& table,
                  const StopWords& stops, const RetrievalConfig& cfg) {
  const Eigen::VectorXd* dl = table.find(to_lower(cfg.domain_label));
  if (!dl) throw std::runtime_error("domain label has no embedding: " + cfg.domain_label);
  const Eigen::VectorXd query =
      cfg.alpha * avg_embedding(context_tokens, table, stops) + (1.0 - cfg.alpha) * *dl;
  return cosine(query, avg_embedding(candidate_tokens, table, stops));
}

Resolution resolve(const std::vector<std::string>& aspect_tokens,
                   const std::vector<std::string>& context_tokens, const KnowledgeStore& store,
                   const EmbeddingTable& table, const StopWords& stops,
                   const RetrievalConfig& cfg) {
  Resolution res;
  res.key = normalize_key(aspect_tokens, stops);
  const auto* candidates = store.find(res.key);
  if (!candidates) return res;

  res.resolved = true;
  if (candidates->size() == 1) {
    res.candidate_index = 0;
    res.description = (*candidates)[0];
    return res;
  }
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < candidates->size(); ++i) {
    double score;
    try {
      score = similarity(context_tokens, (*candidates)[i], table, stops, cfg);
    } catch (const std::runtime_error&) {
      continue;  // unscorable candidate
    }
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    best = 0;  // nothing scorable; keep determinism
    best_score = 0.0;
  }
  res.candidate_index = best;
  res.score = best_score;
  res.description = (*candidates)[static_cast<size_t>(best)];
  return res;
}

}  // namespace kagrmn
