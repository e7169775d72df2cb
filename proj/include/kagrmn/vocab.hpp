#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace kagrmn {

// Whitespace-level token vocabulary with a fixed reserved block:
// PAD=0, UNK=1, CLS=2, SEP=3. File format: one token per line, the line
// number gives the id after the reserved block.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kReserved = 4;

  Vocabulary();

  // Adds a token if absent; returns its id either way.
  int add(const std::string& token);
  // UNK for unknown tokens.
  int id(const std::string& token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Plain line-per-entry string list, used for the relation label vocabulary.
std::vector<std::string> load_lines(const std::string& path);
void save_lines(const std::vector<std::string>& lines, const std::string& path);

}  // namespace kagrmn
