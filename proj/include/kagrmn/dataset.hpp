#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kagrmn/syntaxgraph.hpp"

namespace kagrmn {

enum class Label : int { Negative = 0, Positive = 1, Neutral = 2 };
inline constexpr int kNumLabels = 3;

Label label_from_string(const std::string& s);
const std::string& label_to_string(Label l);

// One classification instance: a tokenized sentence, the aspect span inside
// it, its dependency parse, the gold polarity, and (optionally) the retrieved
// description tokens.
struct Sample {
  std::string id;
  std::vector<std::string> tokens;
  Span aspect_span;
  Label label = Label::Neutral;
  DependencyParse parse;
  std::optional<std::vector<std::string>> description_tokens;

  std::vector<std::string> aspect_tokens() const;
};

bool operator==(const Sample& a, const Sample& b);

// JSONL fields: id, tokens, aspect_span ([start, end)), label, dep_heads
// (0-based, -1 root), dep_rels, optional description_tokens. Malformed lines
// are rejected with the offending field and line number.
std::vector<Sample> load_dataset(const std::string& path);
void save_dataset(const std::vector<Sample>& samples, const std::string& path);

std::string sample_to_json(const Sample& s);
Sample sample_from_json(const std::string& line, size_t line_no);

}  // namespace kagrmn
