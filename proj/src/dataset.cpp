#include "kagrmn/dataset.hpp"

#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

namespace kagrmn {

Label label_from_string(const std::string& s) {
  if (s == "negative") return Label::Negative;
  if (s == "positive") return Label::Positive;
  if (s == "neutral") return Label::Neutral;
  throw std::runtime_error("unknown label: " + s);
}

const std::string& label_to_string(Label l) {
  static const std::string names[] = {"negative", "positive", "neutral"};
  return names[static_cast<int>(l)];
}

std::vector<std::string> Sample::aspect_tokens() const {
  return {tokens.begin() + aspect_span.start, tokens.begin() + aspect_span.end};
}

bool operator==(const Sample& a, const Sample& b) {
  return a.id == b.id && a.tokens == b.tokens && a.aspect_span.start == b.aspect_span.start &&
         a.aspect_span.end == b.aspect_span.end && a.label == b.label &&
         a.parse.heads == b.parse.heads && a.parse.rels == b.parse.rels &&
         a.description_tokens == b.description_tokens;
}

namespace {

[[noreturn]] void fail(size_t line_no, const std::string& field, const std::string& why) {
  throw std::runtime_error("dataset line " + std::to_string(line_no) + ": field '" + field +
                           "': " + why);
}

template <typename T>
T require(const nlohmann::json& j, const char* field, size_t line_no) {
  if (!j.contains(field)) fail(line_no, field, "missing");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(line_no, field, e.what());
  }
}

}  // namespace

Sample sample_from_json(const std::string& line, size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("dataset line " + std::to_string(line_no) +
                             ": invalid JSON: " + e.what());
  }
  Sample s;
  s.id = require<std::string>(j, "id", line_no);
  s.tokens = require<std::vector<std::string>>(j, "tokens", line_no);
  if (s.tokens.empty()) fail(line_no, "tokens", "empty");
  auto span = require<std::vector<int>>(j, "aspect_span", line_no);
  if (span.size() != 2) fail(line_no, "aspect_span", "expected [start, end)");
  s.aspect_span = {span[0], span[1]};
  if (s.aspect_span.start < 0 || s.aspect_span.end > static_cast<int>(s.tokens.size()) ||
      s.aspect_span.start >= s.aspect_span.end)
    fail(line_no, "aspect_span", "empty or out of range");
  try {
    s.label = label_from_string(require<std::string>(j, "label", line_no));
  } catch (const std::runtime_error& e) {
    fail(line_no, "label", e.what());
  }
  s.parse.heads = require<std::vector<int>>(j, "dep_heads", line_no);
  s.parse.rels = require<std::vector<std::string>>(j, "dep_rels", line_no);
  if (s.parse.heads.size() != s.tokens.size())
    fail(line_no, "dep_heads", "length differs from tokens");
  if (s.parse.rels.size() != s.tokens.size())
    fail(line_no, "dep_rels", "length differs from tokens");
  if (j.contains("description_tokens")) {
    auto desc = require<std::vector<std::string>>(j, "description_tokens", line_no);
    if (desc.empty()) fail(line_no, "description_tokens", "present but empty");
    s.description_tokens = std::move(desc);
  }
  return s;
}

std::string sample_to_json(const Sample& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["tokens"] = s.tokens;
  j["aspect_span"] = {s.aspect_span.start, s.aspect_span.end};
  j["label"] = label_to_string(s.label);
  j["dep_heads"] = s.parse.heads;
  j["dep_rels"] = s.parse.rels;
  if (s.description_tokens) j["description_tokens"] = *s.description_tokens;
  return j.dump();
}

std::vector<Sample> load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read dataset: " + path);
  std::vector<Sample> samples;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    samples.push_back(sample_from_json(line, line_no));
  }
  if (samples.empty()) std::cerr << "warning: dataset is empty: " << path << "\n";
  return samples;
}

void save_dataset(const std::vector<Sample>& samples, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& s : samples) os << sample_to_json(s) << "\n";
}

}  // namespace kagrmn
