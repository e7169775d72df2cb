#pragma once

#include <cstdint>
#include <string>

namespace kagrmn {

enum class GateKind { AdaKI, KI };
enum class A2CSource { Memory, Fused };

GateKind gate_kind_from_string(const std::string& s);
const char* gate_kind_to_string(GateKind g);

// Ablation switchboard. M0 is the full model; each variant toggles exactly
// one documented subset:
//   M1  descriptions replaced with the aspect tokens (no knowledge)
//   M2  encoder + recurrent memory network + classifier only
//   M3  no dual syntax graph network
//   M4  no relational attention branch
//   M5  no position-aware GCN branch
//   M6  no re-enhancement gate
//   M7  no aspect-to-context aggregation
//   M8  no aspect-to-description attention (knowledge = row mean)
//   M9  no self multi-head attention in the recurrence
//   M10 vector gate at both gate sites
//   M11 scalar gate at both gate sites
//   M12 scalar gate in the recurrence, vector gate at re-enhancement
struct VariantSwitch {
  bool use_knowledge = true;
  bool only_kagrmn = false;
  bool use_dsg = true;
  bool use_relational = true;
  bool use_pgcn = true;
  bool use_ki_gate = true;
  bool use_a2c = true;
  bool use_a2d = true;
  bool use_self_mha = true;
  GateKind gate1 = GateKind::AdaKI;  // inside the recurrence
  GateKind gate2 = GateKind::KI;     // re-enhancement

  static VariantSwitch for_variant(int variant, GateKind base_gate1, GateKind base_gate2);
};

struct ModelConfig {
  uint64_t seed = 42;
  int variant = 0;

  // training
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double dropout = 0.3;

  // encoder
  int d_e = 64;
  int encoder_layers = 2;
  int encoder_heads = 4;
  int ffn_mult = 2;
  int max_seq_len = 64;

  // recurrent memory network
  int time_steps = 2;  // T
  int self_heads = 4;  // heads of the in-cell self attention
  bool per_step_projections = false;
  std::string gate_activation = "none";  // none | sigmoid

  // dual syntax graph network
  int rel_heads = 2;  // heads of the relational attention
  int d_r = 16;       // relation embedding width
  int gcn_layers = 2;
  int distance_cap = 4;

  // heads
  std::string a2c_source = "memory";  // memory | fused

  // retrieval
  double alpha = 0.5;
  std::string domain_label = "laptop";

  std::string gate1 = "adaki";
  std::string gate2 = "ki";

  VariantSwitch switches() const;
  int head_width() const { return d_e / self_heads; }  // d_s
  void validate() const;
};

// Flat `key = value` document; '#' starts a comment. Unknown keys are errors.
ModelConfig load_config_file(const std::string& path);
void apply_config_kv(ModelConfig& cfg, const std::string& key, const std::string& value);
std::string config_to_string(const ModelConfig& cfg);

}  // namespace kagrmn
