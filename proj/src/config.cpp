#include "kagrmn/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kagrmn {

GateKind gate_kind_from_string(const std::string& s) {
  if (s == "adaki") return GateKind::AdaKI;
  if (s == "ki") return GateKind::KI;
  throw std::runtime_error("unknown gate kind: " + s + " (expected adaki|ki)");
}

const char* gate_kind_to_string(GateKind g) { return g == GateKind::AdaKI ? "adaki" : "ki"; }

VariantSwitch VariantSwitch::for_variant(int variant, GateKind base_gate1, GateKind base_gate2) {
  VariantSwitch s;
  s.gate1 = base_gate1;
  s.gate2 = base_gate2;
  switch (variant) {
    case 0:
      break;
    case 1:
      s.use_knowledge = false;
      break;
    case 2:
      s.only_kagrmn = true;
      break;
    case 3:
      s.use_dsg = false;
      break;
    case 4:
      s.use_relational = false;
      break;
    case 5:
      s.use_pgcn = false;
      break;
    case 6:
      s.use_ki_gate = false;
      break;
    case 7:
      s.use_a2c = false;
      break;
    case 8:
      s.use_a2d = false;
      break;
    case 9:
      s.use_self_mha = false;
      break;
    case 10:
      s.gate1 = GateKind::AdaKI;
      s.gate2 = GateKind::AdaKI;
      break;
    case 11:
      s.gate1 = GateKind::KI;
      s.gate2 = GateKind::KI;
      break;
    case 12:
      s.gate1 = GateKind::KI;
      s.gate2 = GateKind::AdaKI;
      break;
    default:
      throw std::runtime_error("unknown variant M" + std::to_string(variant));
  }
  return s;
}

VariantSwitch ModelConfig::switches() const {
  return VariantSwitch::for_variant(variant, gate_kind_from_string(gate1),
                                    gate_kind_from_string(gate2));
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw std::runtime_error(std::string(name) + " must be positive");
  };
  positive(d_e, "d_e");
  positive(encoder_layers, "encoder_layers");
  positive(encoder_heads, "encoder_heads");
  positive(ffn_mult, "ffn_mult");
  positive(max_seq_len, "max_seq_len");
  positive(self_heads, "self_heads");
  positive(rel_heads, "rel_heads");
  positive(d_r, "d_r");
  positive(gcn_layers, "gcn_layers");
  positive(distance_cap, "distance_cap");
  positive(batch_size, "batch_size");
  if (time_steps < 0) throw std::runtime_error("time_steps must be >= 0");
  if (epochs < 0) throw std::runtime_error("epochs must be >= 0");
  if (d_e % encoder_heads != 0) throw std::runtime_error("d_e must be divisible by encoder_heads");
  if (d_e % self_heads != 0) throw std::runtime_error("d_e must be divisible by self_heads");
  if (dropout < 0.0 || dropout >= 1.0) throw std::runtime_error("dropout must be in [0, 1)");
  if (alpha < 0.0 || alpha > 1.0) throw std::runtime_error("alpha must be in [0, 1]");
  if (variant < 0 || variant > 12) throw std::runtime_error("variant must be M0..M12");
  if (gate_activation != "none" && gate_activation != "sigmoid")
    throw std::runtime_error("gate_activation must be none|sigmoid");
  if (a2c_source != "memory" && a2c_source != "fused")
    throw std::runtime_error("a2c_source must be memory|fused");
  gate_kind_from_string(gate1);
  gate_kind_from_string(gate2);
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::runtime_error("config key '" + key + "': expected boolean, got '" + v + "'");
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_kv(ModelConfig& cfg, const std::string& key, const std::string& value) {
  try {
    if (key == "seed")
      cfg.seed = std::stoull(value);
    else if (key == "variant") {
      std::string v = value;
      if (!v.empty() && (v[0] == 'M' || v[0] == 'm')) v = v.substr(1);
      cfg.variant = std::stoi(v);
    } else if (key == "epochs")
      cfg.epochs = std::stoi(value);
    else if (key == "batch_size")
      cfg.batch_size = std::stoi(value);
    else if (key == "learning_rate")
      cfg.learning_rate = std::stod(value);
    else if (key == "dropout")
      cfg.dropout = std::stod(value);
    else if (key == "d_e")
      cfg.d_e = std::stoi(value);
    else if (key == "encoder_layers")
      cfg.encoder_layers = std::stoi(value);
    else if (key == "encoder_heads")
      cfg.encoder_heads = std::stoi(value);
    else if (key == "ffn_mult")
      cfg.ffn_mult = std::stoi(value);
    else if (key == "max_seq_len")
      cfg.max_seq_len = std::stoi(value);
    else if (key == "time_steps")
      cfg.time_steps = std::stoi(value);
    else if (key == "self_heads")
      cfg.self_heads = std::stoi(value);
    else if (key == "rel_heads")
      cfg.rel_heads = std::stoi(value);
    else if (key == "d_r")
      cfg.d_r = std::stoi(value);
    else if (key == "gcn_layers")
      cfg.gcn_layers = std::stoi(value);
    else if (key == "distance_cap")
      cfg.distance_cap = std::stoi(value);
    else if (key == "alpha")
      cfg.alpha = std::stod(value);
    else if (key == "domain_label")
      cfg.domain_label = value;
    else if (key == "gate_activation")
      cfg.gate_activation = value;
    else if (key == "per_step_projections")
      cfg.per_step_projections = parse_bool(value, key);
    else if (key == "a2c_source")
      cfg.a2c_source = value;
    else if (key == "gate1")
      cfg.gate1 = value;
    else if (key == "gate2")
      cfg.gate2 = value;
    else
      throw std::runtime_error("unknown config key: " + key);
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("config key '" + key + "': cannot parse value '" + value + "'");
  }
}

ModelConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config file: " + path);
  ModelConfig cfg;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected 'key = value'");
    apply_config_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::string config_to_string(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "seed = " << cfg.seed << "\n"
     << "variant = M" << cfg.variant << "\n"
     << "epochs = " << cfg.epochs << "\n"
     << "batch_size = " << cfg.batch_size << "\n"
     << "learning_rate = " << cfg.learning_rate << "\n"
     << "dropout = " << cfg.dropout << "\n"
     << "d_e = " << cfg.d_e << "\n"
     << "encoder_layers = " << cfg.encoder_layers << "\n"
     << "encoder_heads = " << cfg.encoder_heads << "\n"
     << "ffn_mult = " << cfg.ffn_mult << "\n"
     << "max_seq_len = " << cfg.max_seq_len << "\n"
     << "time_steps = " << cfg.time_steps << "\n"
     << "self_heads = " << cfg.self_heads << "\n"
     << "rel_heads = " << cfg.rel_heads << "\n"
     << "d_r = " << cfg.d_r << "\n"
     << "gcn_layers = " << cfg.gcn_layers << "\n"
     << "distance_cap = " << cfg.distance_cap << "\n"
     << "alpha = " << cfg.alpha << "\n"
     << "domain_label = " << cfg.domain_label << "\n"
     << "gate_activation = " << cfg.gate_activation << "\n"
     << "per_step_projections = " << (cfg.per_step_projections ? "true" : "false") << "\n"
     << "a2c_source = " << cfg.a2c_source << "\n"
     << "gate1 = " << cfg.gate1 << "\n"
     << "gate2 = " << cfg.gate2 << "\n";
  return os.str();
}

}  // namespace kagrmn
