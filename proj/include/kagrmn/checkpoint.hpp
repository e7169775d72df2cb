#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "kagrmn/params.hpp"

namespace kagrmn {

// Checkpoint layout: magic 'KGRM' (u32 LE), format version (u32 LE), then one
// record per parameter until EOF: name length (u32) + name bytes, rank (u32) +
// dims (u32 each), data as little-endian float32, row-major.
inline constexpr uint32_t kCheckpointMagic = 0x4D52474Bu;  // "KGRM"
inline constexpr uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline bool read_u32(std::istream& is, uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
      (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  return true;
}

inline void write_f32(std::ostream& os, float f) {
  uint32_t v;
  std::memcpy(&v, &f, 4);
  write_u32(os, v);
}

inline bool read_f32(std::istream& is, float& f) {
  uint32_t v;
  if (!read_u32(is, v)) return false;
  std::memcpy(&f, &v, 4);
  return true;
}

}  // namespace detail

// Atomic save: writes to "<path>.tmp" then renames over the target.
template <typename Scalar>
void save_checkpoint(const ParameterStore<Scalar>& store, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + tmp);
    detail::write_u32(os, kCheckpointMagic);
    detail::write_u32(os, kCheckpointVersion);
    for (const auto& p : store.all()) {
      detail::write_u32(os, static_cast<uint32_t>(p.name.size()));
      os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
      detail::write_u32(os, 2);
      detail::write_u32(os, static_cast<uint32_t>(p.tensor.rows()));
      detail::write_u32(os, static_cast<uint32_t>(p.tensor.cols()));
      const auto& m = p.tensor.value();
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
          detail::write_f32(os, static_cast<float>(m(r, c)));
    }
    if (!os) throw std::runtime_error("checkpoint write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

// Loads into an already-built store; every stored parameter must match an
// existing one by name and shape, and every registered parameter must be
// present in the file.
template <typename Scalar>
void load_checkpoint(ParameterStore<Scalar>& store, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  uint32_t magic = 0, version = 0;
  if (!detail::read_u32(is, magic) || magic != kCheckpointMagic)
    throw std::runtime_error("not a checkpoint file: " + path);
  if (!detail::read_u32(is, version) || version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

  std::set<std::string> loaded;
  uint32_t name_len = 0;
  while (detail::read_u32(is, name_len)) {
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len))
      throw std::runtime_error("truncated checkpoint: " + path);
    uint32_t rank = 0;
    if (!detail::read_u32(is, rank) || rank != 2)
      throw std::runtime_error("checkpoint parameter '" + name + "' has unsupported rank");
    uint32_t rows = 0, cols = 0;
    if (!detail::read_u32(is, rows) || !detail::read_u32(is, cols))
      throw std::runtime_error("truncated checkpoint: " + path);
    if (!store.contains(name))
      throw std::runtime_error("checkpoint parameter not in current config: " + name);
    Tensor<Scalar>& t = store.get(name);
    if (t.rows() != static_cast<Eigen::Index>(rows) || t.cols() != static_cast<Eigen::Index>(cols))
      throw std::runtime_error("checkpoint shape mismatch for '" + name + "': file " +
                               std::to_string(rows) + "x" + std::to_string(cols) + ", config " +
                               std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        float f;
        if (!detail::read_f32(is, f)) throw std::runtime_error("truncated checkpoint: " + path);
        t.value()(r, c) = static_cast<Scalar>(f);
      }
    loaded.insert(name);
  }
  for (const auto& p : store.all())
    if (!loaded.count(p.name))
      throw std::runtime_error("checkpoint is missing parameter: " + p.name);
}

}  // namespace kagrmn
