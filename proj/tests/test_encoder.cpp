#include <doctest.h>

#include <random>

#include "kagrmn/encoder.hpp"

using namespace kagrmn;

namespace {

EncoderConfig tiny_cfg() {
  EncoderConfig cfg;
  cfg.vocab_size = 20;
  cfg.d_e = 8;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.ffn_mult = 2;
  cfg.max_seq_len = 16;
  return cfg;
}

}  // namespace

TEST_CASE("encode_pair shape contract") {
  ParameterStore<double> store(3);
  EncoderConfig cfg = tiny_cfg();
  auto w = register_encoder(store, cfg);
  RunContext<double> ctx;
  std::vector<int> context = {4, 5, 6, 7};
  std::vector<int> aspect = {5};
  PairEncoding<double> enc = encode_pair(context, aspect, w, cfg, ctx);
  CHECK(enc.h_cls.rows() == 1);
  CHECK(enc.h_cls.cols() == cfg.d_e);
  CHECK(enc.context_states.rows() == 4);
  CHECK(enc.context_states.cols() == cfg.d_e);
}

TEST_CASE("encoder is deterministic under a fixed seed") {
  EncoderConfig cfg = tiny_cfg();
  RunContext<double> ctx;
  std::vector<int> context = {4, 5, 6};
  std::vector<int> aspect = {6, 7};

  ParameterStore<double> s1(11), s2(11);
  auto w1 = register_encoder(s1, cfg);
  auto w2 = register_encoder(s2, cfg);
  PairEncoding<double> a = encode_pair(context, aspect, w1, cfg, ctx);
  PairEncoding<double> b = encode_pair(context, aspect, w2, cfg, ctx);
  CHECK(a.h_cls.value() == b.h_cls.value());
  CHECK(a.context_states.value() == b.context_states.value());
}

TEST_CASE("permuting two context tokens changes their states") {
  ParameterStore<double> store(13);
  EncoderConfig cfg = tiny_cfg();
  auto w = register_encoder(store, cfg);
  RunContext<double> ctx;
  PairEncoding<double> a = encode_pair({4, 5, 6, 7}, {8}, w, cfg, ctx);
  PairEncoding<double> b = encode_pair({4, 6, 5, 7}, {8}, w, cfg, ctx);
  CHECK(a.context_states.value().row(1) != b.context_states.value().row(1));
  CHECK(a.context_states.value().row(2) != b.context_states.value().row(2));
}

TEST_CASE("encode_single: shape, empty error, differs from pair context") {
  ParameterStore<double> store(17);
  EncoderConfig cfg = tiny_cfg();
  auto w = register_encoder(store, cfg);
  RunContext<double> ctx;
  std::vector<int> tokens = {4, 5, 6};
  Tensor<double> h_d = encode_single(tokens, w, cfg, ctx);
  CHECK(h_d.rows() == 3);
  CHECK(h_d.cols() == cfg.d_e);
  CHECK_THROWS(encode_single({}, w, cfg, ctx));

  PairEncoding<double> pair = encode_pair(tokens, {9}, w, cfg, ctx);
  CHECK(h_d.value() != pair.context_states.value());
}

TEST_CASE("sequence length overflow reports lengths") {
  ParameterStore<double> store(5);
  EncoderConfig cfg = tiny_cfg();
  auto w = register_encoder(store, cfg);
  RunContext<double> ctx;
  std::vector<int> context(14, 4);
  CHECK_THROWS_WITH_AS(encode_pair(context, {5}, w, cfg, ctx), doctest::Contains("exceeds max"),
                       std::runtime_error);
}

TEST_CASE("memory banks collapse the aspect span onto h_cls") {
  ParameterStore<double> store(19);
  EncoderConfig cfg = tiny_cfg();
  auto w = register_encoder(store, cfg);
  RunContext<double> ctx;
  std::vector<int> context = {4, 5, 6, 7, 8, 9};  // N_C = 6
  std::vector<int> aspect = {6, 7};
  PairEncoding<double> enc = encode_pair(context, aspect, w, cfg, ctx);
  Tensor<double> h_d = encode_single({10, 11}, w, cfg, ctx);

  MemoryBanks<double> banks = build_memory_banks(enc.h_cls, enc.context_states, {2, 4}, h_d);
  CHECK(banks.context.rows() == 5);  // N = N_C - N_A + 1
  CHECK(banks.aspect_index == 2);
  // aspect slot is exactly h_cls
  CHECK(banks.context.value().row(2) == enc.h_cls.value().row(0));
  // rows outside the span are bit-identical to the context states
  CHECK(banks.context.value().row(0) == enc.context_states.value().row(0));
  CHECK(banks.context.value().row(1) == enc.context_states.value().row(1));
  CHECK(banks.context.value().row(3) == enc.context_states.value().row(4));
  CHECK(banks.context.value().row(4) == enc.context_states.value().row(5));
  // description bank passes through
  CHECK(banks.description.value() == h_d.value());

  // single-token aspect keeps the full length
  MemoryBanks<double> single = build_memory_banks(enc.h_cls, enc.context_states, {0, 1}, h_d);
  CHECK(single.context.rows() == 6);
  CHECK(single.context.value().row(0) == enc.h_cls.value().row(0));

  CHECK_THROWS(build_memory_banks(enc.h_cls, enc.context_states, {4, 4}, h_d));
  CHECK_THROWS(build_memory_banks(enc.h_cls, enc.context_states, {5, 8}, h_d));
}

TEST_CASE("encoder parameters receive gradients") {
  ParameterStore<double> store(23);
  EncoderConfig cfg = tiny_cfg();
  auto w = register_encoder(store, cfg);
  RunContext<double> ctx;
  PairEncoding<double> enc = encode_pair({4, 5, 6}, {7}, w, cfg, ctx);
  backward(sum_all(concat_rows(enc.h_cls, enc.context_states)));
  for (const auto& p : store.all()) {
    INFO(p.name);
    CHECK(p.tensor.has_grad());
    CHECK(p.tensor.grad().allFinite());
  }
}
