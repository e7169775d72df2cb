#include <doctest.h>

#include <random>

#include "fd_check.hpp"
#include "kagrmn/dsgnet.hpp"
#include "tree_gen.hpp"

using namespace kagrmn;
using kagrmn::testing::random_matrix;
using kagrmn::testing::random_span;
using kagrmn::testing::random_tree;

namespace {

Tensor<double> rand_t(Eigen::Index r, Eigen::Index c, std::mt19937& rng, bool grad = false) {
  return Tensor<double>::from_matrix(random_matrix(r, c, rng), grad);
}

SparseGraph path_graph(int n) {
  SparseGraph g;
  g.node_count = n;
  g.aspect_node = 0;
  g.adjacency.assign(static_cast<size_t>(n), {});
  for (int i = 0; i + 1 < n; ++i) {
    g.adjacency[static_cast<size_t>(i)].push_back(i + 1);
    g.adjacency[static_cast<size_t>(i + 1)].push_back(i);
  }
  g.degrees.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    g.degrees[static_cast<size_t>(i)] = static_cast<int>(g.adjacency[static_cast<size_t>(i)].size());
  return g;
}

// Explicit neighbor-loop oracle for the position-aware aggregation.
Mat<double> pgcn_oracle(const Mat<double>& h, const SparseGraph& g, const std::vector<double>& wp,
                        const Mat<double>& w, const Mat<double>& b) {
  const int n = g.node_count;
  Mat<double> out = Mat<double>::Zero(n, w.cols());
  for (int i = 0; i < n; ++i) {
    std::vector<int> neigh = g.adjacency[static_cast<size_t>(i)];
    neigh.push_back(i);
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(w.cols());
    for (int j : neigh) {
      Eigen::RowVectorXd scaled = wp[static_cast<size_t>(j)] * h.row(j);
      acc += scaled * w;
    }
    out.row(i) = acc / (g.degrees[static_cast<size_t>(i)] + 1) + b.row(0);
  }
  return out;
}

}  // namespace

TEST_CASE("pgcn on a path graph with identity weights averages the neighborhood") {
  const int d = 3;
  Mat<double> h(3, d);
  h << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  SparseGraph g = path_graph(3);
  std::vector<double> wp = {1.0, 1.0, 1.0};
  auto w = Tensor<double>::from_matrix(Mat<double>::Identity(d, d));
  auto b = Tensor<double>::zeros(1, d);
  Tensor<double> out = pgcn_layer(Tensor<double>::from_matrix(h), g, wp, w, b);
  // middle node: degree 2, neighborhood {0,1,2} -> (e1+e2+e3)/3
  for (int c = 0; c < d; ++c) CHECK(out.value()(1, c) == doctest::Approx(1.0 / 3));
}

TEST_CASE("pgcn on an isolated node is its own scaled projection") {
  std::mt19937 rng(21);
  const int d = 4;
  SparseGraph g;
  g.node_count = 1;
  g.aspect_node = 0;
  g.adjacency = {{}};
  g.degrees = {0};
  auto h = rand_t(1, d, rng);
  auto w = rand_t(d, d, rng);
  auto b = rand_t(1, d, rng);
  std::vector<double> wp = {0.7};
  Tensor<double> out = pgcn_layer(h, g, wp, w, b);
  Mat<double> expect = (0.7 * h.value()) * w.value() + b.value();
  CHECK((out.value() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pgcn matches the neighbor-loop oracle on random graphs") {
  std::mt19937 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> n_dist(2, 8);
    const int n = n_dist(rng);
    DependencyParse parse = random_tree(n, rng);
    Span span = random_span(n, rng);
    SparseGraph g = build_sparse(parse, span);
    std::vector<double> wp = position_weights(g.node_count, g.aspect_node);
    const int d = 5;
    auto h = rand_t(g.node_count, d, rng);
    auto w = rand_t(d, d, rng);
    auto b = rand_t(1, d, rng);
    Tensor<double> out = pgcn_layer(h, g, wp, w, b);
    Mat<double> oracle = pgcn_oracle(h.value(), g, wp, w.value(), b.value());
    CHECK((out.value() - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
}

namespace {

DenseGraph star(int n, int aspect, const std::vector<int>& rels) {
  DenseGraph g;
  g.node_count = n;
  g.aspect_node = aspect;
  g.relation_ids.assign(static_cast<size_t>(n), -1);
  int k = 0;
  for (int i = 0; i < n; ++i)
    if (i != aspect) g.relation_ids[static_cast<size_t>(i)] = rels[static_cast<size_t>(k++)];
  return g;
}

}  // namespace

TEST_CASE("relational attention with identical relations is uniform over context") {
  std::mt19937 rng(23);
  const int n = 4, d = 6, d_r = 3;
  auto h = rand_t(n, d, rng);
  auto rel_emb = rand_t(5, d_r, rng);
  DenseGraph g = star(n, 1, {2, 2, 2});

  std::vector<DsgWeights<double>::RelHead> heads;
  for (int m = 0; m < 2; ++m)
    heads.push_back({rand_t(d, d, rng), rand_t(d_r, d_r, rng), rand_t(1, d_r, rng),
                     rand_t(d_r, 1, rng), rand_t(1, 1, rng)});
  RelationalResult<double> res = relational_mha(h, g, rel_emb, heads);

  // aspect row: head-mean of the uniform mean of projected context rows
  Mat<double> expect = Mat<double>::Zero(1, d);
  for (const auto& hd : heads) {
    Mat<double> acc = Mat<double>::Zero(1, d);
    for (int i : {0, 2, 3}) acc += h.value().row(i) * hd.w1.value() / 3.0;
    expect += acc;
  }
  expect /= 2.0;
  CHECK((res.out.value().row(1) - expect.row(0)).cwiseAbs().maxCoeff() < 1e-9);
  for (const auto& beta : res.aspect_betas)
    for (int i = 0; i < 3; ++i) CHECK(beta.value()(0, i) == doctest::Approx(1.0 / 3));

  // context rows: head-mean of the aspect projection (single neighbor)
  Mat<double> ctx_expect = Mat<double>::Zero(1, d);
  for (const auto& hd : heads) ctx_expect += h.value().row(1) * hd.w1.value();
  ctx_expect /= 2.0;
  for (int i : {0, 2, 3})
    CHECK((res.out.value().row(i) - ctx_expect.row(0)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("relational attention matches an independent dense evaluation") {
  std::mt19937 rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> n_dist(2, 8);
    const int n = n_dist(rng), d = 4, d_r = 3, n_heads = 2;
    std::uniform_int_distribution<int> a_dist(0, n - 1);
    const int aspect = a_dist(rng);
    std::uniform_int_distribution<int> rel_dist(0, 4);
    std::vector<int> rels;
    for (int i = 0; i + 1 < n; ++i) rels.push_back(rel_dist(rng));
    DenseGraph g = star(n, aspect, rels);
    auto h = rand_t(n, d, rng);
    auto rel_emb = rand_t(5, d_r, rng);
    std::vector<DsgWeights<double>::RelHead> heads;
    for (int m = 0; m < n_heads; ++m)
      heads.push_back({rand_t(d, d, rng), rand_t(d_r, d_r, rng), rand_t(1, d_r, rng),
                       rand_t(d_r, 1, rng), rand_t(1, 1, rng)});

    RelationalResult<double> res = relational_mha(h, g, rel_emb, heads);

    // independent evaluation with explicit loops
    Mat<double> expect = Mat<double>::Zero(n, d);
    for (const auto& hd : heads) {
      // score per context node from its relation embedding
      std::vector<double> score;
      std::vector<int> ctx;
      for (int i = 0; i < n; ++i) {
        if (i == aspect) continue;
        ctx.push_back(i);
        const int r = g.relation_ids[static_cast<size_t>(i)];
        Eigen::RowVectorXd e = rel_emb.value().row(r);
        Eigen::RowVectorXd hid = e * hd.w2.value() + hd.b1.value().row(0);
        for (Eigen::Index c = 0; c < hid.size(); ++c) hid[c] = std::max(0.0, hid[c]);
        score.push_back((hid * hd.w3.value())(0, 0) + hd.b2.value()(0, 0));
      }
      double mx = *std::max_element(score.begin(), score.end());
      double z = 0;
      for (double& s : score) {
        s = std::exp(s - mx);
        z += s;
      }
      for (size_t k = 0; k < ctx.size(); ++k)
        expect.row(aspect) += (score[k] / z) * (h.value().row(ctx[k]) * hd.w1.value());
      for (int i : ctx) expect.row(i) += h.value().row(aspect) * hd.w1.value();
    }
    expect /= n_heads;
    CHECK((res.out.value() - expect).cwiseAbs().maxCoeff() < 1e-9);
    for (const auto& beta : res.aspect_betas) CHECK(std::abs(beta.value().sum() - 1.0) < 1e-6);
  }
}

TEST_CASE("relational attention rejects unknown relation ids") {
  std::mt19937 rng(25);
  auto h = rand_t(3, 4, rng);
  auto rel_emb = rand_t(2, 3, rng);
  DenseGraph g = star(3, 0, {1, 7});  // id 7 out of range
  std::vector<DsgWeights<double>::RelHead> heads;
  heads.push_back({rand_t(4, 4, rng), rand_t(3, 3, rng), rand_t(1, 3, rng), rand_t(3, 1, rng),
                   rand_t(1, 1, rng)});
  CHECK_THROWS_WITH_AS(relational_mha(h, g, rel_emb, heads), doctest::Contains("relation"),
                       std::runtime_error);
}

namespace {

DsgWeights<double> make_dsg(ParameterStore<double>& store, DsgConfig& cfg, int rel_vocab = 6) {
  cfg.d_e = 6;
  cfg.gcn_layers = 2;
  cfg.rel_heads = 2;
  cfg.d_r = 3;
  cfg.relation_vocab_size = rel_vocab;
  return register_dsg(store, cfg);
}

}  // namespace

TEST_CASE("fusion MLP: zero weights give zero, gradients reach both inputs") {
  std::mt19937 rng(26);
  ParameterStore<double> store(81);
  DsgConfig cfg;
  DsgWeights<double> w = make_dsg(store, cfg);
  auto h1 = rand_t(1, 6, rng, true);
  auto h2 = rand_t(1, 6, rng, true);

  {
    ParameterStore<double> zstore(82);
    DsgConfig zcfg;
    DsgWeights<double> zw = make_dsg(zstore, zcfg);
    for (auto& p : zstore.all()) p.tensor.value().setZero();
    Tensor<double> out = fuse(h1, h2, zw);
    CHECK(out.value().cwiseAbs().maxCoeff() == 0.0);
  }

  Tensor<double> out = fuse(h1, h2, w);
  CHECK(out.cols() == 6);
  CHECK(out.rows() == 1);
  CHECK(kagrmn::testing::max_grad_error([&] { return fuse(h1, h2, w); }, {h1, h2}, rng) < 1e-5);
}

TEST_CASE("dsg run: variants differ and aspect row equals direct fusion") {
  std::mt19937 rng(27);
  const int n = 5;
  DependencyParse parse = random_tree(n, rng);
  Span span = random_span(n, rng);
  SparseGraph sparse = build_sparse(parse, span);
  std::uniform_int_distribution<int> rel_dist(0, 5);
  std::vector<int> rels;
  for (int i = 0; i + 1 < sparse.node_count; ++i) rels.push_back(rel_dist(rng));
  DenseGraph dense = star(sparse.node_count, sparse.aspect_node, rels);
  std::vector<double> wp = position_weights(sparse.node_count, sparse.aspect_node);
  auto m_c = rand_t(sparse.node_count, 6, rng);

  ParameterStore<double> store(83);
  DsgConfig cfg;
  DsgWeights<double> w = make_dsg(store, cfg);
  DsgResult<double> full = dsg_run(m_c, sparse, dense, wp, cfg, w);
  CHECK(full.r_a_tilde.cols() == 6);
  CHECK(full.fused.rows() == sparse.node_count);
  CHECK(full.fused.value().row(sparse.aspect_node) == full.r_a_tilde.value().row(0));

  // M4: no relational branch
  ParameterStore<double> store4(83);
  DsgConfig cfg4;
  cfg4.use_relational = false;
  DsgWeights<double> w4 = [&] {
    cfg4.d_e = 6;
    cfg4.gcn_layers = 2;
    cfg4.rel_heads = 2;
    cfg4.d_r = 3;
    cfg4.relation_vocab_size = 6;
    return register_dsg(store4, cfg4);
  }();
  CHECK_FALSE(store4.contains("dsg.rel_emb"));
  DsgResult<double> no_rel = dsg_run(m_c, sparse, dense, wp, cfg4, w4);
  CHECK(no_rel.r_a_tilde.value() != full.r_a_tilde.value());

  // M5: no gcn branch
  ParameterStore<double> store5(83);
  DsgConfig cfg5;
  cfg5.use_pgcn = false;
  cfg5.d_e = 6;
  cfg5.gcn_layers = 2;
  cfg5.rel_heads = 2;
  cfg5.d_r = 3;
  cfg5.relation_vocab_size = 6;
  DsgWeights<double> w5 = register_dsg(store5, cfg5);
  CHECK_FALSE(store5.contains("dsg.gcn0.w"));
  DsgResult<double> no_gcn = dsg_run(m_c, sparse, dense, wp, cfg5, w5);
  CHECK(no_gcn.r_a_tilde.value() != full.r_a_tilde.value());
  CHECK(no_gcn.r_a_tilde.value() != no_rel.r_a_tilde.value());
}

TEST_CASE("permutation equivariance of the pgcn and invariance of the relational aspect row") {
  std::mt19937 rng(28);
  const int n = 6, d = 4;
  DependencyParse parse = random_tree(n, rng);
  SparseGraph g = build_sparse(parse, {2, 3});  // single-token aspect at 2
  std::vector<double> wp = position_weights(g.node_count, g.aspect_node);
  auto h = rand_t(g.node_count, d, rng);
  auto w = rand_t(d, d, rng);
  auto b = rand_t(1, d, rng);
  Tensor<double> base = pgcn_layer(h, g, wp, w, b);

  // permutation that fixes the aspect node
  std::vector<int> perm(static_cast<size_t>(g.node_count));
  for (int i = 0; i < g.node_count; ++i) perm[static_cast<size_t>(i)] = i;
  std::swap(perm[0], perm[4]);  // swap two non-aspect nodes
  std::swap(perm[1], perm[5]);

  SparseGraph pg;
  pg.node_count = g.node_count;
  pg.aspect_node = perm[static_cast<size_t>(g.aspect_node)];
  pg.adjacency.assign(static_cast<size_t>(g.node_count), {});
  for (int i = 0; i < g.node_count; ++i)
    for (int j : g.adjacency[static_cast<size_t>(i)])
      pg.adjacency[static_cast<size_t>(perm[static_cast<size_t>(i)])].push_back(
          perm[static_cast<size_t>(j)]);
  pg.degrees.resize(static_cast<size_t>(g.node_count));
  for (int i = 0; i < g.node_count; ++i) {
    auto& adj = pg.adjacency[static_cast<size_t>(i)];
    std::sort(adj.begin(), adj.end());
    pg.degrees[static_cast<size_t>(i)] = static_cast<int>(adj.size());
  }
  Mat<double> ph_m(g.node_count, d);
  std::vector<double> pwp(static_cast<size_t>(g.node_count));
  for (int i = 0; i < g.node_count; ++i) {
    ph_m.row(perm[static_cast<size_t>(i)]) = h.value().row(i);
    pwp[static_cast<size_t>(perm[static_cast<size_t>(i)])] = wp[static_cast<size_t>(i)];
  }
  Tensor<double> permuted = pgcn_layer(Tensor<double>::from_matrix(ph_m), pg, pwp, w, b);
  for (int i = 0; i < g.node_count; ++i)
    CHECK((permuted.value().row(perm[static_cast<size_t>(i)]) - base.value().row(i))
              .cwiseAbs()
              .maxCoeff() < 1e-12);

  // relational aspect row is invariant when relations permute consistently
  std::uniform_int_distribution<int> rel_dist(0, 4);
  std::vector<int> rels;
  for (int i = 0; i + 1 < g.node_count; ++i) rels.push_back(rel_dist(rng));
  DenseGraph dg = star(g.node_count, g.aspect_node, rels);
  auto rel_emb = rand_t(5, 3, rng);
  std::vector<DsgWeights<double>::RelHead> heads;
  heads.push_back({rand_t(d, d, rng), rand_t(3, 3, rng), rand_t(1, 3, rng), rand_t(3, 1, rng),
                   rand_t(1, 1, rng)});
  RelationalResult<double> r1 = relational_mha(h, dg, rel_emb, heads);

  DenseGraph pdg;
  pdg.node_count = g.node_count;
  pdg.aspect_node = pg.aspect_node;
  pdg.relation_ids.assign(static_cast<size_t>(g.node_count), -1);
  for (int i = 0; i < g.node_count; ++i)
    if (i != dg.aspect_node)
      pdg.relation_ids[static_cast<size_t>(perm[static_cast<size_t>(i)])] =
          dg.relation_ids[static_cast<size_t>(i)];
  RelationalResult<double> r2 =
      relational_mha(Tensor<double>::from_matrix(ph_m), pdg, rel_emb, heads);
  CHECK((r1.out.value().row(dg.aspect_node) - r2.out.value().row(pdg.aspect_node))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("dsg parameters receive finite-difference-validated gradients") {
  std::mt19937 rng(29);
  const int n = 4;
  DependencyParse parse = random_tree(n, rng);
  SparseGraph sparse = build_sparse(parse, {1, 2});
  std::uniform_int_distribution<int> rel_dist(0, 5);
  std::vector<int> rels;
  for (int i = 0; i + 1 < sparse.node_count; ++i) rels.push_back(rel_dist(rng));
  DenseGraph dense = star(sparse.node_count, sparse.aspect_node, rels);
  std::vector<double> wp = position_weights(sparse.node_count, sparse.aspect_node);
  auto m_c = rand_t(sparse.node_count, 6, rng);

  ParameterStore<double> store(91);
  DsgConfig cfg;
  DsgWeights<double> w = make_dsg(store, cfg);
  std::vector<Tensor<double>> inputs;
  for (auto& p : store.all()) inputs.push_back(p.tensor);
  auto builder = [&] { return dsg_run(m_c, sparse, dense, wp, cfg, w).fused; };
  CHECK(kagrmn::testing::max_grad_error(builder, inputs, rng) < 1e-5);
}
