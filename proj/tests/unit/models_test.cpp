//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "subcount/models.hpp"
#include "test_util.hpp"

namespace subcount {
namespace {

using nk::ParamStore;
using nk::PoolMode;
using nk::Tape;
using nk::Var;
using testing::random_connected;
using testing::random_graph;
using testing::random_perm;

ModelConfig small_config(Representation r, Interaction i) {
  ModelConfig c;
  c.representation = r;
  c.interaction = i;
  c.hidden = 8;
  c.heads = 2;
  c.blocks = 2;
  c.memory = 4;
  c.steps = 2;
  c.dropout = 0.0;
  c.encoding = {2, 16, 4, 4};
  return c;
}

const Representation kReps[] = {Representation::kCnn, Representation::kRgcn, Representation::kRgin};
const Interaction kInters[] = {Interaction::kSumPool, Interaction::kMeanPool, Interaction::kMaxPool,
                               Interaction::kMemAttn, Interaction::kDiamNet};

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& x : m.data) x = 2.0 * rng.uniform() - 1.0;
  return m;
}

/// Pattern and graph long enough to keep several rows after the CNN stack,
/// which shortens sequences by 12.
std::pair<Graph, Graph> random_pair(Rng& rng) {
  const Graph p = random_connected(rng, 8, 14, 4, 4);
  Graph g = random_graph(rng, 10, 24, 4, 4);
  return {p, g};
}

template <class F>
ModelErrc error_of(F&& f) {
  try {
    f();
  } catch (const ModelError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ModelErrc::kBadConfig;
}

double leaky(double x) { return x < 0 ? 0.01 * x : x; }

TEST(ModelConfig, FormatParseRoundTrip) {
  ModelConfig c = small_config(Representation::kRgcn, Interaction::kMemAttn);
  c.dropout = 0.125;
  c.shared = false;
  c.mem_init = PoolMode::kMax;
  EXPECT_EQ(parse_model_config(format_model_config(c)), c);
  EXPECT_EQ(parse_model_config(format_model_config(ModelConfig{})), ModelConfig{});
}

TEST(ModelConfig, Rejects) {
  EXPECT_EQ(error_of([] { parse_model_config("colour = red\n"); }), ModelErrc::kBadConfig);
  EXPECT_EQ(error_of([] { parse_model_config("hidden = -3\n"); }), ModelErrc::kBadConfig);
  EXPECT_EQ(error_of([] { parse_model_config("hidden = 10\nheads = 4\n"); }), ModelErrc::kBadConfig);
  EXPECT_EQ(error_of([] { parse_model_config("representation = LSTM\n"); }), ModelErrc::kBadConfig);
  EXPECT_EQ(error_of([] { parse_model_config("interaction = MemAttn\nsteps = 0\n"); }),
            ModelErrc::kBadConfig);
  const ModelConfig c = parse_model_config("# comment\n\nhidden = 32  # inline\nmemory=2\n");
  EXPECT_EQ(c.hidden, 32u);
  EXPECT_EQ(c.memory, 2u);
}

TEST(FilterNet, ZeroGateWeightsHalveRows) {
  Rng rng(1);
  ParamStore s;
  s.add_glorot("filter.wg", 6, 6, rng);
  s.add_zeros("filter.wf", 1, 6);
  Tape t;
  const Matrix g = random_matrix(rng, 5, 6);
  const Var out = filter_net(t, s, t.constant(random_matrix(rng, 3, 6)), {}, t.constant(g), {});
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(out.value().data[i], 0.5 * g.data[i]);
}

TEST(FilterNet, GatesStrictlyInsideUnitInterval) {
  Rng rng(2);
  ParamStore s;
  s.add_glorot("filter.wg", 6, 6, rng);
  s.add_glorot("filter.wf", 1, 6, rng);
  for (int trial = 0; trial < 50; ++trial) {
    Tape t;
    Matrix g(4, 6, 1.0);
    const Var out = filter_net(t, s, t.constant(random_matrix(rng, 3, 6)), {}, t.constant(g), {});
    for (double v : out.value().data) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(FilterNet, MatchesHandComputation) {
  Rng rng(3);
  ParamStore s;
  s.add_glorot("filter.wg", 4, 4, rng);
  s.add_glorot("filter.wf", 1, 4, rng);
  const Matrix p = random_matrix(rng, 3, 4);
  const Matrix g = random_matrix(rng, 2, 4);
  Tape t;
  const Matrix out = filter_net(t, s, t.constant(p), {}, t.constant(g), {}).value();
  const Matrix& wg = s.at("filter.wg").value;
  const Matrix& wf = s.at("filter.wf").value;
  for (std::size_t i = 0; i < 2; ++i) {
    double z = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      double pmax = p(0, a);
      for (std::size_t r = 1; r < 3; ++r) pmax = std::max(pmax, p(r, a));
      double ghat = 0.0;
      for (std::size_t b = 0; b < 4; ++b) ghat += g(i, b) * wg(a, b);
      z += wf(0, a) * ghat * pmax;
    }
    const double f = 1.0 / (1.0 + std::exp(-z));
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(out(i, j), f * g(i, j), 1e-12);
  }
}

TEST(Cnn, OutputWidthAndLength) {
  ModelConfig c = small_config(Representation::kCnn, Interaction::kSumPool);
  Model m(c, 1);
  Tape t;
  Rng rng(4);
  const Var x = t.constant(random_matrix(rng, 20, c.hidden));
  const Rep r = cnn_represent(t, m.params(), c, "rep", x, 20, {});
  EXPECT_EQ(r.rows.cols(), c.hidden);
  // Each layer with kernel k removes 2(k-1) rows: 20 - 2 - 4 - 6.
  EXPECT_EQ(r.rows.rows(), 8u);
  EXPECT_EQ(r.valid, 8u);
  const Rep shortr = cnn_represent(t, m.params(), c, "rep", t.constant(random_matrix(rng, 2, 8)), 2, {});
  EXPECT_EQ(shortr.valid, 1u);
  EXPECT_EQ(error_of([&] { cnn_represent(t, m.params(), c, "rep", t.constant(Matrix(0, 8)), 0, {}); }),
            ModelErrc::kEmptySequence);
}

TEST(Cnn, DefaultWidth) {
  ModelConfig c;
  c.representation = Representation::kCnn;
  c.encoding = {2, 16, 4, 4};
  Model m(c, 1);
  Tape t;
  Rng rng(5);
  EXPECT_EQ(cnn_represent(t, m.params(), c, "rep", t.constant(random_matrix(rng, 14, 128)), 14, {})
                .rows.cols(),
            128u);
}

/// Plain-loop evaluation of the representation stack for an edgeless graph.
Matrix edgeless_oracle(const ModelConfig& c, const ParamStore& s, Matrix h) {
  const std::size_t d = c.hidden;
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string lp = "rep.l" + std::to_string(l);
    const Matrix& w = s.at(lp + ".self").value;
    const Matrix& b = s.at(lp + ".b").value;
    Matrix next = h;
    for (std::size_t i = 0; i < h.rows; ++i) {
      std::vector<double> u(d);
      for (std::size_t o = 0; o < d; ++o) {
        u[o] = b(0, o);
        for (std::size_t q = 0; q < d; ++q) u[o] += w(o, q) * h(i, q);
        u[o] = leaky(u[o]);
      }
      if (c.representation == Representation::kRgin) {
        for (const char* mlp : {".mlp1", ".mlp2"}) {
          const Matrix& mw = s.at(lp + mlp + ".w").value;
          const Matrix& mb = s.at(lp + mlp + ".b").value;
          std::vector<double> v(d);
          for (std::size_t o = 0; o < d; ++o) {
            v[o] = mb(0, o);
            for (std::size_t q = 0; q < d; ++q) v[o] += mw(o, q) * u[q];
            v[o] = leaky(v[o]);
          }
          u = v;
        }
      }
      for (std::size_t o = 0; o < d; ++o) next(i, o) = h(i, o) + u[o];
    }
    h = next;
  }
  return h;
}

TEST(Rgcn, NoEdgesUsesOnlySelfTransform) {
  for (Representation r : {Representation::kRgcn, Representation::kRgin}) {
    const ModelConfig c = small_config(r, Interaction::kSumPool);
    Model m(c, 6);
    Rng rng(7);
    ModelInput in;
    in.features = random_matrix(rng, 5, c.hidden);
    in.relations.resize(4);
    in.vertex_count = in.valid_rows = 5;
    Tape t;
    const Rep out = rgcn_represent(t, m.params(), c, "rep", t.constant(in.features), in, {});
    const Matrix want = edgeless_oracle(c, m.params(), in.features);
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(out.rows.value().data[i], want.data[i], 1e-12);
  }
}

TEST(Rgcn, PermutationEquivariant) {
  Rng rng(8);
  for (Representation r : {Representation::kRgcn, Representation::kRgin}) {
    const ModelConfig c = small_config(r, Interaction::kSumPool);
    Model m(c, 9);
    for (int trial = 0; trial < 20; ++trial) {
      const Graph g = random_graph(rng, 8, 20, 4, 4);
      const auto perm = random_perm(rng, g);
      const Graph h = remap_vertex_ids(g, perm);
      const ModelInput ig = encode_input(g, c);
      const ModelInput ih = encode_input(h, c);
      Tape t;
      const Matrix& x = ig.features;
      Matrix y(x.rows, c.hidden);
      Matrix xin(x.rows, c.hidden);
      // Random vertex features, permuted consistently.
      for (double& v : xin.data) v = 2.0 * rng.uniform() - 1.0;
      Matrix yin(x.rows, c.hidden);
      for (std::size_t i = 0; i < g.vertex_count(); ++i) {
        const std::size_t j = h.index_of(perm.at(g.vertices()[i].id));
        for (std::size_t q = 0; q < c.hidden; ++q) yin(j, q) = xin(i, q);
      }
      const Matrix a = rgcn_represent(t, m.params(), c, "rep", t.constant(xin), ig, {}).rows.value();
      const Matrix b = rgcn_represent(t, m.params(), c, "rep", t.constant(yin), ih, {}).rows.value();
      for (std::size_t i = 0; i < g.vertex_count(); ++i) {
        const std::size_t j = h.index_of(perm.at(g.vertices()[i].id));
        for (std::size_t q = 0; q < c.hidden; ++q) EXPECT_NEAR(a(i, q), b(j, q), 1e-12);
      }
    }
  }
}

TEST(Rgin, SeparatesDifferentInMultisets) {
  // Vertices 3 and 4 share a label; 3 receives one edge, 4 receives two from
  // identically labelled sources. Mean aggregation cannot tell them apart, sum can.
  const Graph g = build_graph({{0, 1}, {1, 1}, {2, 1}, {3, 0}, {4, 0}},
                              {{0, 3, 0}, {1, 4, 0}, {2, 4, 0}}, 4, 4);
  for (Representation r : {Representation::kRgcn, Representation::kRgin}) {
    const ModelConfig c = small_config(r, Interaction::kSumPool);
    Model m(c, 10);
    const ModelInput in = encode_input(g, c);
    Tape t;
    const Var x = nk::dense(t.constant(in.features), t.param(m.params(), "in.graph.w"),
                            t.param(m.params(), "in.graph.b"));
    const Matrix out = rgcn_represent(t, m.params(), c, "rep", x, in, {}).rows.value();
    double diff = 0.0;
    for (std::size_t q = 0; q < c.hidden; ++q) diff = std::max(diff, std::abs(out(3, q) - out(4, q)));
    if (r == Representation::kRgin)
      EXPECT_GT(diff, 1e-6);
    else
      EXPECT_LT(diff, 1e-12);
  }
}

TEST(Rgcn, UnknownRelationLabel) {
  const ModelConfig c = small_config(Representation::kRgcn, Interaction::kSumPool);
  Model m(c, 11);
  ModelInput in;
  in.features = Matrix(2, c.hidden, 0.1);
  in.relations.resize(6);
  in.relations[5].push_back({0, 1});
  in.valid_rows = 2;
  Tape t;
  EXPECT_EQ(error_of([&] { rgcn_represent(t, m.params(), c, "rep", t.constant(in.features), in, {}); }),
            ModelErrc::kUnknownRelationLabel);
}

TEST(MemInit, StridedWindows) {
  Tape t;
  Matrix rows(10, 1);
  for (std::size_t i = 0; i < 10; ++i) rows.data[i] = static_cast<double>(i * i);
  const Matrix m = mem_init(t.constant(rows), 10, 4, PoolMode::kMean).value();
  // s = 2, k = 4: windows start at 0, 2, 4, 6.
  for (std::size_t b = 0; b < 4; ++b) {
    double want = 0.0;
    for (std::size_t i = 2 * b; i < 2 * b + 4; ++i) want += rows.data[i];
    EXPECT_DOUBLE_EQ(m.data[b], want / 4.0);
  }
}

TEST(MemInit, IdentityAndDegenerate) {
  Rng rng(12);
  Tape t;
  const Matrix rows = random_matrix(rng, 4, 3);
  EXPECT_EQ(mem_init(t.constant(rows), 4, 4, PoolMode::kMean).value(), rows);
  const Matrix three = random_matrix(rng, 3, 2);
  const Matrix m = mem_init(t.constant(three), 3, 4, PoolMode::kMean).value();
  for (std::size_t b = 0; b < 4; ++b)
    for (std::size_t j = 0; j < 2; ++j)
      EXPECT_NEAR(m(b, j), (three(0, j) + three(1, j) + three(2, j)) / 3.0, 1e-15);
  const Matrix mx = mem_init(t.constant(rows), 4, 2, PoolMode::kMax).value();
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(mx(0, j), std::max(rows(0, j), rows(1, j)));
}

TEST(PoolInteract, Blocks) {
  Rng rng(13);
  Tape t;
  const Matrix rows = random_matrix(rng, 3, 4);
  const Var sizes = t.constant(Matrix(1, 4, {1, 2, 3, 4}));
  const Matrix f = pool_interact(t, {t.constant(rows), 3}, {t.constant(rows), 3}, sizes, PoolMode::kSum).value();
  ASSERT_EQ(f.cols, 20u);
  for (std::size_t j = 8; j < 12; ++j) EXPECT_EQ(f.data[j], 0.0);
  EXPECT_EQ(f.data[16], 1.0);
  const Matrix constant(5, 4, 0.3);
  const Matrix mean = pool_interact(t, {t.constant(constant), 5}, {t.constant(rows), 3}, sizes,
                                    PoolMode::kMean).value();
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(mean.data[j], 0.3, 1e-15);
  Matrix padded(6, 4, 0.3);
  for (std::size_t j = 0; j < 4; ++j) padded(5, j) = 100.0;
  const Matrix masked = pool_interact(t, {t.constant(padded), 5}, {t.constant(rows), 3}, sizes,
                                      PoolMode::kMax).value();
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(masked.data[j], 0.3);
}

struct Reps {
  Rep pattern, graph;
};

Reps random_reps(Tape& t, Rng& rng, std::size_t d, std::size_t lp, std::size_t lg) {
  return {{t.constant(random_matrix(rng, lp, d)), lp}, {t.constant(random_matrix(rng, lg, d)), lg}};
}

TEST(Diamnet, ZeroStepsReturnsInitialMemory) {
  ModelConfig c = small_config(Representation::kRgin, Interaction::kDiamNet);
  c.steps = 0;
  Model m(c, 14);
  Rng rng(15);
  Tape t;
  const Reps r = random_reps(t, rng, c.hidden, 3, 9);
  EXPECT_EQ(diamnet_interact(t, m.params(), c, r.pattern, r.graph, {}).value(),
            mem_init(r.graph.rows, 9, 4, PoolMode::kMean).value());
}

TEST(Diamnet, SaturatedGatesKeepMemory) {
  const ModelConfig c = small_config(Representation::kRgin, Interaction::kDiamNet);
  Model m(c, 16);
  Rng rng(17);
  Tape t;
  const Reps r = random_reps(t, rng, c.hidden, 3, 9);
  ForwardOptions o;
  o.force_gates = 1.0;
  EXPECT_EQ(diamnet_interact(t, m.params(), c, r.pattern, r.graph, o).value(),
            mem_init(r.graph.rows, 9, 4, PoolMode::kMean).value());
}

TEST(Diamnet, ClosedGatesTakeAttentionOutput) {
  // With both gates at 0 one step is memory <- attend(attend(memory, P), G).
  ModelConfig c = small_config(Representation::kRgin, Interaction::kDiamNet);
  c.steps = 1;
  Model m(c, 18);
  Rng rng(19);
  Tape t;
  const Reps r = random_reps(t, rng, c.hidden, 3, 9);
  ForwardOptions o;
  o.force_gates = 0.0;
  const Matrix got = diamnet_interact(t, m.params(), c, r.pattern, r.graph, o).value();
  const nk::MultiHeadAttention a1("diamnet.att1", 8, 2), a2("diamnet.att2", 8, 2);
  const Var mem0 = mem_init(r.graph.rows, 9, 4, PoolMode::kMean);
  const Var s = a1.forward(t, m.params(), mem0, r.pattern.rows, r.pattern.rows);
  const Matrix want = a2.forward(t, m.params(), s, r.graph.rows, r.graph.rows).value();
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got.data[i], want.data[i], 1e-12);
}

TEST(Diamnet, ScoreCountLinearInGraphLength) {
  const ModelConfig c = small_config(Representation::kRgin, Interaction::kDiamNet);
  Model m(c, 20);
  Rng rng(21);
  for (std::size_t lg : {64u, 128u, 256u}) {
    Tape t;
    const Reps r = random_reps(t, rng, c.hidden, 5, lg);
    nk::reset_attention_score_count();
    diamnet_interact(t, m.params(), c, r.pattern, r.graph, {});
    EXPECT_EQ(nk::attention_score_count(), c.steps * c.heads * c.memory * (5 + lg));
  }
}

TEST(MemAttn, SaturatedGatesKeepGraphRows) {
  const ModelConfig c = small_config(Representation::kRgin, Interaction::kMemAttn);
  Model m(c, 22);
  Rng rng(23);
  Tape t;
  const Reps r = random_reps(t, rng, c.hidden, 3, 9);
  ForwardOptions o;
  o.force_gates = 1.0;
  EXPECT_EQ(memattn_interact(t, m.params(), c, r.pattern, r.graph, o).value(), r.graph.rows.value());
}

TEST(MemAttn, FullLengthMemoryAttendsRowsDirectly) {
  ModelConfig c = small_config(Representation::kRgin, Interaction::kMemAttn);
  c.memory = 5;
  c.steps = 1;
  Model m(c, 24);
  Rng rng(25);
  Tape t;
  const Reps r = random_reps(t, rng, c.hidden, 5, 5);
  const Matrix got = memattn_interact(t, m.params(), c, r.pattern, r.graph, {}).value();

  // Same step written against the un-pooled rows.
  ParamStore& s = m.params();
  const nk::MultiHeadAttention a1("memattn.att1", 8, 2), a2("memattn.att2", 8, 2);
  auto gate = [&](const char* u, const char* v, Var a, Var b) {
    return nk::sigmoid(nk::add(nk::dense(a, t.param(s, u)), nk::dense(b, t.param(s, v))));
  };
  auto blend = [](Var z, Var a, Var b) { return nk::add(nk::mul(z, a), nk::mul(nk::one_minus(z), b)); };
  const Var g = r.graph.rows;
  const Var sp = a1.forward(t, s, g, r.pattern.rows, r.pattern.rows);
  const Var sbar = blend(gate("memattn.up", "memattn.vp", g, sp), g, sp);
  const Var ss = a2.forward(t, s, sbar, sbar, sbar);
  const Matrix want = blend(gate("memattn.us", "memattn.vs", sbar, ss), sbar, ss).value();
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got.data[i], want.data[i], 1e-12);
}

TEST(Head, ZeroWeightsGiveBias) {
  ParamStore s;
  s.add_zeros("head.l1.w", 4, 10);
  s.add_zeros("head.l1.b", 1, 4);
  s.add_zeros("head.l2.w", 1, 4);
  s.add("head.l2.b", Matrix(1, 1, 2.5));
  Rng rng(26);
  Tape t;
  EXPECT_EQ(predict_head(t, s, t.constant(random_matrix(rng, 1, 10))).value().data[0], 2.5);
}

TEST(Model, DeterministicAndEveryParameterLearns) {
  Rng rng(27);
  for (Representation r : kReps)
    for (Interaction i : kInters) {
      const ModelConfig c = small_config(r, i);
      Model m(c, 28);
      const auto [p, g] = random_pair(rng);
      const ModelInput ip = encode_input(p, c), ig = encode_input(g, c);
      EXPECT_EQ(m.predict(ip, ig), m.predict(ip, ig));
      m.params().zero_grad();
      Tape t;
      t.backward(m.forward(t, ip, ig));
      for (const auto& [name, prm] : m.params().params()) {
        double norm = 0.0;
        for (double x : prm.grad.data) norm += x * x;
        EXPECT_TRUE(prm.has_grad && norm > 0.0)
            << to_string(r) << "+" << to_string(i) << " dead parameter " << name;
      }
    }
}

TEST(Model, PaddingIsInert) {
  Rng rng(29);
  for (Representation r : kReps)
    for (Interaction i : kInters) {
      const ModelConfig c = small_config(r, i);
      Model m(c, 30);
      for (int trial = 0; trial < 3; ++trial) {
        const auto [p, g] = random_pair(rng);
        const ModelInput ip = encode_input(p, c), ig = encode_input(g, c);
        const double base = m.predict(ip, ig);
        const double padded = m.predict(pad_input(ip, ip.features.rows + 7),
                                        pad_input(ig, ig.features.rows + 1 + trial * 5));
        EXPECT_EQ(base, padded) << to_string(r) << "+" << to_string(i);
      }
    }
}

TEST(Model, InvariantUnderVertexRenumbering) {
  Rng rng(31);
  for (Representation r : kReps)
    for (Interaction i : kInters) {
      const ModelConfig c = small_config(r, i);
      Model m(c, 32);
      const auto [p, g] = random_pair(rng);
      const double a = m.predict(p, g);
      if (r == Representation::kCnn) {
        // Codes keep vertex ids, so sequence models are checked against a
        // reordered edge list instead.
        std::vector<Edge> es(g.edges().begin(), g.edges().end());
        std::reverse(es.begin(), es.end());
        const Graph h = build_graph({g.vertices().begin(), g.vertices().end()}, es, 4, 4);
        EXPECT_EQ(a, m.predict(p, h));
        continue;
      }
      const double b = m.predict(p, remap_vertex_ids(g, random_perm(rng, g)));
      if (i == Interaction::kMemAttn || i == Interaction::kDiamNet)
        // Memory windows follow vertex order, so only pooled heads are invariant.
        EXPECT_TRUE(std::isfinite(b));
      else
        EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(a))) << to_string(r) << "+" << to_string(i);
    }
}

TEST(Model, SharedRepresentationFlag) {
  ModelConfig c = small_config(Representation::kRgin, Interaction::kSumPool);
  Model shared(c, 33);
  EXPECT_TRUE(shared.params().contains("rep.l0.self"));
  EXPECT_FALSE(shared.params().contains("rep.graph.l0.self"));
  c.shared = false;
  Model split(c, 33);
  EXPECT_TRUE(split.params().contains("rep.pattern.l0.self"));
  EXPECT_TRUE(split.params().contains("rep.graph.l0.self"));
  // A pattern fed as both sides takes the same path when parameters are shared.
  Rng rng(34);
  const Graph p = random_connected(rng, 5, 2, 4, 4);
  const ModelConfig sc = small_config(Representation::kRgin, Interaction::kSumPool);
  Model m(sc, 35);
  const ModelInput in = encode_input(p, sc);
  Tape t;
  const Var x = t.constant(in.features);
  const Rep a = rgcn_represent(t, m.params(), sc, "rep", nk::dense(x, t.param(m.params(), "in.pattern.w"), t.param(m.params(), "in.pattern.b")), in, {});
  const Rep b = rgcn_represent(t, m.params(), sc, "rep", nk::dense(x, t.param(m.params(), "in.pattern.w"), t.param(m.params(), "in.pattern.b")), in, {});
  EXPECT_EQ(a.rows.value(), b.rows.value());
}

TEST(Model, EncodingExtensionKeepsOutputs) {
  Rng rng(36);
  const EncodingSpec to{2, 64, 16, 8};
  for (Representation r : kReps)
    for (Interaction i : {Interaction::kSumPool, Interaction::kDiamNet}) {
      const ModelConfig c = small_config(r, i);
      Model m(c, 37);
      const auto [p, g] = random_pair(rng);
      const ModelInput ip = encode_input(p, c), ig = encode_input(g, c);
      const double before = m.predict(ip, ig);
      m.extend_encoding(to);
      EXPECT_EQ(m.config().encoding, to);
      const auto layout = c.graph_view() ? EncodingLayout::kVertexLabel : EncodingLayout::kEdgeTuple;
      const double after = m.predict(extend_input(ip, c.encoding, to, layout),
                                     extend_input(ig, c.encoding, to, layout));
      EXPECT_EQ(before, after) << to_string(r) << "+" << to_string(i);
      // Fresh encodings under the wider spec match re-encoded ones.
      EXPECT_EQ(m.predict(p, g), after);
    }
}

TEST(Model, CheckpointRoundTrip) {
  Rng rng(38);
  const ModelConfig c = small_config(Representation::kRgin, Interaction::kDiamNet);
  Model m(c, 39);
  const auto [p, g] = random_pair(rng);
  Model back(parse_model_config(format_model_config(c)),
             nk::deserialize_params(nk::serialize_params(m.params())));
  EXPECT_EQ(m.predict(p, g), back.predict(p, g));
  ModelConfig wider = c;
  wider.hidden = 16;
  EXPECT_EQ(error_of([&] { Model(wider, nk::deserialize_params(nk::serialize_params(m.params()))); }),
            ModelErrc::kBadConfig);
}

TEST(Model, RejectsWrongInputWidth) {
  const ModelConfig c = small_config(Representation::kRgin, Interaction::kSumPool);
  Model m(c, 40);
  ModelInput in;
  in.features = Matrix(3, 5);
  in.valid_rows = 3;
  EXPECT_EQ(error_of([&] { m.predict(in, in); }), ModelErrc::kShapeMismatch);
}

// Gradient checks through each block.

TEST(ModelGradCheck, FilterNet) {
  Rng rng(41);
  ParamStore s;
  s.add_glorot("filter.wg", 6, 6, rng);
  s.add_glorot("filter.wf", 1, 6, rng);
  const Matrix p = random_matrix(rng, 3, 6), g = random_matrix(rng, 4, 6), w = random_matrix(rng, 4, 6);
  const auto rep = nk::grad_check_params(
      [&](Tape& t) {
        return nk::sum(nk::mul(filter_net(t, s, t.constant(p), {}, t.constant(g), {}), t.constant(w)));
      },
      s);
  EXPECT_TRUE(rep.pass) << rep.max_rel_error;
}

TEST(ModelGradCheck, EveryCombination) {
  Rng rng(42);
  for (Representation r : kReps)
    for (Interaction i : kInters) {
      const ModelConfig c = small_config(r, i);
      Model m(c, 43);
      const auto [p, g] = random_pair(rng);
      const ModelInput ip = encode_input(p, c), ig = encode_input(g, c);
      const auto rep = nk::grad_check_params(
          [&](Tape& t) { return m.forward(t, ip, ig); }, m.params(), 1e-6, 1e-5, 3, 44);
      EXPECT_TRUE(rep.pass) << to_string(r) << "+" << to_string(i) << " " << rep.max_rel_error;
    }
}

}  // namespace
}  // namespace subcount
