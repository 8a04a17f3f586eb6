#include <doctest.h>

#include <cmath>

#include "caps/caps_lstm.hpp"
#include "caps/error.hpp"
#include "caps/trainer.hpp"
#include "model_helpers.hpp"
#include "oracles.hpp"

using namespace caps;
using caps::num::Matrix;
using caps::num::Vector;
using caps::test::random_sequence;

namespace {

ModelConfig small(int pois = 6, int emb = 4, int hidden = 5) {
  ModelConfig c;
  c.kind = ModelKind::caps_lstm;
  c.num_pois = pois;
  c.embedding = emb;
  c.hidden = hidden;
  return c;
}

std::vector<double> random_vec(num::Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("neutral context reduces caps-lstm to the textbook lstm") {
  num::Rng rng(21);
  LstmModel m(small(8, 4, 6), 3);
  test::randomize(m.params(), rng);
  const auto& b = m.blocks();
  for (std::size_t blk : {b.w_ci, b.w_cf, b.w_co, b.p_a, b.w_feat, b.g}) {
    m.params()[blk] = Matrix(m.params()[blk].rows(), m.params()[blk].cols(), 0.0);
  }
  m.params()[b.b_a] = Matrix(6, 1, 40.0);
  RecurrentState s = m.initial_state();
  Vector c(6, 0.0), h(6, 0.0);
  for (int t = 0; t < 1000; ++t) {
    if (t % 25 == 0) {
      s = m.initial_state();
      c.assign(6, 0.0);
      h.assign(6, 0.0);
    }
    const int poi = static_cast<int>(rng.index(8));
    const Vector got = m.step(s, poi, random_vec(rng, kAttributeDim), random_vec(rng, kFeatureDim));
    const Vector want = test::textbook_lstm_step(m.params(), c, h, poi);
    CHECK(got == want);
    CHECK(s.v[0] == c);
    CHECK(s.v[1] == h);
  }
}

TEST_CASE("hand computed caps-lstm step") {
  ModelConfig cfg = small(4, 2, 3);
  cfg.attr_dim = 2;
  cfg.feature_dim = 1;
  LstmModel m(cfg);
  auto& p = m.params();
  const auto& b = m.blocks();
  p[b.emb](1, 0) = 1.0;
  p[b.emb](1, 1) = 2.0;
  p[b.w_x] = Matrix(12, 2, {1, 0, 1, 0, 1, 0,     //
                            0, 1, 0, 1, 0, 1,     //
                            1, -1, 1, -1, 1, -1,  //
                            0, 0, 0, 0, 0, 0});
  for (std::size_t j = 0; j < 3; ++j) p[b.w_h](j, j) = 1.0;
  p[b.w_ci] = Matrix(3, 1, 0.1);
  p[b.w_co] = Matrix(3, 1, 1.0);
  p[b.w_feat] = Matrix(3, 1, {1, 0, -1});
  for (std::size_t j = 3; j < 6; ++j) p[b.b](j, 0) = 1.0;
  p[b.v] = Matrix(4, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1});
  p[b.g] = Matrix(4, 1, {0, 0, 0, 1});

  const Vector c_prev{0.5, -1.0, 2.0}, h_prev{1.0, 1.0, 1.0};
  const std::vector<double> attr{0.4, 0.6}, feat{0.5};
  const auto s = m.forward(c_prev, h_prev, 1, attr, feat);

  // gate = 0.5 everywhere, so hg = 0.5
  const Vector pi{2.05, 1.4, 1.2}, pf{3.5, 3.0, 2.5}, pz{-0.5, -1.0, -1.5}, po{1.0, -1.0, 1.5};
  for (std::size_t j = 0; j < 3; ++j) {
    CAPTURE(j);
    const double i = test::logistic(pi[j]), f = test::logistic(pf[j]), z = std::tanh(pz[j]),
                 o = test::logistic(po[j]);
    const double c = f * c_prev[j] + i * z;
    const double h = o * std::tanh(c);
    CHECK(s.hg[j] == 0.5);
    CHECK(s.i[j] == doctest::Approx(i).epsilon(1e-14));
    CHECK(s.f[j] == doctest::Approx(f).epsilon(1e-14));
    CHECK(s.z[j] == doctest::Approx(z).epsilon(1e-14));
    CHECK(s.o[j] == doctest::Approx(o).epsilon(1e-14));
    CHECK(s.c[j] == doctest::Approx(c).epsilon(1e-14));
    CHECK(s.h[j] == doctest::Approx(h).epsilon(1e-14));
    CHECK(s.logits[j] == doctest::Approx(h).epsilon(1e-14));
  }
  CHECK(s.logits[3] == doctest::Approx(s.h[0] + s.h[1] + s.h[2] + 0.5).epsilon(1e-14));
}

TEST_CASE("saturated forget and input gates carry the cell unchanged") {
  num::Rng rng(5);
  LstmModel m(small(), 2);
  test::randomize(m.params(), rng);
  auto& p = m.params();
  const auto& b = m.blocks();
  for (std::size_t j = 0; j < 5; ++j) {
    p[b.b](j, 0) = -800.0;
    p[b.b](5 + j, 0) = 40.0;
  }
  p[b.w_ci] = Matrix(5, 1, 0.0);
  p[b.w_cf] = Matrix(5, 1, 0.0);
  const Vector c0 = random_vec(rng, 5, -3, 3);
  Vector c = c0, h = random_vec(rng, 5, -1, 1);
  for (int t = 0; t < 100; ++t) {
    const auto s = m.forward(c, h, static_cast<int>(rng.index(6)), random_vec(rng, kAttributeDim),
                             random_vec(rng, kFeatureDim));
    c = s.c;
    h = s.h;
  }
  CHECK(c == c0);
}

TEST_CASE("gate ranges and cell growth bound") {
  num::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    LstmModel m(small(), static_cast<std::uint64_t>(trial));
    test::randomize(m.params(), rng, 1.0);
    Vector c(5, 0.0), h(5, 0.0);
    for (int t = 1; t <= 25; ++t) {
      const auto s = m.forward(c, h, static_cast<int>(rng.index(6)), random_vec(rng, kAttributeDim),
                               random_vec(rng, kFeatureDim));
      for (std::size_t j = 0; j < 5; ++j) {
        for (double g : {s.i[j], s.f[j], s.o[j], s.gate[j]}) {
          CHECK(g > 0.0);
          CHECK(g < 1.0);
        }
        CHECK(std::abs(s.z[j]) <= 1.0);
        CHECK(std::abs(s.c[j]) <= static_cast<double>(t));
        CHECK(std::abs(s.h[j]) <= 1.0);
      }
      c = s.c;
      h = s.h;
    }
  }
}

TEST_CASE("zero lstm is uniform") {
  LstmModel m(small(8));
  num::Rng rng(1);
  const auto seq = random_sequence(rng, 8, 6);
  const auto s = m.forward(Vector(5, 0.0), Vector(5, 0.0), 0, seq.attrs[0], seq.feature);
  for (double q : s.probs) CHECK(q == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(m.sequence_nll(seq) == doctest::Approx(5 * std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("forget bias starts open") {
  LstmModel m(small(), 4);
  const auto& b = m.blocks();
  for (std::size_t j = 0; j < 5; ++j) CHECK(m.params()[b.b](5 + j, 0) > 0.0);
}

TEST_CASE("lstm gradients match finite differences") {
  for (std::size_t len : {2u, 4u, 26u}) {
    CAPTURE(len);
    num::Rng rng(len * 13);
    LstmModel m(small(), 31);
    test::randomize(m.params(), rng, 0.4);
    const std::vector<TrainingSequence> data{random_sequence(rng, 6, len)};
    const auto r = test::check_model_grads(m, data);
    for (const auto& [name, err] : r.per_block) {
      CAPTURE(name);
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("zero feature vector leaves feature weights without gradient") {
  num::Rng rng(3);
  LstmModel m(small(), 2);
  test::randomize(m.params(), rng);
  auto seq = random_sequence(rng, 6, 7);
  seq.feature.fill(0.0);
  const auto g = test::analytic_grads(m, {seq});
  CHECK(g[m.blocks().g] == Matrix(6, kFeatureDim, 0.0));
  CHECK(g[m.blocks().w_feat] == Matrix(5, kFeatureDim, 0.0));
}

TEST_CASE("lstm overfits a tiny corpus") {
  num::Rng rng(9);
  std::vector<TrainingSequence> data;
  for (int i = 0; i < 3; ++i) data.push_back(random_sequence(rng, 6, 6));
  auto m = make_model(small(), 1);
  num::SgdConfig cfg;
  cfg.epochs = 300;
  cfg.batch_size = 3;
  cfg.learning_rate = 0.05;
  const auto r = train(*m, data, cfg, 2);
  CHECK(r.loss_curve.back() < 0.05 * r.loss_curve.front());
}

TEST_CASE("lstm rejects bad shapes") {
  LstmModel m(small(), 1);
  CHECK_THROWS_AS(m.forward(Vector(5), Vector(5), 0, std::vector<double>(2), std::vector<double>(7)),
                  ShapeError);
  CHECK_THROWS_AS(LstmModel(ModelConfig{.kind = ModelKind::caps_rnn, .num_pois = 3}),
                  std::invalid_argument);
}
