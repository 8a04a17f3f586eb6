#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "caps/seq_generation.hpp"
#include "caps/trainer.hpp"
#include "fixtures.hpp"
#include "model_helpers.hpp"

using namespace caps;
using caps::num::Vector;

namespace {

struct World {
  Dataset data;
  std::shared_ptr<FeatureTables> tables;
  std::shared_ptr<SequenceModel> model;
};

World make_world(std::uint64_t seed, ModelKind kind = ModelKind::caps_lstm) {
  World w;
  w.data = test::random_dataset(seed, 6, 12, 3, 120);
  w.tables = std::make_shared<FeatureTables>(build_feature_tables(w.data, w.data.sessions));
  ModelConfig c;
  c.kind = kind;
  c.num_pois = 12;
  c.embedding = 6;
  c.hidden = 8;
  c.layers = 2;
  w.model = make_model(c, seed);
  num::Rng rng(seed);
  test::randomize(w.model->params(), rng, 1.0);
  return w;
}

}  // namespace

TEST_CASE("sampling a degenerate distribution") {
  num::Rng rng(1);
  const Vector p{0.0, 0.0, 1.0, 0.0};
  for (int i = 0; i < 1000; ++i) CHECK(sample_next(p, rng) == 2);
}

TEST_CASE("sampling frequencies follow the distribution") {
  num::Rng rng(2);
  for (const Vector& p : {Vector{0.25, 0.25, 0.25, 0.25}, Vector{0.1, 0.2, 0.3, 0.4}}) {
    std::vector<int> counts(4, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[sample_next(p, rng)];
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(static_cast<double>(counts[k]) / n - p[k]) <= 0.01);
    }
  }
}

TEST_CASE("length one returns the start") {
  const World w = make_world(3);
  GenRequest r;
  r.start_poi = 4;
  r.start_hour = 9;
  r.length = 1;
  r.candidates = 3;
  const auto out = generate(*w.model, r, *w.tables, 1);
  REQUIRE(out.size() == 1);
  CHECK(out[0].pois == std::vector<int>{4});
  CHECK(out[0].hours == std::vector<int>{9});
}

TEST_CASE("all candidates come back ranked by score") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const World w = make_world(seed);
    GenRequest r;
    r.user = static_cast<int>(seed % 6);
    r.start_poi = static_cast<int>(seed % 12);
    r.start_hour = static_cast<int>(seed * 5 % 24);
    r.length = 6;
    r.candidates = 8;
    r.k = 8;
    const auto out = generate(*w.model, r, *w.tables, seed);
    REQUIRE(out.size() == 8);
    std::set<int> idx;
    for (std::size_t i = 0; i < out.size(); ++i) {
      idx.insert(out[i].index);
      double want = 0.0;
      for (std::size_t t = 0; t < out[i].pois.size(); ++t) {
        want += w.tables->pref.ps(r.user, out[i].pois[t], out[i].hours[t]);
      }
      CHECK(out[i].score == doctest::Approx(want).epsilon(1e-12));
      if (i > 0) {
        CHECK(out[i - 1].score >= out[i].score);
        if (out[i - 1].score == out[i].score) CHECK(out[i - 1].index < out[i].index);
      }
    }
    CHECK(idx.size() == 8);

    r.k = 3;
    const auto top = generate(*w.model, r, *w.tables, seed);
    REQUIRE(top.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(top[i].pois == out[i].pois);
  }
}

TEST_CASE("ties keep candidate order") {
  World w = make_world(4);
  // A model that always predicts the same POI makes every candidate equal.
  auto& p = w.model->params();
  p[p.find("V")] = num::Matrix(12, 8, 0.0);
  p[p.find("G")] = num::Matrix(12, kFeatureDim, 0.0);
  p[p.find("b_y")](5, 0) = 30.0;
  GenRequest r;
  r.start_poi = 0;
  r.start_hour = 8;
  r.length = 5;
  r.candidates = 5;
  r.k = 5;
  const auto out = generate(*w.model, r, *w.tables, 9);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].index == static_cast<int>(i));
    CHECK(out[i].pois == std::vector<int>{0, 5, 5, 5, 5});
  }
  r.no_repeat = true;
  r.k = 1;
  const auto nr = generate(*w.model, r, *w.tables, 9);
  std::set<int> distinct(nr[0].pois.begin(), nr[0].pois.end());
  CHECK(distinct.size() == nr[0].pois.size());
  CHECK(nr[0].pois[1] == 5);
}

TEST_CASE("generation is deterministic and valid") {
  for (auto kind : {ModelKind::caps_rnn, ModelKind::caps_lstm, ModelKind::plain_rnn}) {
    const World w = make_world(7, kind);
    ScoreCache cache(w.tables->pref, 12);
    num::Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      GenRequest r;
      r.user = static_cast<int>(rng.index(7)) - 1;
      r.start_poi = static_cast<int>(rng.index(12));
      r.start_hour = static_cast<int>(rng.index(24));
      r.length = 1 + static_cast<int>(rng.index(12));
      r.candidates = 1 + static_cast<int>(rng.index(6));
      r.k = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(r.candidates)));
      r.consolidated = trial % 3 == 0;
      const auto a = generate(*w.model, r, *w.tables, 77);
      const auto b = generate(*w.model, r, *w.tables, 77, &cache);
      REQUIRE(a.size() == static_cast<std::size_t>(r.k));
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pois == b[i].pois);
        CHECK(a[i].score == doctest::Approx(b[i].score).epsilon(1e-12));
        CHECK(a[i].pois.size() == static_cast<std::size_t>(r.length));
        CHECK(a[i].pois[0] == r.start_poi);
        for (int p : a[i].pois) CHECK((p >= 0 && p < 12));
        for (double q : a[i].probs) CHECK((q > 0.0 && q <= 1.0));
        CHECK(a[i].hours == rollout_hours(w.tables->attrs, a[i].pois, r.start_hour));
      }
    }
  }
}

TEST_CASE("score cache agrees with the preference table") {
  const World w = make_world(8);
  ScoreCache cache(w.tables->pref, 12);
  for (int u = -1; u < 6; ++u) {
    for (int l = 0; l < 12; ++l) {
      for (int h = 0; h < 24; h += 5) CHECK(cache.ps(u, l, h) == w.tables->pref.ps(u, l, h));
    }
  }
  CHECK(cache.ps(1, 2, 25) == w.tables->pref.ps(1, 2, 1));
}

TEST_CASE("rollout hours advance by stay and walking time") {
  const World w = make_world(9);
  const auto& t = w.tables->attrs;
  const std::vector<int> pois{0, 3, 7};
  const auto hours = rollout_hours(t, pois, 23);
  const double e1 = t.mean_stay_seconds(0) + geo::walking_seconds(t.distance_km(0, 3));
  const double e2 = e1 + t.mean_stay_seconds(3) + geo::walking_seconds(t.distance_km(3, 7));
  CHECK(hours[0] == 23);
  CHECK(hours[1] == static_cast<int>(std::floor(23 + e1 / 3600)) % 24);
  CHECK(hours[2] == static_cast<int>(std::floor(23 + e2 / 3600)) % 24);
}

TEST_CASE("request validation") {
  const World w = make_world(2);
  GenRequest r;
  r.length = 0;
  CHECK_THROWS_AS(generate(*w.model, r, *w.tables, 1), std::invalid_argument);
  r = {};
  r.k = 4;
  r.candidates = 3;
  CHECK_THROWS_AS(generate(*w.model, r, *w.tables, 1), std::invalid_argument);
  r = {};
  r.start_hour = 24;
  CHECK_THROWS_AS(generate(*w.model, r, *w.tables, 1), std::invalid_argument);
}

TEST_CASE("neural recommender wraps generation") {
  const World w = make_world(5);
  NeuralRecommender rec("caps-lstm", w.model, w.tables, 6, 2);
  CHECK(rec.name() == "caps-lstm");
  Query q;
  q.user = 1;
  q.start_poi = 3;
  q.start_hour = 10;
  q.length = 4;
  q.seed = 12;
  const auto out = rec.recommend(q);
  REQUIRE(out.size() == 2);
  for (const auto& s : out) {
    CHECK(s.size() == 4);
    CHECK(s[0] == 3);
  }
  CHECK(rec.recommend(q) == out);
}
