#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include "caps/context_features.hpp"
#include "caps/geo.hpp"
#include "fixtures.hpp"
#include "naive_features.hpp"

using namespace caps;
using caps::test::make_catalog;
using caps::test::make_session;
using caps::test::random_dataset;
using caps::test::close;
using caps::test::Naive;

TEST_CASE("stay time nesting and normalization") {
  Dataset d = make_catalog(2, {{0, 0, 0}, {0, 0.01, 0}}, 1);
  d.sessions.push_back(make_session(0, {0}, {9}, 10));
  d.sessions.push_back(make_session(1, {0, 0}, {9, 10}, 20));
  d.sessions.back().visits[1].departure = d.sessions.back().visits[1].arrival + 40 * 60;
  d.sessions.push_back(make_session(1, {1}, {12}, 5));
  const auto st = compute_stay_stats(d.sessions, 2);
  CHECK(st.mean_stay[0] == doctest::Approx(20 * 60.0));
  CHECK(st.mean_stay[1] == doctest::Approx(5 * 60.0));
  CHECK(st.normalized[0] == 1.0);
  CHECK(st.normalized[1] == 0.0);

  Dataset one = make_catalog(1, {{0, 0, 0}}, 1);
  one.sessions.push_back(make_session(0, {0, 0}, {9, 10}, 17));
  CHECK(compute_stay_stats(one.sessions, 1).normalized[0] == 0.0);

  Dataset eq = make_catalog(1, {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}}, 1);
  eq.sessions.push_back(make_session(0, {0, 1, 2}, {9, 10, 11}, 25));
  const auto se = compute_stay_stats(eq.sessions, 3);
  CHECK(se.normalized[0] == se.normalized[1]);
  CHECK(se.normalized[1] == se.normalized[2]);

  // unvisited POI takes the global mean and is flagged
  Dataset gap = make_catalog(1, {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}}, 1);
  gap.sessions.push_back(make_session(0, {0, 1}, {9, 10}, 10));
  gap.sessions.back().visits[1].departure = gap.sessions.back().visits[1].arrival + 1800;
  const auto sg = compute_stay_stats(gap.sessions, 3);
  CHECK(sg.observed[2] == 0);
  CHECK(sg.mean_stay[2] == doctest::Approx(1200.0));
}

TEST_CASE("min_max degenerate range") {
  CHECK(min_max(3, 3, 3) == 0.0);
  CHECK(min_max(2, 1, 3) == 0.5);
}

TEST_CASE("optimized tables agree with the literal transcription") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    CAPTURE(seed);
    const Dataset d = random_dataset(seed, 5, 8, 3, 50, seed % 4 == 0 ? 0.0 : 0.4);
    const FeatureTables tables = build_feature_tables(d, d.sessions);
    const Naive naive(d);
    const auto& pref = tables.pref;
    const auto& ast = pref.ast();

    const auto st = naive.st_all();
    for (int i = 0; i < naive.L(); ++i) {
      CHECK(close(tables.stay.mean_stay[static_cast<std::size_t>(i)], st[static_cast<std::size_t>(i)]));
      CHECK(close(tables.stay.normalized[static_cast<std::size_t>(i)], naive.stay_norm()[static_cast<std::size_t>(i)]));
    }
    for (int u = 0; u < naive.U(); ++u) {
      CHECK(close(ast.psi1(u), naive.psi1(u)));
      for (int c = 0; c < naive.C(); ++c) {
        CHECK(close(ast.gamma1(u, c), naive.gamma1(u, c)));
        CHECK(close(ast.ast_user_category(u, c), naive.ast_user_cat(u, c)));
      }
      for (int l = 0; l < naive.L(); ++l) {
        CHECK(close(ast.alpha(u, l), naive.alpha(u, l)));
        CHECK(close(ast.ast_cat(u, l), naive.ast_cat(u, l)));
        CHECK(close(ast.ast(u, l), naive.ast(u, l)));
        CHECK(close(pref.beta(u, l), naive.beta(u, l)));
        for (int t : {0, 7, 13, 21}) {
          CHECK(close(pref.ps(u, l, t), naive.ps(u, l, t)));
          CHECK(close(pref.consolidated(u, l, t, (l + 3) % naive.L()),
                      naive.consolidated(u, l, t, (l + 3) % naive.L())));
        }
      }
    }
    for (int c = 0; c < naive.C(); ++c) CHECK(close(ast.ast_category(c), naive.ast_global_cat(c)));
    for (int l = 0; l < naive.L(); ++l) {
      for (int t : {3, 9, 18}) CHECK(close(pref.generalized(l, t), naive.ps_general(l, t)));
    }
    CHECK(close(pref.ps(-1, 2, 5), naive.ps_general(2, 5)));

    // attribute vector entries built from hour-restricted and user-averaged tables
    for (int l = 0; l < naive.L(); ++l) {
      for (int t : {8, 12, 19}) {
        const auto a = tables.attrs.attribute_vector(l, t, std::nullopt);
        const Naive at_hour(d, t, naive.stay_norm());
        CHECK(close(a.ast_cat_hour, at_hour.ast_global_cat(naive.cat(l))));
        CHECK(close(a.ps, naive.ps_general(l, t)));
        CHECK(close(a.stay_norm, naive.stay_norm()[static_cast<std::size_t>(l)]));
        double mean_ast = 0.0;
        const auto act = naive.active();
        for (int u : act) mean_ast += naive.ast(u, l);
        CHECK(close(a.ast, mean_ast / static_cast<double>(act.size())));
      }
    }
  }
}

TEST_CASE("tuning factors stay in [0,1] and constraints never raise P") {
  for (std::uint64_t seed = 100; seed < 1100; ++seed) {
    const Dataset d = random_dataset(seed, 4, 6, 3, 30, 0.5);
    const auto stats = compute_stay_stats(d.sessions, 6);
    const AstTable ast = compute_ast(stats, d.sessions, d);
    PreferenceTable pref = compute_preference(ast, d.sessions, d);
    num::Rng rng(seed);
    const int u = static_cast<int>(rng.index(4));
    const int l = static_cast<int>(rng.index(6));
    const int t = static_cast<int>(rng.index(24));
    const int c = d.poi(l).category;
    const bool ok = ast.alpha(u, l) >= 0 && ast.alpha(u, l) <= 1 && ast.psi1(u) >= 0 &&
                    ast.psi1(u) <= 1 && ast.gamma1(u, c) >= 0 && ast.gamma1(u, c) <= 1 &&
                    pref.theta(u, l) >= 0 && pref.theta(u, l) <= 1 && pref.beta(u, l) >= 0 &&
                    pref.beta(u, l) <= 1;
    CHECK(ok);

    const double c1 = rng.uniform(), c2 = rng.uniform();
    const double bump = rng.uniform(0.0, 1.0 - c1);
    pref.set_constraints({{"a", [=](int, int) { return c1; }}, {"b", [=](int, int) { return c2; }}});
    const double before = pref.consolidated(u, l, t, 0);
    pref.set_constraints(
        {{"a", [=](int, int) { return c1 + bump; }}, {"b", [=](int, int) { return c2; }}});
    const double after = pref.consolidated(u, l, t, 0);
    CHECK(after <= before);
    CHECK(before <= pref.ps(u, l, t));
  }
}

TEST_CASE("removing friendships collapses social blending") {
  for (std::uint64_t seed = 2000; seed < 3000; ++seed) {
    Dataset d = random_dataset(seed, 4, 6, 3, 30, 0.6);
    d.graph = SocialGraph(d.enc.num_users());
    const auto stats = compute_stay_stats(d.sessions, 6);
    const AstTable ast = compute_ast(stats, d.sessions, d);
    num::Rng rng(seed);
    const int u = static_cast<int>(rng.index(4));
    const int l = static_cast<int>(rng.index(6));
    CHECK(ast.ast(u, l) == ast.ast_cat(u, l));
    CHECK(ast.psi1(u) == 0.0);
  }
}

TEST_CASE("categorical blend reduces to the own term for a lone category member") {
  // distinct categories: each POI is alone in its category
  Dataset d = make_catalog(2, {{0, 0, 0}, {0, 0.01, 1}, {0, 0.02, 2}}, 3);
  d.sessions.push_back(make_session(0, {0, 1, 0}, {9, 10, 11}, 20));
  d.sessions.push_back(make_session(1, {2, 1}, {9, 10}, 40));
  const auto stats = compute_stay_stats(d.sessions, 3);
  const AstTable ast = compute_ast(stats, d.sessions, d);
  const double v_norm = 2.0 / 3.0;
  CHECK(ast.ast_cat(0, 0) == doctest::Approx(stats.normalized[0] / v_norm).epsilon(1e-12));
  CHECK(ast.ast_cat(0, 2) == 0.0);
}

TEST_CASE("cold-start user gets a positive score through friends") {
  Dataset d = make_catalog(3, {{0, 0, 0}, {0, 0.01, 0}, {0, 0.02, 1}}, 2);
  d.sessions.push_back(make_session(0, {0, 1}, {9, 10}, 20));
  d.sessions.push_back(make_session(1, {2, 0}, {9, 10}, 40));
  d.sessions.back().visits[1].departure += 3600;
  d.graph.add_edge(2, 0);
  const auto tables = build_feature_tables(d, d.sessions);
  CHECK(tables.pref.ast().psi1(2) == 1.0);
  CHECK(tables.pref.ps(2, 0, 9) > 0.0);
  CHECK(tables.pref.ps(2, 0, 9) == doctest::Approx(tables.pref.ast().ast_cat(0, 0)));
}

TEST_CASE("maximal single constraint zeroes the consolidated score") {
  const Dataset d = random_dataset(3, 4, 6, 2, 30);
  auto tables = build_feature_tables(d, d.sessions);
  tables.pref.set_constraints({{"full", [](int, int) { return 1.0; }}});
  for (int l = 0; l < 6; ++l) CHECK(tables.pref.consolidated(0, l, 10, 1) == 0.0);
}

TEST_CASE("default constraints are normalized to [0,1]") {
  const Dataset d = random_dataset(17, 5, 8, 3, 50);
  const auto tables = build_feature_tables(d, d.sessions);
  REQUIRE(tables.pref.constraints().size() == 2);
  for (int l = 0; l < 8; ++l) {
    for (int p = 0; p < 8; ++p) {
      for (const auto& c : tables.pref.constraints()) {
        const double v = c.measure(l, p);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      CHECK(tables.pref.constraint_mean(l, p) ==
            doctest::Approx(tables.pref.constraints()[0].measure(l, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("temporal popularity") {
  Dataset d = make_catalog(2, {{0, 0, 0}, {0, 0.01, 0}}, 1);
  d.sessions.push_back(make_session(0, {0, 0, 0}, {13, 13.5, 13.9}));
  auto pop = temporal_popularity(d.sessions, 2);
  for (int h = 0; h < 24; ++h) CHECK(pop[0][static_cast<std::size_t>(h)] == (h == 13 ? 1.0 : 0.0));

  Dataset u = make_catalog(1, {{0, 0, 0}}, 1);
  std::vector<int> pois(24, 0);
  std::vector<double> hours;
  for (int h = 0; h < 24; ++h) hours.push_back(h + 0.5);
  u.sessions.push_back(make_session(0, pois, hours, 1));
  pop = temporal_popularity(u.sessions, 1);
  for (double x : pop[0]) CHECK(x == 1.0);

  // hand count over a random fixture
  const Dataset r = random_dataset(9, 5, 6, 2, 50);
  pop = temporal_popularity(r.sessions, 6);
  std::vector<std::array<int, 24>> counts(6);
  for (auto& c : counts) c.fill(0);
  int max = 0;
  for (const auto& s : r.sessions) {
    for (const auto& v : s.visits) max = std::max(max, ++counts[static_cast<std::size_t>(v.poi)][static_cast<std::size_t>(v.arrival_hour())]);
  }
  for (int l = 0; l < 6; ++l) {
    for (int h = 0; h < 24; ++h) {
      CHECK(pop[static_cast<std::size_t>(l)][static_cast<std::size_t>(h)] ==
            doctest::Approx(static_cast<double>(counts[static_cast<std::size_t>(l)][static_cast<std::size_t>(h)]) / max).epsilon(1e-15));
    }
  }
}

TEST_CASE("attribute and feature vectors") {
  const double dlat = 1.0 / 111.19492664455873;
  Dataset d = make_catalog(1, {{0, 0, 0}, {dlat, 0, 1}}, 2);
  d.sessions.push_back(make_session(0, {0, 1}, {9, 10}));
  const auto tables = build_feature_tables(d, d.sessions);
  const auto& attrs = tables.attrs;

  CHECK(attrs.attribute_vector(1, 10, std::nullopt).dist_prev_km == 0.0);
  CHECK(attrs.attribute_vector(1, 10, 0).dist_prev_km == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(attrs.attribute_vector(5, 0, std::nullopt), std::out_of_range);

  const auto f = attrs.feature_vector(d.sessions[0].visits);
  CHECK(f.mean_dist_km == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.hour_start == 9);
  CHECK(f.hour_end == 10);
  CHECK(f.cat_start == 0);
  CHECK(f.cat_end == 1);
  CHECK(f.loc_end == 1);

  const std::vector<Visit> single = {d.sessions[0].visits[0]};
  const auto g = attrs.feature_vector(single);
  CHECK(g.loc_start == g.loc_end);
  CHECK(g.cat_start == g.cat_end);
  CHECK(g.hour_start == g.hour_end);
  CHECK(g.mean_dist_km == 0.0);

  const auto x = attrs.encode(attrs.attribute_vector(1, 10, 0));
  CHECK(x.size() == 30);
  for (double v : x) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  const auto y = attrs.encode(f);
  CHECK(y.size() == 7);
  CHECK(y[5] == 9.0 / 24);
  for (double v : y) {
    CHECK(v >= 0.0);
    CHECK(v < 1.0 + 1e-15);
  }
}

TEST_CASE("feature snapshot round trip") {
  const Dataset d = random_dataset(4, 5, 8, 3, 50);
  const auto tables = build_feature_tables(d, d.sessions);
  const auto path = std::filesystem::temp_directory_path() / "caps_test_features.json";
  tables.attrs.save(path);
  const auto loaded = AttributeTables::load(path);
  CHECK(loaded == tables.attrs);
  std::filesystem::remove(path);
}
