#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "caps/cli.hpp"
#include "caps/pipeline.hpp"
#include "caps/trainer.hpp"
#include "fixtures.hpp"
#include "model_helpers.hpp"
#include "naive_features.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace caps;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Desk-scale network sizes used for the training criteria.
PipelineConfig desk_config() {
  PipelineConfig pc;
  pc.rnn_embedding = 32;
  pc.rnn_hidden = 32;
  pc.rnn_layers = 5;
  pc.lstm_embedding = 32;
  pc.lstm_hidden = 64;
  return pc;
}

Outcome gradients() {
  double worst = 0.0;
  for (auto kind : {ModelKind::caps_rnn, ModelKind::caps_lstm}) {
    ModelConfig c;
    c.kind = kind;
    c.num_pois = 6;
    c.embedding = 4;
    c.hidden = 5;
    c.layers = 2;
    for (std::size_t steps : {1u, 3u, 25u}) {
      num::Rng rng(steps * 31 + static_cast<std::size_t>(kind));
      auto m = make_model(c, steps);
      test::randomize(m->params(), rng, 0.4);
      const std::vector<TrainingSequence> data{test::random_sequence(rng, 6, steps + 1)};
      for (const auto& [name, err] : test::check_model_grads(*m, data).per_block) {
        worst = std::max(worst, err);
      }
    }
  }
  return {worst < 1e-4, "max relative error " + fmt("%.3g", worst)};
}

Outcome degeneration() {
  int mismatches = 0;
  num::Rng rng(2024);
  auto vec = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform();
    return v;
  };
  ModelConfig rc;
  rc.kind = ModelKind::plain_rnn;
  rc.num_pois = 9;
  rc.embedding = 6;
  rc.hidden = 7;
  rc.layers = 3;
  RnnModel plain(rc, 1);
  test::randomize(plain.params(), rng);
  rc.kind = ModelKind::caps_rnn;
  RnnModel caps(rc, 2);
  for (std::size_t b = 0; b < caps.params().num_blocks(); ++b) {
    const std::string& name = caps.params().name(b);
    auto& m = caps.params()[b];
    if (name.starts_with("P_A") || name.starts_with("F") || name == "G") {
      m = num::Matrix(m.rows(), m.cols(), 0.0);
    } else if (name.starts_with("b_A")) {
      m = num::Matrix(m.rows(), m.cols(), 40.0);
    } else {
      m = plain.params()[plain.params().find(name)];
    }
  }
  ModelConfig lc;
  lc.kind = ModelKind::caps_lstm;
  lc.num_pois = 9;
  lc.embedding = 6;
  lc.hidden = 7;
  LstmModel lstm(lc, 3);
  test::randomize(lstm.params(), rng);
  const auto& lb = lstm.blocks();
  for (std::size_t blk : {lb.w_ci, lb.w_cf, lb.w_co, lb.p_a, lb.w_feat, lb.g}) {
    auto& m = lstm.params()[blk];
    m = num::Matrix(m.rows(), m.cols(), 0.0);
  }
  lstm.params()[lb.b_a] = num::Matrix(7, 1, 40.0);

  RecurrentState sp, sc, sl;
  std::vector<num::Vector> h;
  num::Vector lc_c, lc_h;
  for (int t = 0; t < 1000; ++t) {
    if (t % 25 == 0) {
      sp = plain.initial_state();
      sc = caps.initial_state();
      sl = lstm.initial_state();
      h.assign(3, num::Vector(7, 0.0));
      lc_c.assign(7, 0.0);
      lc_h.assign(7, 0.0);
    }
    const int poi = static_cast<int>(rng.index(9));
    const auto attr = vec(kAttributeDim);
    const auto feat = vec(kFeatureDim);
    const auto a = plain.step(sp, poi, {}, {});
    const auto b = caps.step(sc, poi, attr, feat);
    const auto o = test::textbook_rnn_step(plain.params(), 3, h, poi);
    const auto l = lstm.step(sl, poi, attr, feat);
    const auto lo = test::textbook_lstm_step(lstm.params(), lc_c, lc_h, poi);
    mismatches += !(a == b && a == o && sp.v == sc.v && sp.v == h);
    mismatches += !(l == lo && sl.v[0] == lc_c && sl.v[1] == lc_h);
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 2000 steps differ bitwise"};
}

Outcome overfit() {
  const auto syn = synth_dataset(SynthConfig{});
  const Dataset data = build_dataset(syn.records, syn.friendships);
  const std::vector<Session> five(data.sessions.begin(), data.sessions.begin() + 5);
  const auto tables = build_feature_tables(data, five);
  const auto seqs = build_training_sequences(tables.attrs, five);
  PipelineConfig pc = desk_config();
  pc.sgd.epochs = 200;
  Outcome out;
  for (auto kind : {ModelKind::caps_rnn, ModelKind::caps_lstm}) {
    auto m = make_model(model_config(kind, static_cast<int>(data.pois.size()), pc), 7);
    const auto r = train(*m, seqs, pc.sgd, 7);
    const double ratio = r.loss_curve.back() / r.loss_curve.front();
    out.pass = out.pass && ratio <= 0.10;
    out.detail += (out.detail.empty() ? "" : ", ") + to_string(kind) + " final/initial " + fmt("%.4f", ratio);
  }
  return out;
}

Outcome metric_oracles() {
  int bad = 0;
  num::Rng rng(99);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<int> a(2 + rng.index(5)), p(2 + rng.index(5));
    for (int& x : a) x = static_cast<int>(rng.index(8));
    for (int& x : p) x = static_cast<int>(rng.index(8));
    const auto got = pairs_f1(a, p);
    const auto want = test::brute_pairs(a, p);
    bad += !(got.precision == want.precision && got.recall == want.recall && got.f1 == want.f1);
  }
  auto rel = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(std::abs(y), 1e-300); };
  bad += !rel(diversity(std::vector<int>{0, 0, 1}), 2.0 / 3.0);
  bad += diversity(std::vector<int>{4, 4, 4}) != 0.0;
  bad += diversity(std::vector<int>{1, 2, 3, 4, 5}) != 1.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> c(2 + rng.index(9));
    for (int& x : c) x = static_cast<int>(rng.index(4));
    double dissimilar = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) dissimilar += c[i] == c[j] ? 0.0 : 1.0;
    }
    const double n = static_cast<double>(c.size());
    bad += !rel(diversity(c), dissimilar / (n * (n - 1.0) / 2.0));
  }
  const double pi = std::acos(-1.0);
  auto hav = [&](geo::LatLon x, geo::LatLon y) {
    const double p1 = x.lat * pi / 180, p2 = y.lat * pi / 180;
    const double dp = p2 - p1, dl = (y.lon - x.lon) * pi / 180;
    const double s = std::sin(dp / 2) * std::sin(dp / 2) +
                     std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
    return 2.0 * 6371.0 * std::asin(std::sqrt(s));
  };
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<geo::LatLon> x, y;
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) {
      x.push_back({rng.uniform(-80, 80), rng.uniform(-180, 180)});
      y.push_back({rng.uniform(-80, 80), rng.uniform(-180, 180)});
      sum += hav(x.back(), y.back());
    }
    const auto d = displacement(x, y);
    bad += !(rel(d.sum_km, sum) && rel(d.mean_km, sum / 5));
  }
  const double pole = displacement(std::vector<geo::LatLon>{{90, 0}}, std::vector<geo::LatLon>{{0, 0}}).sum_km;
  bad += std::abs(pole - 10007.5) > 0.001 * 10007.5;
  return {bad == 0, std::to_string(bad) + " mismatches; pole-equator " + fmt("%.3f km", pole)};
}

Outcome feature_equivalence() {
  int bad = 0, compared = 0;
  auto check = [&](double a, double b) {
    ++compared;
    bad += !test::close(a, b);
  };
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Dataset d = test::random_dataset(seed, 5, 8, 3, 50, seed % 4 == 0 ? 0.0 : 0.4);
    const FeatureTables tables = build_feature_tables(d, d.sessions);
    const test::Naive naive(d);
    const auto& pref = tables.pref;
    const auto& ast = pref.ast();
    const auto st = naive.st_all();
    for (int l = 0; l < naive.L(); ++l) check(tables.stay.mean_stay[static_cast<std::size_t>(l)], st[static_cast<std::size_t>(l)]);
    for (int u = 0; u < naive.U(); ++u) {
      check(ast.psi1(u), naive.psi1(u));
      for (int c = 0; c < naive.C(); ++c) check(ast.gamma1(u, c), naive.gamma1(u, c));
      for (int l = 0; l < naive.L(); ++l) {
        check(ast.alpha(u, l), naive.alpha(u, l));
        check(ast.ast_cat(u, l), naive.ast_cat(u, l));
        check(ast.ast(u, l), naive.ast(u, l));
        check(pref.beta(u, l), naive.beta(u, l));
        for (int t : {2, 9, 17}) {
          check(pref.ps(u, l, t), naive.ps(u, l, t));
          check(pref.consolidated(u, l, t, (l + 1) % naive.L()), naive.consolidated(u, l, t, (l + 1) % naive.L()));
        }
      }
    }
    for (int l = 0; l < naive.L(); ++l) check(pref.generalized(l, 12), naive.ps_general(l, 12));
  }
  int monotone = 0, collapse = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Dataset d = test::random_dataset(5000 + seed, 4, 6, 3, 30, 0.5);
    num::Rng rng(seed);
    const int u = static_cast<int>(rng.index(4)), l = static_cast<int>(rng.index(6));
    {
      PreferenceTable pref = build_feature_tables(d, d.sessions).pref;
      const double c1 = rng.uniform(), c2 = rng.uniform(), bump = rng.uniform(0.0, 1.0 - c1);
      const int t = static_cast<int>(rng.index(24));
      pref.set_constraints({{"a", [=](int, int) { return c1; }}, {"b", [=](int, int) { return c2; }}});
      const double before = pref.consolidated(u, l, t, 0);
      pref.set_constraints({{"a", [=](int, int) { return c1 + bump; }}, {"b", [=](int, int) { return c2; }}});
      monotone += !(pref.consolidated(u, l, t, 0) <= before && before <= pref.ps(u, l, t));
    }
    d.graph = SocialGraph(d.enc.num_users());
    const auto stats = compute_stay_stats(d.sessions, 6);
    const AstTable ast = compute_ast(stats, d.sessions, d);
    collapse += !(ast.ast(u, l) == ast.ast_cat(u, l) && ast.psi1(u) == 0.0);
  }
  return {bad == 0 && monotone == 0 && collapse == 0,
          std::to_string(bad) + "/" + std::to_string(compared) + " values off, " +
              std::to_string(monotone) + " monotonicity and " + std::to_string(collapse) +
              " collapse failures in 1000 cases"};
}

Outcome baseline_validity() {
  int apriori_bad = 0, markov_bad = 0, hits_bad = 0, constraint_bad = 0, trips = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Dataset d = test::random_dataset(seed, 4, 6, 2, 40, 0.5);
    const auto t = std::make_shared<const FeatureTables>(build_feature_tables(d, d.sessions));
    const AprioriModel m(t);
    num::Rng rng(seed);
    AprioriConfig cfg;
    cfg.epsilon_km = rng.uniform(2.0, 9.0);
    cfg.budget_seconds = rng.uniform(0.5, 6.0) * 3600.0;
    cfg.k = 3;
    cfg.exhaustive = true;
    const int user = static_cast<int>(rng.index(4)), start = static_cast<int>(rng.index(6));
    const int hour = static_cast<int>(rng.index(24)), len = 2 + static_cast<int>(rng.index(4));
    test::BruteTrips b{d, *t, user, hour, cfg, {}};
    std::vector<int> path{start};
    b.walk(path, 0.0, 0.0, t->pref.ps(user, start, hour) * (1.0 - t->pref.constraint_mean(start, start)), len);
    std::stable_sort(b.best.begin(), b.best.end(), [](const Trip& x, const Trip& y) {
      if (std::abs(x.score - y.score) > 1e-12) return x.score > y.score;
      if (std::abs(x.travel_seconds - y.travel_seconds) > 1e-9) return x.travel_seconds < y.travel_seconds;
      return x.pois < y.pois;
    });
    const auto got = m.generate(user, start, hour, len, cfg);
    apriori_bad += got.size() != std::min<std::size_t>(3, b.best.size());
    for (std::size_t i = 0; i < got.size() && i < b.best.size(); ++i) apriori_bad += got[i].pois != b.best[i].pois;

    const auto mk = MarkovModel::fit(d.sessions);
    for (int u = -1; u < 4; ++u) {
      for (int from = 0; from < 6; ++from) {
        double total = 0.0;
        for (const auto& [poi, p] : mk.transition_row(u, from)) {
          markov_bad += p <= 0.0;
          total += p;
        }
        markov_bad += std::abs(total - 1.0) > 1e-12;
      }
    }

    std::vector<std::vector<double>> adj(2 + rng.index(6), std::vector<double>(2 + rng.index(6)));
    for (auto& row : adj) {
      for (double& v : row) v = static_cast<double>(rng.index(4));
    }
    adj[0][0] += 1.0;
    const auto s = hits_power_iteration(adj, 100, 0.0);
    const auto [h, a] = test::reference_hits(adj, 100);
    for (std::size_t i = 0; i < h.size(); ++i) hits_bad += std::abs(s.hub[i] - h[i]) > 1e-8;
    for (std::size_t i = 0; i < a.size(); ++i) hits_bad += std::abs(s.authority[i] - a[i]) > 1e-8;
  }

  const auto syn = synth_dataset(SynthConfig{});
  const Dataset data = build_dataset(syn.records, syn.friendships);
  const auto t = std::make_shared<const FeatureTables>(build_feature_tables(data, data.sessions));
  const AprioriModel m(t);
  const AprioriConfig cfg;  // 2 km, 8 hours
  for (int start = 0; start < static_cast<int>(data.pois.size()); start += 5) {
    for (const auto& trip : m.generate(start % 60, start, 9, 10, cfg)) {
      ++trips;
      double elapsed = 0.0;
      for (std::size_t i = 1; i < trip.pois.size(); ++i) {
        const double km = data.distance_km(trip.pois[i - 1], trip.pois[i]);
        constraint_bad += km > cfg.epsilon_km;
        elapsed += t->attrs.mean_stay_seconds(trip.pois[i - 1]) + km / geo::kWalkingSpeedKmh * 3600.0;
      }
      constraint_bad += elapsed > cfg.budget_seconds + 1e-6;
    }
  }
  return {apriori_bad + markov_bad + hits_bad + constraint_bad == 0,
          "apriori " + std::to_string(apriori_bad) + ", markov " + std::to_string(markov_bad) +
              ", hits " + std::to_string(hits_bad) + " mismatches; " + std::to_string(constraint_bad) +
              " constraint violations over " + std::to_string(trips) + " trips"};
}

Outcome relative_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto syn = synth_dataset(SynthConfig{});
  const Dataset data = build_dataset(syn.records, syn.friendships);
  PipelineConfig pc = desk_config();
  pc.sgd.epochs = 10;
  const std::vector<std::string> names{"caps-lstm", "caps-rnn", "plain-rnn", "popularity"};
  const auto specs = make_model_specs(names, pc);
  CvConfig cv;
  cv.folds = 5;
  cv.seed = 7;
  const auto r = cross_validate(data, specs, cv);
  std::map<std::string, EvalReport> agg;
  for (const auto& rep : r.reports) {
    if (rep.fold < 0) agg[rep.model] = rep;
  }
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  bool pass = minutes < 30.0;
  std::string detail;
  for (std::size_t i = 0; i < names.size(); ++i) {
    detail += names[i] + " " + fmt("%.4f", agg[names[i]].pairs_f1) + (i + 1 < names.size() ? " >= " : "");
    if (i > 0) pass = pass && agg[names[i - 1]].pairs_f1 - agg[names[i]].pairs_f1 >= 0.02;
  }
  pass = pass && agg["caps-lstm"].displacement_mean_km <= agg["popularity"].displacement_mean_km;
  detail += "; displacement " + fmt("%.2f", agg["caps-lstm"].displacement_mean_km) + " vs " +
            fmt("%.2f km", agg["popularity"].displacement_mean_km) + "; " + fmt("%.1f min", minutes);
  return {pass, detail};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "caps_acceptance_determinism";
  const std::string d = root.string();
  const std::vector<std::string> small{"--rnn-embedding", "8", "--rnn-hidden", "8", "--rnn-layers", "2",
                                       "--lstm-embedding", "8", "--lstm-hidden", "12", "--epochs", "2"};
  auto with_small = [&](std::vector<std::string> a) {
    a.insert(a.end(), small.begin(), small.end());
    return a;
  };
  const std::vector<std::vector<std::string>> stages{
      {"synth", "--seed", "11", "--users", "15", "--pois", "40", "--days", "8", "--out", d + "/raw"},
      {"ingest", "--checkins", d + "/raw/checkins.csv", "--friends", d + "/raw/friends.csv",
       "--min-checkins", "5", "--out", d + "/data"},
      {"features", "--data", d + "/data"},
      with_small({"train", "--data", d + "/data", "--model", "caps-lstm", "--seed", "3"}),
      with_small({"train", "--data", d + "/data", "--model", "caps-rnn", "--seed", "3"}),
      {"generate", "--data", d + "/data", "--checkpoint", d + "/data/caps-lstm.ckpt", "--start",
       "poi_0003", "--hour", "10", "--length", "6", "--k", "3", "--seed", "4", "--out", d + "/gen.jsonl"},
      with_small({"evaluate", "--data", d + "/data", "--models", "all", "--folds", "3", "--seed", "5",
                  "--out", d + "/eval"}),
      {"report", "--in", d + "/eval"}};

  std::vector<std::map<std::string, std::string>> runs;
  std::string failure;
  for (int run = 0; run < 2 && failure.empty(); ++run) {
    fs::remove_all(root);
    fs::create_directories(root);
    for (const auto& args : stages) {
      std::ostringstream out, err;
      if (const int code = cli::run(args, out, err); code != 0) {
        failure = args[0] + " exited with " + std::to_string(code) + ": " + err.str();
        break;
      }
    }
    runs.push_back(snapshot(root));
  }
  fs::remove_all(root);
  if (!failure.empty()) return {false, failure};
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : runs[0]) {
    auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) differing.push_back(name);
  }
  std::string detail = std::to_string(runs[0].size()) + " files compared";
  for (const auto& n : differing) detail += "; differs: " + n;
  return {differing.empty() && runs[0].size() == runs[1].size() && !runs[0].empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "run only these criteria (1-8)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"degeneration", degeneration},
      {"overfit sanity", overfit},
      {"metric oracles", metric_oracles},
      {"feature-formula equivalence", feature_equivalence},
      {"baseline validity", baseline_validity},
      {"relative ordering", relative_ordering},
      {"determinism", determinism}};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %d %-28s %s  %s (%.1fs)\n", id, criteria[i].first.c_str(),
                o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
