#include "caps/eval_metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "caps/error.hpp"
#include "caps/geo.hpp"
#include "caps/numerics.hpp"

namespace caps {

namespace {

std::set<std::pair<int, int>> ordered_pairs(std::span<const int> s) {
  std::set<std::pair<int, int>> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[i] != s[j]) out.emplace(s[i], s[j]);
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

PairScore pairs_f1(std::span<const int> actual, std::span<const int> predicted) {
  if (actual.empty() || predicted.empty()) throw std::invalid_argument("pairs_f1: empty sequence");
  const auto a = ordered_pairs(actual);
  const auto p = ordered_pairs(predicted);
  PairScore s;
  if (a.empty() && p.empty()) {
    const bool same = std::equal(actual.begin(), actual.end(), predicted.begin(), predicted.end());
    s.precision = s.recall = s.f1 = same ? 1.0 : 0.0;
    return s;
  }
  std::size_t correct = 0;
  for (const auto& pair : p) correct += a.count(pair);
  if (correct == 0) return s;
  s.precision = static_cast<double>(correct) / static_cast<double>(p.size());
  s.recall = static_cast<double>(correct) / static_cast<double>(a.size());
  s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

int diversity_raw(std::span<const int> categories) {
  int n = 0;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    for (std::size_t j = i + 1; j < categories.size(); ++j) n += categories[i] != categories[j];
  }
  return n;
}

double diversity(std::span<const int> categories) {
  const std::size_t n = categories.size();
  if (n < 2) throw std::invalid_argument("diversity needs at least two entries");
  return diversity_raw(categories) / (static_cast<double>(n) / 2.0 * static_cast<double>(n - 1));
}

Displacement displacement(std::span<const geo::LatLon> actual,
                          std::span<const geo::LatLon> predicted) {
  Displacement d;
  const std::size_t n = std::min(actual.size(), predicted.size());
  d.truncated = actual.size() != predicted.size();
  for (std::size_t i = 0; i < n; ++i) d.sum_km += geo::haversine_km(actual[i], predicted[i]);
  d.mean_km = n > 0 ? d.sum_km / static_cast<double>(n) : 0.0;
  return d;
}

// ---------------------------------------------------------------------------

std::vector<int> assign_folds(std::span<const Session> sessions, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("need at least 2 folds");
  std::map<int, std::vector<std::size_t>> by_user;
  for (std::size_t i = 0; i < sessions.size(); ++i) by_user[sessions[i].user].push_back(i);
  std::vector<int> fold(sessions.size(), -1);
  for (auto& [user, idx] : by_user) {
    if (static_cast<int>(idx.size()) < folds) continue;
    num::Rng rng = num::Rng::stream(seed, static_cast<std::uint64_t>(user));
    rng.shuffle(idx.begin(), idx.end());
    for (std::size_t k = 0; k < idx.size(); ++k) fold[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return fold;
}

CvResult cross_validate(const Dataset& data, std::span<const ModelSpec> models,
                        const CvConfig& config) {
  using clock = std::chrono::steady_clock;
  CvResult result;
  auto log = [&](const std::string& m) {
    if (config.log) config.log(m);
  };
  const auto fold_of = assign_folds(data.sessions, config.folds, config.seed);
  {
    std::map<int, int> count;
    for (const auto& s : data.sessions) ++count[s.user];
    for (const auto& [user, n] : count) {
      if (n < config.folds) {
        result.warnings.push_back("user " + data.enc.user_id(user) + " has " + std::to_string(n) +
                                  " sessions (< " + std::to_string(config.folds) +
                                  " folds); some folds hold none of its sessions");
      }
    }
  }
  for (const auto& w : result.warnings) log("warning: " + w);

  std::map<std::string, std::vector<EvalReport>> per_model;
  for (int f = 0; f < config.folds; ++f) {
    std::vector<Session> train;
    std::vector<const Session*> test;
    for (std::size_t i = 0; i < data.sessions.size(); ++i) {
      if (fold_of[i] == f) {
        if (data.sessions[i].size() >= 2) test.push_back(&data.sessions[i]);
      } else {
        train.push_back(data.sessions[i]);
      }
    }
    const auto t_features = clock::now();
    auto tables = std::make_shared<const FeatureTables>(build_feature_tables(data, train));
    const double feature_seconds =
        std::chrono::duration<double>(clock::now() - t_features).count();
    log("fold " + std::to_string(f) + ": " + std::to_string(train.size()) + " training sessions, " +
        std::to_string(test.size()) + " queries");

    const FoldContext ctx{data, train, tables, f, num::mix_seed(config.seed, static_cast<std::uint64_t>(f))};
    for (const auto& spec : models) {
      const auto t0 = clock::now();
      const auto rec = spec.build(ctx);
      EvalReport rep;
      rep.model = spec.name;
      rep.fold = f;
      for (std::size_t qi = 0; qi < test.size(); ++qi) {
        const Session& s = *test[qi];
        Query q;
        q.user = s.user;
        q.start_poi = s.visits.front().poi;
        q.start_hour = s.visits.front().arrival_hour();
        q.length = static_cast<int>(s.size());
        q.feature = tables->attrs.feature_vector(s.visits);
        q.seed = num::mix_seed(ctx.seed, qi);

        std::vector<int> actual;
        std::vector<geo::LatLon> actual_where;
        for (const auto& v : s.visits) {
          actual.push_back(v.poi);
          actual_where.push_back(data.poi(v.poi).where);
        }
        const auto predicted = rec->recommend(q);
        if (predicted.empty()) throw std::runtime_error(spec.name + " returned no sequence");
        QueryResult qr;
        qr.model = spec.name;
        qr.fold = f;
        qr.user = s.user;
        qr.length = q.length;
        for (const auto& seq : predicted) {
          const PairScore ps = pairs_f1(actual, seq);
          qr.precision += ps.precision;
          qr.recall += ps.recall;
          qr.f1 += ps.f1;
          std::vector<int> cats;
          std::vector<geo::LatLon> where;
          for (int p : seq) {
            cats.push_back(data.poi(p).category);
            where.push_back(data.poi(p).where);
          }
          if (cats.size() >= 2) {
            qr.diversity += diversity(cats);
            qr.diversity_raw += diversity_raw(cats);
          }
          const Displacement d = displacement(actual_where, where);
          qr.displacement_mean_km += d.mean_km;
          qr.displacement_sum_km += d.sum_km;
        }
        const double n = static_cast<double>(predicted.size());
        for (double* v : {&qr.precision, &qr.recall, &qr.f1, &qr.diversity, &qr.diversity_raw,
                          &qr.displacement_mean_km, &qr.displacement_sum_km}) {
          *v /= n;
        }
        rep.precision += qr.precision;
        rep.recall += qr.recall;
        rep.pairs_f1 += qr.f1;
        rep.diversity += qr.diversity;
        rep.diversity_raw += qr.diversity_raw;
        rep.displacement_mean_km += qr.displacement_mean_km;
        rep.displacement_sum_km += qr.displacement_sum_km;
        ++rep.queries;
        result.queries.push_back(std::move(qr));
      }
      if (rep.queries > 0) {
        const double n = rep.queries;
        for (double* v : {&rep.precision, &rep.recall, &rep.pairs_f1, &rep.diversity,
                          &rep.diversity_raw, &rep.displacement_mean_km, &rep.displacement_sum_km}) {
          *v /= n;
        }
      }
      rep.seconds = feature_seconds + std::chrono::duration<double>(clock::now() - t0).count();
      log("fold " + std::to_string(f) + " " + spec.name + ": pairs-F1 " + fmt(rep.pairs_f1));
      per_model[spec.name].push_back(rep);
      result.reports.push_back(rep);
    }
  }

  for (const auto& spec : models) {
    const auto& folds = per_model[spec.name];
    EvalReport agg;
    agg.model = spec.name;
    agg.fold = -1;
    for (const auto& r : folds) {
      agg.precision += r.precision;
      agg.recall += r.recall;
      agg.pairs_f1 += r.pairs_f1;
      agg.diversity += r.diversity;
      agg.diversity_raw += r.diversity_raw;
      agg.displacement_mean_km += r.displacement_mean_km;
      agg.displacement_sum_km += r.displacement_sum_km;
      agg.queries += r.queries;
      agg.seconds += r.seconds;
    }
    const double n = static_cast<double>(folds.size());
    if (n > 0) {
      for (double* v : {&agg.precision, &agg.recall, &agg.pairs_f1, &agg.diversity,
                        &agg.diversity_raw, &agg.displacement_mean_km, &agg.displacement_sum_km}) {
        *v /= n;
      }
      double var = 0.0;
      for (const auto& r : folds) var += (r.pairs_f1 - agg.pairs_f1) * (r.pairs_f1 - agg.pairs_f1);
      agg.f1_std = std::sqrt(var / n);
    }
    result.reports.push_back(agg);
  }
  return result;
}

// ---------------------------------------------------------------------------

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "model,fold,queries,precision,recall,pairs_f1,pairs_f1_std,diversity,diversity_raw,"
         "displacement_mean_km,displacement_sum_km\n";
  for (const auto& r : reports) {
    out << r.model << ',' << (r.fold < 0 ? std::string("all") : std::to_string(r.fold)) << ','
        << r.queries << ',' << fmt(r.precision) << ',' << fmt(r.recall) << ',' << fmt(r.pairs_f1)
        << ',' << fmt(r.f1_std) << ',' << fmt(r.diversity) << ',' << fmt(r.diversity_raw) << ','
        << fmt(r.displacement_mean_km) << ',' << fmt(r.displacement_sum_km) << '\n';
  }
}

void write_timing_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "model,fold,seconds\n";
  for (const auto& r : reports) {
    out << r.model << ',' << (r.fold < 0 ? std::string("all") : std::to_string(r.fold)) << ','
        << fmt(r.seconds) << '\n';
  }
}

void write_query_csv(std::ostream& out, std::span<const QueryResult> queries) {
  out << "model,fold,user,length,precision,recall,pairs_f1,diversity,diversity_raw,"
         "displacement_mean_km,displacement_sum_km\n";
  for (const auto& q : queries) {
    out << q.model << ',' << q.fold << ',' << q.user << ',' << q.length << ',' << fmt(q.precision)
        << ',' << fmt(q.recall) << ',' << fmt(q.f1) << ',' << fmt(q.diversity) << ','
        << fmt(q.diversity_raw) << ',' << fmt(q.displacement_mean_km) << ','
        << fmt(q.displacement_sum_km) << '\n';
  }
}

std::vector<QueryResult> read_query_csv(std::istream& in) {
  std::vector<QueryResult> out;
  std::string line;
  if (!std::getline(in, line) || line.rfind("model,fold,user,length", 0) != 0) {
    throw DataError("not a query metrics CSV");
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw DataError("query CSV row " + std::to_string(row) + ": expected 11 fields");
    try {
      QueryResult q;
      q.model = f[0];
      q.fold = std::stoi(f[1]);
      q.user = std::stoi(f[2]);
      q.length = std::stoi(f[3]);
      q.precision = std::stod(f[4]);
      q.recall = std::stod(f[5]);
      q.f1 = std::stod(f[6]);
      q.diversity = std::stod(f[7]);
      q.diversity_raw = std::stod(f[8]);
      q.displacement_mean_km = std::stod(f[9]);
      q.displacement_sum_km = std::stod(f[10]);
      out.push_back(std::move(q));
    } catch (const std::logic_error&) {
      throw DataError("query CSV row " + std::to_string(row) + ": malformed number");
    }
  }
  return out;
}

std::vector<EvalReport> summarize(std::span<const QueryResult> queries) {
  std::vector<std::string> order;
  std::map<std::string, EvalReport> by;
  for (const auto& q : queries) {
    if (!by.contains(q.model)) order.push_back(q.model);
    auto& r = by[q.model];
    r.model = q.model;
    r.precision += q.precision;
    r.recall += q.recall;
    r.pairs_f1 += q.f1;
    r.diversity += q.diversity;
    r.diversity_raw += q.diversity_raw;
    r.displacement_mean_km += q.displacement_mean_km;
    r.displacement_sum_km += q.displacement_sum_km;
    ++r.queries;
  }
  std::vector<EvalReport> out;
  for (const auto& name : order) {
    EvalReport r = by[name];
    const double n = r.queries;
    for (double* v : {&r.precision, &r.recall, &r.pairs_f1, &r.diversity, &r.diversity_raw,
                      &r.displacement_mean_km, &r.displacement_sum_km}) {
      *v /= n;
    }
    out.push_back(r);
  }
  return out;
}

void write_text_table(std::ostream& out, std::span<const EvalReport> reports,
                      const std::string& title, bool show_raw_diversity) {
  char buf[256];
  out << title << '\n';
  if (show_raw_diversity) {
    std::snprintf(buf, sizeof buf, "%-12s %10s %10s %10s %10s %12s %14s\n", "Model", "Precision",
                  "Recall", "Pairs-F1", "Diversity", "Div. (raw)", "Displ. (km)");
  } else {
    std::snprintf(buf, sizeof buf, "%-12s %10s %10s %10s %10s %14s\n", "Model", "Precision",
                  "Recall", "Pairs-F1", "Diversity", "Displ. (km)");
  }
  out << buf;
  out << std::string(show_raw_diversity ? 84 : 71, '-') << '\n';
  for (const auto& r : reports) {
    if (show_raw_diversity) {
      std::snprintf(buf, sizeof buf, "%-12s %10.5f %10.5f %10.5f %10.5f %12.3f %14.3f\n",
                    r.model.c_str(), r.precision, r.recall, r.pairs_f1, r.diversity,
                    r.diversity_raw, r.displacement_sum_km);
    } else {
      std::snprintf(buf, sizeof buf, "%-12s %10.5f %10.5f %10.5f %10.5f %14.3f\n",
                    r.model.c_str(), r.precision, r.recall, r.pairs_f1, r.diversity,
                    r.displacement_sum_km);
    }
    out << buf;
  }
}

void write_length_sweep_csv(std::ostream& out, std::span<const QueryResult> queries) {
  struct Acc {
    int n = 0;
    double f1 = 0, div = 0, disp = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, std::map<int, Acc>> by;
  for (const auto& q : queries) {
    if (!by.contains(q.model)) order.push_back(q.model);
    auto& a = by[q.model][q.length];
    ++a.n;
    a.f1 += q.f1;
    a.div += q.diversity;
    a.disp += q.displacement_mean_km;
  }
  out << "model,length,queries,pairs_f1,diversity,displacement_mean_km\n";
  for (const auto& name : order) {
    for (const auto& [len, a] : by[name]) {
      out << name << ',' << len << ',' << a.n << ',' << fmt(a.f1 / a.n) << ',' << fmt(a.div / a.n)
          << ',' << fmt(a.disp / a.n) << '\n';
    }
  }
}

}  // namespace caps
