#include "caps/context_features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "caps/error.hpp"

namespace caps {

double min_max(double value, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return (value - lo) / (hi - lo);
}

namespace {

int hour_of(const Visit& v) { return v.arrival_hour(); }

double scaled(double value, double max) { return max > 0.0 ? value / max : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------

VisitIndex VisitIndex::build(std::span<const Session> sessions, const Dataset& catalog,
                             std::optional<int> hour) {
  VisitIndex index;
  int num_users = catalog.enc.num_users();
  for (const auto& s : sessions) num_users = std::max(num_users, s.user + 1);
  index.users_.resize(static_cast<std::size_t>(num_users));

  for (const auto& s : sessions) {
    auto& uv = index.users_[static_cast<std::size_t>(s.user)];
    for (const auto& v : s.visits) {
      const int h = hour_of(v);
      if (hour && h != *hour) continue;
      const int cat = catalog.poi(v.poi).category;
      ++uv.total;
      ++uv.poi_count[v.poi];
      ++uv.poi_hour_count[v.poi][static_cast<std::size_t>(h)];
      ++uv.category_checkins[cat];
      auto& pois = uv.category_pois[cat];
      auto it = std::lower_bound(pois.begin(), pois.end(), v.poi);
      if (it == pois.end() || *it != v.poi) pois.insert(it, v.poi);
    }
  }

  for (int u = 0; u < num_users; ++u) {
    auto& uv = index.users_[static_cast<std::size_t>(u)];
    if (uv.total > 0) index.active_.push_back(u);
    const auto friends = catalog.graph.friends(u);
    if (friends.empty() || uv.total == 0) continue;
    for (const auto& [poi, count] : uv.poi_count) {
      const bool shared = std::any_of(friends.begin(), friends.end(), [&](int f) {
        const auto& fv = index.users_[static_cast<std::size_t>(f)];
        return fv.poi_count.contains(poi);
      });
      if (!shared) continue;
      uv.common_with_friends += count;
      uv.common_with_friends_by_category[catalog.poi(poi).category] += count;
    }
  }
  index.active_users_ = static_cast<int>(index.active_.size());
  return index;
}

// ---------------------------------------------------------------------------

StayStats compute_stay_stats(std::span<const Session> sessions, int num_pois) {
  // per poi: user -> (sum of stays, visits)
  std::vector<std::map<int, std::pair<double, int>>> per_poi(static_cast<std::size_t>(num_pois));
  for (const auto& s : sessions) {
    for (const auto& v : s.visits) {
      if (v.poi < 0 || v.poi >= num_pois) throw std::out_of_range("stay stats: poi out of range");
      auto& acc = per_poi[static_cast<std::size_t>(v.poi)][s.user];
      acc.first += v.stay_seconds();
      ++acc.second;
    }
  }

  StayStats stats;
  stats.mean_stay.assign(static_cast<std::size_t>(num_pois), 0.0);
  stats.observed.assign(static_cast<std::size_t>(num_pois), 0);
  double observed_sum = 0.0;
  int observed_count = 0;
  for (std::size_t i = 0; i < per_poi.size(); ++i) {
    if (per_poi[i].empty()) continue;
    double sum_of_means = 0.0;
    for (const auto& [user, acc] : per_poi[i]) sum_of_means += acc.first / acc.second;
    stats.mean_stay[i] = sum_of_means / static_cast<double>(per_poi[i].size());
    stats.observed[i] = 1;
    observed_sum += stats.mean_stay[i];
    ++observed_count;
  }
  const double global_mean = observed_count > 0 ? observed_sum / observed_count : 0.0;
  for (std::size_t i = 0; i < per_poi.size(); ++i) {
    if (!stats.observed[i]) stats.mean_stay[i] = global_mean;
  }

  stats.normalized.assign(stats.mean_stay.size(), 0.0);
  if (!stats.mean_stay.empty()) {
    const auto [lo, hi] = std::minmax_element(stats.mean_stay.begin(), stats.mean_stay.end());
    for (std::size_t i = 0; i < stats.mean_stay.size(); ++i) {
      stats.normalized[i] = min_max(stats.mean_stay[i], *lo, *hi);
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------

AstTable::AstTable(std::shared_ptr<const VisitIndex> visits, std::vector<double> stay_norm,
                   const Dataset& catalog)
    : visits_(std::move(visits)), stay_norm_(std::move(stay_norm)),
      graph_(catalog.graph), num_categories_(catalog.enc.num_categories()) {
  categories_.reserve(catalog.pois.size());
  for (const auto& p : catalog.pois) categories_.push_back(p.category);

  per_category_.resize(static_cast<std::size_t>(visits_->num_users()));
  for (int u = 0; u < visits_->num_users(); ++u) {
    const auto& uv = visits_->user(u);
    auto& table = per_category_[static_cast<std::size_t>(u)];
    for (const auto& [cat, pois] : uv.category_pois) {
      double sum = 0.0;
      for (int l : pois) {
        const double v_norm = static_cast<double>(uv.poi_count.at(l)) / uv.total;
        sum += stay_norm_[static_cast<std::size_t>(l)] / v_norm;
      }
      table[cat].first = sum;
    }
  }
  for (int u = 0; u < visits_->num_users(); ++u) {
    const auto& uv = visits_->user(u);
    auto& table = per_category_[static_cast<std::size_t>(u)];
    for (const auto& [cat, pois] : uv.category_pois) {
      double sum = 0.0;
      for (int l : pois) sum += ast_cat(u, l);
      table[cat].second = sum;
    }
  }
}

double AstTable::category_sum(int u, int category) const {
  if (u < 0 || u >= static_cast<int>(per_category_.size())) return 0.0;
  const auto& table = per_category_[static_cast<std::size_t>(u)];
  auto it = table.find(category);
  return it == table.end() ? 0.0 : it->second.first;
}

double AstTable::alpha(int u, int poi) const {
  if (u < 0 || u >= visits_->num_users()) return 0.0;
  const auto& uv = visits_->user(u);
  if (uv.total == 0) return 0.0;
  auto it = uv.category_checkins.find(poi_category(poi));
  return it == uv.category_checkins.end() ? 0.0 : static_cast<double>(it->second) / uv.total;
}

double AstTable::psi1(int u) const {
  if (u < 0 || u >= visits_->num_users() || graph_.friends(u).empty()) return 0.0;
  const auto& uv = visits_->user(u);
  if (uv.total == 0) return 1.0;  // no own history: rely on friends entirely
  return static_cast<double>(uv.common_with_friends) / uv.total;
}

double AstTable::gamma1(int u, int category) const {
  if (u < 0 || u >= visits_->num_users() || graph_.friends(u).empty()) return 0.0;
  const auto& uv = visits_->user(u);
  if (uv.total == 0) return 1.0;
  auto it = uv.common_with_friends_by_category.find(category);
  return it == uv.common_with_friends_by_category.end()
             ? 0.0
             : static_cast<double>(it->second) / uv.total;
}

double AstTable::ast_cat(int u, int poi) const {
  if (u < 0 || u >= visits_->num_users()) return 0.0;
  const auto& uv = visits_->user(u);
  if (uv.total == 0) return 0.0;
  const int cat = poi_category(poi);
  const double a = alpha(u, poi);

  double own = 0.0;
  if (auto it = uv.poi_count.find(poi); it != uv.poi_count.end()) {
    own = stay_norm_[static_cast<std::size_t>(poi)] / (static_cast<double>(it->second) / uv.total);
  }
  double categorical = 0.0;
  if (auto it = uv.category_pois.find(cat); it != uv.category_pois.end()) {
    categorical = category_sum(u, cat) / static_cast<double>(it->second.size());
  }
  return (1.0 - a) * own + a * categorical;
}

double AstTable::ast(int u, int poi) const {
  const double psi = psi1(u);
  const auto friends = graph_.friends(u);
  double social = 0.0;
  if (!friends.empty()) {
    for (int k : friends) social += ast_cat(k, poi);
    social /= static_cast<double>(friends.size());
  }
  return (1.0 - psi) * ast_cat(u, poi) + psi * social;
}

double AstTable::ast_user_category(int u, int category) const {
  auto own_sum = [&](int user) {
    if (user < 0 || user >= static_cast<int>(per_category_.size())) return 0.0;
    const auto& table = per_category_[static_cast<std::size_t>(user)];
    auto it = table.find(category);
    return it == table.end() ? 0.0 : it->second.second;
  };
  const double g = gamma1(u, category);
  double friends_sum = 0.0;
  for (int j : graph_.friends(u)) friends_sum += own_sum(j);
  return (1.0 - g) * own_sum(u) + g * friends_sum;
}

double AstTable::ast_category(int category) const {
  const auto& active = visits_->active_users();
  if (active.empty()) return 0.0;
  double sum = 0.0;
  for (int u : active) sum += ast_user_category(u, category);
  return sum / static_cast<double>(active.size());
}

AstTable compute_ast(const StayStats& stats, std::span<const Session> sessions,
                     const Dataset& catalog) {
  auto index = std::make_shared<const VisitIndex>(VisitIndex::build(sessions, catalog));
  return AstTable(std::move(index), stats.normalized, catalog);
}

// ---------------------------------------------------------------------------

PreferenceTable::PreferenceTable(AstTable ast, const Dataset& catalog,
                                 std::span<const Session> sessions)
    : ast_(std::move(ast)) {
  const auto& visits = ast_.visits();
  const int num_cats = ast_.num_categories();

  // beta: TF-IDF of the category within the user's check-in "document"
  std::vector<int> df(static_cast<std::size_t>(num_cats), 0);
  for (int u : visits.active_users()) {
    for (const auto& [cat, n] : visits.user(u).category_checkins) {
      if (n > 0) ++df[static_cast<std::size_t>(cat)];
    }
  }
  const double num_docs = static_cast<double>(visits.num_active_users());
  tfidf_norm_.assign(static_cast<std::size_t>(visits.num_users()),
                     std::vector<double>(static_cast<std::size_t>(num_cats), 0.0));
  for (int u : visits.active_users()) {
    const auto& uv = visits.user(u);
    std::vector<double> w(static_cast<std::size_t>(num_cats), 0.0);
    for (const auto& [cat, n] : uv.category_checkins) {
      const int d = df[static_cast<std::size_t>(cat)];
      const double idf = d > 0 ? std::log(num_docs / d) : 0.0;
      w[static_cast<std::size_t>(cat)] = static_cast<double>(n) / uv.total * idf;
    }
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    auto& out = tfidf_norm_[static_cast<std::size_t>(u)];
    for (std::size_t c = 0; c < w.size(); ++c) out[c] = min_max(w[c], *lo, *hi);
  }

  const int num_pois = static_cast<int>(catalog.pois.size());
  generalized_.assign(static_cast<std::size_t>(num_pois) * kHours, 0.0);
  const auto& active = visits.active_users();
  if (!active.empty()) {
    for (int l = 0; l < num_pois; ++l) {
      for (int t = 0; t < kHours; ++t) {
        double sum = 0.0;
        for (int u : active) sum += personalized(u, l, t);
        generalized_[static_cast<std::size_t>(l) * kHours + static_cast<std::size_t>(t)] =
            sum / static_cast<double>(active.size());
      }
    }
  }
  constraints_ = default_constraints(catalog, sessions);
}

double PreferenceTable::beta(int u, int poi) const {
  if (u < 0 || u >= static_cast<int>(tfidf_norm_.size())) return 0.0;
  return tfidf_norm_[static_cast<std::size_t>(u)][static_cast<std::size_t>(ast_.poi_category(poi))];
}

double PreferenceTable::personalized(int u, int poi, int hour) const {
  const auto& uv = ast_.visits().user(u);
  const double th = theta(u, poi);
  const double b = beta(u, poi);
  const auto h = static_cast<std::size_t>(hour);

  double frequency = 0.0;
  if (auto it = uv.poi_count.find(poi); it != uv.poi_count.end()) {
    frequency = static_cast<double>(uv.poi_hour_count.at(poi)[h]) / it->second;
  }
  double categorical = 0.0;
  if (auto it = uv.category_pois.find(ast_.poi_category(poi)); it != uv.category_pois.end()) {
    for (int l : it->second) {
      categorical += static_cast<double>(uv.poi_hour_count.at(l)[h]) / uv.poi_count.at(l);
    }
    categorical /= static_cast<double>(it->second.size());
  }
  return b * ((1.0 - th) * frequency + th * categorical) + (1.0 - b) * ast_.ast(u, poi);
}

double PreferenceTable::ps(int u, int poi, int hour) const {
  hour = ((hour % kHours) + kHours) % kHours;
  const auto& visits = ast_.visits();
  if (u < 0 || u >= visits.num_users() ||
      (visits.user(u).total == 0 && ast_.graph().friends(u).empty())) {
    return generalized(poi, hour);
  }
  return personalized(u, poi, hour);
}

double PreferenceTable::generalized(int poi, int hour) const {
  hour = ((hour % kHours) + kHours) % kHours;
  return generalized_.at(static_cast<std::size_t>(poi) * kHours + static_cast<std::size_t>(hour));
}

double PreferenceTable::constraint_mean(int poi, int current) const {
  if (constraints_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : constraints_) sum += std::clamp(c.measure(poi, current), 0.0, 1.0);
  return sum / static_cast<double>(constraints_.size());
}

double PreferenceTable::consolidated(int u, int poi, int hour, int current) const {
  return ps(u, poi, hour) * (1.0 - constraint_mean(poi, current));
}

void PreferenceTable::set_constraints(std::vector<Constraint> constraints) {
  constraints_ = std::move(constraints);
}

std::vector<Constraint> PreferenceTable::default_constraints(const Dataset& catalog,
                                                             std::span<const Session> sessions) {
  struct Ranges {
    std::vector<double> lo, hi;
    double global_lo = std::numeric_limits<double>::infinity();
    double global_hi = -std::numeric_limits<double>::infinity();
    std::vector<geo::LatLon> where;
  };
  auto r = std::make_shared<Ranges>();
  const std::size_t n = catalog.pois.size();
  r->lo.assign(n, std::numeric_limits<double>::infinity());
  r->hi.assign(n, -std::numeric_limits<double>::infinity());
  for (const auto& p : catalog.pois) r->where.push_back(p.where);
  for (const auto& s : sessions) {
    for (std::size_t i = 1; i < s.visits.size(); ++i) {
      const int from = s.visits[i - 1].poi;
      const int to = s.visits[i].poi;
      if (from == to) continue;
      const double d = catalog.distance_km(from, to);
      auto& lo = r->lo[static_cast<std::size_t>(to)];
      auto& hi = r->hi[static_cast<std::size_t>(to)];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      r->global_lo = std::min(r->global_lo, d);
      r->global_hi = std::max(r->global_hi, d);
    }
  }
  auto range_of = [r](int target) {
    const auto t = static_cast<std::size_t>(target);
    if (std::isfinite(r->lo[t])) return std::pair{r->lo[t], r->hi[t]};
    if (std::isfinite(r->global_lo)) return std::pair{r->global_lo, r->global_hi};
    return std::pair{0.0, 0.0};
  };
  auto distance = [r](int a, int b) {
    return geo::haversine_km(r->where[static_cast<std::size_t>(a)],
                             r->where[static_cast<std::size_t>(b)]);
  };

  std::vector<Constraint> out;
  out.push_back({"distance", [=](int target, int current) {
                   const auto [lo, hi] = range_of(target);
                   return std::clamp(min_max(distance(current, target), lo, hi), 0.0, 1.0);
                 }});
  out.push_back({"travel_time", [=](int target, int current) {
                   const auto [lo, hi] = range_of(target);
                   return std::clamp(min_max(geo::walking_seconds(distance(current, target)),
                                             geo::walking_seconds(lo), geo::walking_seconds(hi)),
                                     0.0, 1.0);
                 }});
  return out;
}

PreferenceTable compute_preference(const AstTable& ast, std::span<const Session> sessions,
                                   const Dataset& catalog) {
  return PreferenceTable(ast, catalog, sessions);
}

// ---------------------------------------------------------------------------

std::vector<std::array<double, kHours>> temporal_popularity(std::span<const Session> sessions,
                                                            int num_pois) {
  std::vector<std::array<double, kHours>> counts(static_cast<std::size_t>(num_pois));
  for (auto& c : counts) c.fill(0.0);
  double max = 0.0;
  for (const auto& s : sessions) {
    for (const auto& v : s.visits) {
      auto& cell = counts.at(static_cast<std::size_t>(v.poi))[static_cast<std::size_t>(hour_of(v))];
      cell += 1.0;
      max = std::max(max, cell);
    }
  }
  if (max > 0.0) {
    for (auto& c : counts) {
      for (double& x : c) x /= max;
    }
  }
  return counts;
}

// ---------------------------------------------------------------------------

AttributeTables::AttributeTables(const StayStats& stay, const PreferenceTable& pref,
                                 const Dataset& catalog, std::span<const Session> sessions)
    : num_categories_(catalog.enc.num_categories()), mean_stay_(stay.mean_stay),
      stay_norm_(stay.normalized) {
  const int num_pois = static_cast<int>(catalog.pois.size());
  for (const auto& p : catalog.pois) {
    where_.push_back(p.where);
    category_.push_back(p.category);
  }

  const auto& ast = pref.ast();
  const auto& active = ast.visits().active_users();
  ast_poi_.assign(static_cast<std::size_t>(num_pois), 0.0);
  if (!active.empty()) {
    for (int l = 0; l < num_pois; ++l) {
      double sum = 0.0;
      for (int u : active) sum += ast.ast(u, l);
      ast_poi_[static_cast<std::size_t>(l)] = sum / static_cast<double>(active.size());
    }
  }

  ast_cat_hour_.assign(static_cast<std::size_t>(num_categories_), {});
  for (int t = 0; t < kHours; ++t) {
    auto index = std::make_shared<const VisitIndex>(VisitIndex::build(sessions, catalog, t));
    const AstTable at_hour(std::move(index), stay.normalized, catalog);
    for (int c = 0; c < num_categories_; ++c) {
      ast_cat_hour_[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)] =
          at_hour.ast_category(c);
    }
  }

  ps_general_.resize(static_cast<std::size_t>(num_pois));
  for (int l = 0; l < num_pois; ++l) {
    for (int t = 0; t < kHours; ++t) {
      ps_general_[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)] = pref.generalized(l, t);
    }
  }
  popularity_ = temporal_popularity(sessions, num_pois);

  for (double v : ast_poi_) max_ast_ = std::max(max_ast_, v);
  for (const auto& row : ast_cat_hour_) {
    for (double v : row) max_ast_cat_hour_ = std::max(max_ast_cat_hour_, v);
  }
  for (const auto& row : ps_general_) {
    for (double v : row) max_ps_ = std::max(max_ps_, v);
  }
}

double AttributeTables::distance_km(int a, int b) const {
  return geo::haversine_km(where_.at(static_cast<std::size_t>(a)),
                           where_.at(static_cast<std::size_t>(b)));
}

AttributeVector AttributeTables::attribute_vector(int poi, int hour,
                                                  std::optional<int> prev_poi) const {
  if (poi < 0 || poi >= num_pois()) {
    throw std::out_of_range("attribute_vector: unknown poi " + std::to_string(poi));
  }
  const auto l = static_cast<std::size_t>(poi);
  const auto t = static_cast<std::size_t>(((hour % kHours) + kHours) % kHours);
  AttributeVector a;
  a.stay_norm = stay_norm_[l];
  a.ast = ast_poi_[l];
  a.category = category_[l];
  a.ast_cat_hour = ast_cat_hour_[static_cast<std::size_t>(a.category)][t];
  a.ps = ps_general_[l][t];
  a.popularity = popularity_[l];
  a.dist_prev_km = prev_poi ? distance_km(*prev_poi, poi) : 0.0;
  return a;
}

std::array<double, kAttributeDim> AttributeTables::encode(const AttributeVector& a) const {
  std::array<double, kAttributeDim> x{};
  x[0] = a.stay_norm;
  x[1] = scaled(a.ast, max_ast_);
  x[2] = scaled(a.ast_cat_hour, max_ast_cat_hour_);
  x[3] = scaled(a.ps, max_ps_);
  x[4] = scaled(a.category, num_categories_ - 1);
  for (int h = 0; h < kHours; ++h) x[5 + static_cast<std::size_t>(h)] = a.popularity[static_cast<std::size_t>(h)];
  x[kAttributeDim - 1] = a.dist_prev_km / (1.0 + a.dist_prev_km);
  return x;
}

std::array<double, kFeatureDim> AttributeTables::encode(const FeatureVector& f) const {
  return {scaled(f.cat_start, num_categories_ - 1),
          scaled(f.cat_end, num_categories_ - 1),
          scaled(f.loc_start, num_pois() - 1),
          scaled(f.loc_end, num_pois() - 1),
          f.mean_dist_km / (1.0 + f.mean_dist_km),
          f.hour_start / static_cast<double>(kHours),
          f.hour_end / static_cast<double>(kHours)};
}

FeatureVector AttributeTables::feature_vector(std::span<const Visit> visits) const {
  if (visits.empty()) throw std::invalid_argument("feature_vector: empty sequence");
  FeatureVector f;
  f.loc_start = visits.front().poi;
  f.loc_end = visits.back().poi;
  f.cat_start = category(f.loc_start);
  f.cat_end = category(f.loc_end);
  f.hour_start = visits.front().arrival_hour();
  f.hour_end = visits.back().arrival_hour();
  if (visits.size() > 1) {
    double total = 0.0;
    for (std::size_t i = 1; i < visits.size(); ++i) {
      total += distance_km(visits[i - 1].poi, visits[i].poi);
    }
    f.mean_dist_km = total / static_cast<double>(visits.size() - 1);
  }
  return f;
}

void AttributeTables::save(const std::filesystem::path& path) const {
  using nlohmann::json;
  json j;
  j["format"] = "caps-attribute-tables";
  j["version"] = 1;
  json pois = json::array();
  for (std::size_t i = 0; i < where_.size(); ++i) {
    pois.push_back({{"lat", where_[i].lat},
                    {"lon", where_[i].lon},
                    {"category", category_[i]},
                    {"mean_stay", mean_stay_[i]},
                    {"stay_norm", stay_norm_[i]},
                    {"ast", ast_poi_[i]},
                    {"ps", ps_general_[i]},
                    {"popularity", popularity_[i]}});
  }
  j["pois"] = std::move(pois);
  j["num_categories"] = num_categories_;
  j["ast_category_hour"] = ast_cat_hour_;
  j["max"] = {{"ast", max_ast_}, {"ast_category_hour", max_ast_cat_hour_}, {"ps", max_ps_}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

AttributeTables AttributeTables::load(const std::filesystem::path& path) {
  using nlohmann::json;
  std::ifstream in(path);
  if (!in) throw DataError("cannot read feature snapshot " + path.string());
  AttributeTables t;
  try {
    const json j = json::parse(in);
    if (j.at("format") != "caps-attribute-tables") throw DataError("not a feature snapshot");
    for (const auto& p : j.at("pois")) {
      t.where_.push_back({p.at("lat").get<double>(), p.at("lon").get<double>()});
      t.category_.push_back(p.at("category").get<int>());
      t.mean_stay_.push_back(p.at("mean_stay").get<double>());
      t.stay_norm_.push_back(p.at("stay_norm").get<double>());
      t.ast_poi_.push_back(p.at("ast").get<double>());
      t.ps_general_.push_back(p.at("ps").get<std::array<double, kHours>>());
      t.popularity_.push_back(p.at("popularity").get<std::array<double, kHours>>());
    }
    t.num_categories_ = j.at("num_categories").get<int>();
    t.ast_cat_hour_ = j.at("ast_category_hour").get<std::vector<std::array<double, kHours>>>();
    t.max_ast_ = j.at("max").at("ast").get<double>();
    t.max_ast_cat_hour_ = j.at("max").at("ast_category_hour").get<double>();
    t.max_ps_ = j.at("max").at("ps").get<double>();
  } catch (const json::exception& e) {
    throw DataError("malformed feature snapshot " + path.string() + ": " + e.what());
  }
  return t;
}

FeatureTables build_feature_tables(const Dataset& catalog, std::span<const Session> sessions) {
  FeatureTables tables;
  tables.stay = compute_stay_stats(sessions, static_cast<int>(catalog.pois.size()));
  const AstTable ast = compute_ast(tables.stay, sessions, catalog);
  tables.pref = compute_preference(ast, sessions, catalog);
  tables.attrs = AttributeTables(tables.stay, tables.pref, catalog, sessions);
  return tables;
}

}  // namespace caps
