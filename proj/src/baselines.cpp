#include "caps/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "caps/geo.hpp"

namespace caps {

// ---------------------------------------------------------------------------

PopularityModel::PopularityModel(const Dataset& catalog, std::span<const Session> sessions) {
  for (const auto& p : catalog.pois) where_.push_back(p.where);
  counts_.assign(where_.size(), 0);
  for (const auto& s : sessions) {
    for (const auto& v : s.visits) ++counts_.at(static_cast<std::size_t>(v.poi));
  }
}

PopularityPick PopularityModel::next(int current, const std::set<int>& exclusions,
                                     double radius_km, double growth) const {
  if (radius_km <= 0.0 || growth <= 1.0) {
    throw std::invalid_argument("popularity: radius must be > 0 and growth > 1");
  }
  const auto here = where_.at(static_cast<std::size_t>(current));
  std::vector<double> dist(where_.size());
  double farthest = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < where_.size(); ++i) {
    dist[i] = geo::haversine_km(here, where_[i]);
    if (!exclusions.contains(static_cast<int>(i))) {
      any = true;
      farthest = std::max(farthest, dist[i]);
    }
  }
  if (!any) throw std::runtime_error("popularity: every POI is excluded");

  PopularityPick pick;
  pick.radius_km = radius_km;
  for (;;) {
    for (std::size_t i = 0; i < where_.size(); ++i) {
      if (dist[i] > pick.radius_km || exclusions.contains(static_cast<int>(i))) continue;
      if (pick.poi < 0 || counts_[i] > counts_[static_cast<std::size_t>(pick.poi)]) {
        pick.poi = static_cast<int>(i);
      }
    }
    if (pick.poi >= 0) return pick;
    pick.radius_km *= growth;
    ++pick.expansions;
  }
}

std::vector<int> PopularityModel::generate(int start, int length, double radius_km,
                                           double growth) const {
  std::vector<int> seq{start};
  if (where_.size() < 2) {
    seq.resize(static_cast<std::size_t>(std::max(length, 1)), start);
    return seq;
  }
  std::set<int> exclusions{start};
  while (static_cast<int>(seq.size()) < length) {
    if (exclusions.size() >= where_.size()) exclusions = {seq.back()};
    const int next = this->next(seq.back(), exclusions, radius_km, growth).poi;
    seq.push_back(next);
    exclusions.insert(next);
  }
  return seq;
}

// ---------------------------------------------------------------------------

MarkovModel MarkovModel::fit(std::span<const Session> sessions, double smoothing) {
  if (smoothing < 0.0) throw std::invalid_argument("markov: smoothing must be >= 0");
  MarkovModel m;
  m.smoothing_ = smoothing;
  auto add = [](Chain& c, const Session& s) {
    ++c.starts[s.visits.front().poi];
    for (std::size_t i = 0; i < s.visits.size(); ++i) {
      c.alphabet.push_back(s.visits[i].poi);
      if (i + 1 < s.visits.size()) ++c.transitions[s.visits[i].poi][s.visits[i + 1].poi];
    }
  };
  for (const auto& s : sessions) {
    if (s.visits.empty()) continue;
    add(m.users_[s.user], s);
    add(m.population_, s);
  }
  auto finish = [](Chain& c) {
    std::sort(c.alphabet.begin(), c.alphabet.end());
    c.alphabet.erase(std::unique(c.alphabet.begin(), c.alphabet.end()), c.alphabet.end());
  };
  for (auto& [u, c] : m.users_) finish(c);
  finish(m.population_);
  return m;
}

const MarkovModel::Chain& MarkovModel::chain(int user) const {
  auto it = users_.find(user);
  return it == users_.end() ? population_ : it->second;
}

namespace {

std::vector<std::pair<int, double>> smoothed(const std::vector<int>& alphabet,
                                             const std::map<int, int>* counts, double lambda) {
  std::vector<std::pair<int, double>> row;
  if (alphabet.empty()) return row;
  double total = 0.0;
  if (counts) {
    for (const auto& [to, n] : *counts) total += n;
  }
  const double denom = total + lambda * static_cast<double>(alphabet.size());
  for (int b : alphabet) {
    double c = 0.0;
    if (counts) {
      auto it = counts->find(b);
      if (it != counts->end()) c = it->second;
    }
    row.emplace_back(b, denom > 0.0 ? (c + lambda) / denom : 1.0 / static_cast<double>(alphabet.size()));
  }
  return row;
}

}  // namespace

std::vector<std::pair<int, double>> MarkovModel::transition_row(int user, int from) const {
  const Chain& c = chain(user);
  auto it = c.transitions.find(from);
  return smoothed(c.alphabet, it == c.transitions.end() ? nullptr : &it->second, smoothing_);
}

std::vector<std::pair<int, double>> MarkovModel::initial(int user) const {
  const Chain& c = chain(user);
  return smoothed(c.alphabet, &c.starts, smoothing_);
}

std::vector<int> MarkovModel::generate(int user, int start, int length, num::Rng& rng) const {
  std::vector<int> seq{start};
  while (static_cast<int>(seq.size()) < length) {
    const auto row = transition_row(user, seq.back());
    if (row.empty()) {
      seq.push_back(seq.back());
      continue;
    }
    std::vector<double> w;
    w.reserve(row.size());
    for (const auto& [poi, p] : row) w.push_back(p);
    seq.push_back(row[rng.categorical(w)].first);
  }
  return seq;
}

// ---------------------------------------------------------------------------

AprioriModel::AprioriModel(std::shared_ptr<const FeatureTables> tables)
    : tables_(std::move(tables)), cache_(tables_->pref, tables_->attrs.num_pois()) {}

double AprioriModel::consolidated(int user, int poi, int hour, int current) const {
  return cache_.ps(user, poi, hour) * (1.0 - tables_->pref.constraint_mean(poi, current));
}

Trip AprioriModel::evaluate(int user, std::span<const int> pois, int start_hour) const {
  const auto& attrs = tables_->attrs;
  Trip trip;
  trip.pois.assign(pois.begin(), pois.end());
  double elapsed = 0.0;
  for (std::size_t i = 0; i < pois.size(); ++i) {
    if (i > 0) {
      const double tt = geo::walking_seconds(attrs.distance_km(pois[i - 1], pois[i]));
      trip.travel_seconds += tt;
      elapsed += attrs.mean_stay_seconds(pois[i - 1]) + tt;
    }
    const int hour = static_cast<int>(std::floor(start_hour + elapsed / 3600.0)) % kHours;
    const int current = i > 0 ? pois[i - 1] : pois[i];
    trip.score += consolidated(user, pois[i], hour, current);
  }
  trip.elapsed_seconds = elapsed;
  return trip;
}

bool AprioriModel::feasible(std::span<const int> pois, const AprioriConfig& config) const {
  const auto& attrs = tables_->attrs;
  double elapsed = 0.0;
  for (std::size_t i = 1; i < pois.size(); ++i) {
    const double d = attrs.distance_km(pois[i - 1], pois[i]);
    if (d > config.epsilon_km) return false;
    elapsed += attrs.mean_stay_seconds(pois[i - 1]) + geo::walking_seconds(d);
  }
  std::vector<int> sorted(pois.begin(), pois.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  return elapsed <= config.budget_seconds;
}

std::vector<Trip> AprioriModel::generate(int user, int start, int start_hour, int max_length,
                                         const AprioriConfig& config) const {
  if (config.epsilon_km <= 0.0) throw std::invalid_argument("apriori: epsilon must be > 0");
  if (config.k < 1 || config.beam < 1) throw std::invalid_argument("apriori: k and beam must be >= 1");
  const auto& attrs = tables_->attrs;
  const int n = attrs.num_pois();

  struct Partial {
    Trip trip;
    int hour;  // arrival hour at the last POI
  };
  auto better = [](const Partial& a, const Partial& b) {
    // scores equal up to summation order count as ties
    const auto sa = std::llround(a.trip.score * 1e10), sb = std::llround(b.trip.score * 1e10);
    if (sa != sb) return sa > sb;
    if (a.trip.travel_seconds != b.trip.travel_seconds) {
      return a.trip.travel_seconds < b.trip.travel_seconds;
    }
    return a.trip.pois < b.trip.pois;
  };

  Partial root;
  root.trip.pois = {start};
  root.hour = ((start_hour % kHours) + kHours) % kHours;
  root.trip.score = consolidated(user, start, root.hour, start);
  std::vector<Partial> level{root};

  for (int len = 1; len < max_length; ++len) {
    std::vector<Partial> next;
    for (const auto& p : level) {
      const int last = p.trip.pois.back();
      const double stay = attrs.mean_stay_seconds(last);
      for (int c = 0; c < n; ++c) {
        if (std::find(p.trip.pois.begin(), p.trip.pois.end(), c) != p.trip.pois.end()) continue;
        const double d = attrs.distance_km(last, c);
        if (d > config.epsilon_km) continue;
        const double tt = geo::walking_seconds(d);
        const double elapsed = p.trip.elapsed_seconds + stay + tt;
        if (elapsed > config.budget_seconds) continue;
        Partial q;
        q.trip.pois = p.trip.pois;
        q.trip.pois.push_back(c);
        q.trip.travel_seconds = p.trip.travel_seconds + tt;
        q.trip.elapsed_seconds = elapsed;
        q.hour = static_cast<int>(std::floor(start_hour + elapsed / 3600.0)) % kHours;
        q.trip.score = p.trip.score + consolidated(user, c, q.hour, last);
        next.push_back(std::move(q));
      }
    }
    if (next.empty()) break;
    std::sort(next.begin(), next.end(), better);
    if (!config.exhaustive && static_cast<int>(next.size()) > config.beam) {
      next.resize(static_cast<std::size_t>(config.beam));
    }
    level = std::move(next);
  }

  std::sort(level.begin(), level.end(), better);
  std::vector<Trip> out;
  for (std::size_t i = 0; i < level.size() && static_cast<int>(out.size()) < config.k; ++i) {
    out.push_back(level[i].trip);
  }
  return out;
}

// ---------------------------------------------------------------------------

HitsScores hits_power_iteration(const std::vector<std::vector<double>>& m, int max_iter,
                                double tol) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  HitsScores s;
  s.hub.assign(rows, rows ? 1.0 / std::sqrt(static_cast<double>(rows)) : 0.0);
  s.authority.assign(cols, 0.0);
  auto normalize = [](std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n > 0.0) {
      for (double& x : v) x /= n;
    }
  };
  auto change = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(d);
  };
  for (int it = 0; it < max_iter; ++it) {
    std::vector<double> a(cols, 0.0), h(rows, 0.0);
    for (std::size_t u = 0; u < rows; ++u) {
      for (std::size_t l = 0; l < cols; ++l) a[l] += m[u][l] * s.hub[u];
    }
    normalize(a);
    for (std::size_t u = 0; u < rows; ++u) {
      for (std::size_t l = 0; l < cols; ++l) h[u] += m[u][l] * a[l];
    }
    normalize(h);
    const bool done = change(a, s.authority) < tol && change(h, s.hub) < tol;
    s.authority = std::move(a);
    s.hub = std::move(h);
    s.iterations = it + 1;
    if (done) break;
  }
  return s;
}

HitsModel HitsModel::fit(const Dataset& catalog, std::span<const Session> sessions,
                         double radius_km) {
  HitsModel m;
  const int n = static_cast<int>(catalog.pois.size());
  m.region_of_.assign(static_cast<std::size_t>(n), -1);
  for (int p = 0; p < n; ++p) {
    for (std::size_t r = 0; r < m.regions_.size(); ++r) {
      if (catalog.distance_km(m.regions_[r].leader, p) <= radius_km) {
        m.region_of_[static_cast<std::size_t>(p)] = static_cast<int>(r);
        m.regions_[r].pois.push_back(p);
        break;
      }
    }
    if (m.region_of_[static_cast<std::size_t>(p)] < 0) {
      m.region_of_[static_cast<std::size_t>(p)] = static_cast<int>(m.regions_.size());
      m.regions_.push_back(Region{p, {p}, {}, {}, {}});
    }
  }

  m.visited_by_.assign(static_cast<std::size_t>(n), {});
  std::vector<std::map<std::pair<int, int>, double>> counts(m.regions_.size());  // (user, poi)
  for (const auto& s : sessions) {
    std::vector<int> pois;
    for (const auto& v : s.visits) {
      pois.push_back(v.poi);
      m.visited_by_[static_cast<std::size_t>(v.poi)].insert(s.user);
      counts[static_cast<std::size_t>(m.region_of(v.poi))][{s.user, v.poi}] += 1.0;
    }
    m.sessions_.push_back(std::move(pois));
  }

  for (std::size_t r = 0; r < m.regions_.size(); ++r) {
    auto& region = m.regions_[r];
    if (counts[r].empty()) {
      m.warnings_.push_back("region " + std::to_string(r) + " has no visits; skipped");
      continue;
    }
    std::set<int> users;
    for (const auto& [key, c] : counts[r]) users.insert(key.first);
    region.users.assign(users.begin(), users.end());
    std::map<int, std::size_t> row, col;
    for (std::size_t i = 0; i < region.users.size(); ++i) row[region.users[i]] = i;
    for (std::size_t j = 0; j < region.pois.size(); ++j) col[region.pois[j]] = j;
    std::vector<std::vector<double>> adj(region.users.size(),
                                         std::vector<double>(region.pois.size(), 0.0));
    for (const auto& [key, c] : counts[r]) adj[row[key.first]][col[key.second]] = c;
    const HitsScores s = hits_power_iteration(adj);
    for (std::size_t i = 0; i < region.users.size(); ++i) region.hub[region.users[i]] = s.hub[i];
    for (std::size_t j = 0; j < region.pois.size(); ++j) {
      region.authority[region.pois[j]] = s.authority[j];
    }
  }
  return m;
}

double HitsModel::score(std::span<const int> pois) const {
  if (pois.empty()) return 0.0;
  const Region& region = regions_.at(static_cast<std::size_t>(region_of(pois.front())));
  double authority = 0.0;
  for (int p : pois) {
    auto it = region.authority.find(p);
    if (it != region.authority.end()) authority += it->second;
  }
  std::set<int> users;
  for (std::size_t i = 0; i < pois.size(); ++i) {
    for (std::size_t j = i + 1; j < pois.size(); ++j) {
      if (pois[i] == pois[j]) continue;
      const auto& a = visited_by_[static_cast<std::size_t>(pois[i])];
      const auto& b = visited_by_[static_cast<std::size_t>(pois[j])];
      for (int u : a) {
        if (b.contains(u)) users.insert(u);
      }
    }
  }
  if (users.empty()) return 0.0;
  double hub = 0.0;
  for (int u : users) {
    auto it = region.hub.find(u);
    if (it != region.hub.end()) hub += it->second;
  }
  return authority * hub / static_cast<double>(users.size());
}

std::vector<std::vector<int>> HitsModel::candidates(int start, int length) const {
  if (length <= 1) return {{start}};
  const int region = region_of(start);
  auto in_region = [&](std::span<const int> w) {
    return std::all_of(w.begin(), w.end(), [&](int p) { return region_of(p) == region; });
  };
  std::vector<std::vector<int>> pool;
  std::set<std::vector<int>> seen;
  auto collect = [&](std::size_t width, bool must_start) {
    for (const auto& s : sessions_) {
      for (std::size_t b = 0; b + width <= s.size(); ++b) {
        std::span<const int> w(s.data() + b, width);
        if (must_start && w.front() != start) continue;
        if (!in_region(w)) continue;
        std::vector<int> cand;
        if (!must_start) cand.push_back(start);
        cand.insert(cand.end(), w.begin(), w.end());
        if (seen.insert(cand).second) pool.push_back(std::move(cand));
      }
    }
  };
  collect(static_cast<std::size_t>(length), true);
  if (pool.empty()) collect(static_cast<std::size_t>(length - 1), false);
  if (!pool.empty()) return pool;

  const Region& r = regions_.at(static_cast<std::size_t>(region));
  std::vector<std::pair<double, int>> by_authority;
  for (const auto& [poi, a] : r.authority) {
    if (poi != start) by_authority.emplace_back(-a, poi);
  }
  std::sort(by_authority.begin(), by_authority.end());
  std::vector<int> greedy{start};
  for (const auto& [neg, poi] : by_authority) {
    if (static_cast<int>(greedy.size()) >= length) break;
    greedy.push_back(poi);
  }
  return {greedy};
}

std::vector<std::vector<int>> HitsModel::rank(std::vector<std::vector<int>> candidates,
                                              int k) const {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < candidates.size(); ++i) scored.emplace_back(score(candidates[i]), i);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < scored.size() && static_cast<int>(out.size()) < k; ++i) {
    out.push_back(std::move(candidates[scored[i].second]));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<int>> PopularityRecommender::recommend(const Query& q) const {
  return {model_.generate(q.start_poi, q.length, radius_km_, growth_)};
}

std::vector<std::vector<int>> MarkovRecommender::recommend(const Query& q) const {
  num::Rng rng(q.seed);
  return {model_.generate(q.user, q.start_poi, q.length, rng)};
}

std::vector<std::vector<int>> AprioriRecommender::recommend(const Query& q) const {
  std::vector<std::vector<int>> out;
  for (auto& t : model_.generate(q.user, q.start_poi, q.start_hour, q.length, config_)) {
    out.push_back(std::move(t.pois));
  }
  return out;
}

std::vector<std::vector<int>> HitsRecommender::recommend(const Query& q) const {
  return model_.rank(model_.candidates(q.start_poi, q.length), 1);
}

}  // namespace caps
