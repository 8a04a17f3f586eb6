#include "caps/checkin_data.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "caps/error.hpp"

namespace caps {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<double> parse_double(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct ColumnMap {
  int user = -1, poi = -1, datetime = -1, lat = -1, lon = -1, city = -1, category = -1;
};

ColumnMap map_columns(const std::vector<std::string>& header, CsvFormat format) {
  static const std::map<std::string, int ColumnMap::*> aliases = {
      {"userid", &ColumnMap::user},         {"user_id", &ColumnMap::user},
      {"user", &ColumnMap::user},           {"placeid", &ColumnMap::poi},
      {"place_id", &ColumnMap::poi},        {"poi_id", &ColumnMap::poi},
      {"poiid", &ColumnMap::poi},           {"venueid", &ColumnMap::poi},
      {"locationid", &ColumnMap::poi},      {"location_id", &ColumnMap::poi},
      {"location id", &ColumnMap::poi},     {"datetime", &ColumnMap::datetime},
      {"timestamp", &ColumnMap::datetime},  {"time", &ColumnMap::datetime},
      {"checkin_time", &ColumnMap::datetime}, {"check-in time", &ColumnMap::datetime},
      {"utc_time", &ColumnMap::datetime},   {"lat", &ColumnMap::lat},
      {"latitude", &ColumnMap::lat},        {"lon", &ColumnMap::lon},
      {"lng", &ColumnMap::lon},             {"longitude", &ColumnMap::lon},
      {"city", &ColumnMap::city},           {"category", &ColumnMap::category},
      {"venue_category", &ColumnMap::category}, {"category_name", &ColumnMap::category},
  };
  (void)format;
  ColumnMap cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto it = aliases.find(lower(trim(header[i])));
    if (it != aliases.end() && cols.*(it->second) < 0) cols.*(it->second) = static_cast<int>(i);
  }
  const std::pair<int, const char*> required[] = {
      {cols.user, "userid"}, {cols.poi, "placeid"}, {cols.datetime, "datetime"},
      {cols.lat, "lat"},     {cols.lon, "lon"},     {cols.category, "category"}};
  for (const auto& [index, name] : required) {
    if (index < 0) throw DataError(std::string("check-in header lacks column '") + name + "'");
  }
  return cols;
}

std::optional<std::int64_t> parse_timestamp(const std::string& text, CsvFormat format) {
  if (auto t = parse_utc_datetime(text)) return t;
  if (format == CsvFormat::gowalla) {
    // Some Gowalla dumps carry raw epoch seconds.
    if (auto v = parse_double(text); v && *v == std::floor(*v)) return static_cast<std::int64_t>(*v);
  }
  return std::nullopt;
}

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

CsvFormat parse_format(const std::string& name) {
  const std::string n = lower(name);
  if (n == "weeplaces") return CsvFormat::weeplaces;
  if (n == "gowalla") return CsvFormat::gowalla;
  throw std::invalid_argument("unknown check-in format '" + name + "' (weeplaces|gowalla)");
}

std::optional<std::int64_t> parse_utc_datetime(const std::string& raw) {
  const std::string text = trim(raw);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &s,
                  &consumed) != 7) {
    return std::nullopt;
  }
  if (sep != 'T' && sep != ' ') return std::nullopt;
  const std::string rest = text.substr(static_cast<std::size_t>(consumed));
  if (!(rest.empty() || rest == "Z" || rest == "+00:00")) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60 || h < 0 || mi < 0 || s < 0) return std::nullopt;
  const auto days_since = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days_since) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_utc_datetime(std::int64_t seconds) {
  using namespace std::chrono;
  const std::int64_t days = seconds >= 0 ? seconds / 86400 : (seconds - 86399) / 86400;
  const std::int64_t rem = seconds - days * 86400;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60),
                static_cast<int>(rem % 60));
  return buf;
}

ParseResult parse_checkins(std::istream& in, CsvFormat format) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("check-in file is empty (header row required)");
  const ColumnMap cols = map_columns(split_csv_line(line), format);
  const int needed =
      std::max({cols.user, cols.poi, cols.datetime, cols.lat, cols.lon, cols.category});

  ParseResult result;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++result.rows;
    const auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) <= needed) {
      ++result.dropped;
      continue;
    }
    CheckinRecord r;
    r.user_id = trim(f[static_cast<std::size_t>(cols.user)]);
    r.poi_id = trim(f[static_cast<std::size_t>(cols.poi)]);
    r.category = trim(f[static_cast<std::size_t>(cols.category)]);
    const auto ts = parse_timestamp(f[static_cast<std::size_t>(cols.datetime)], format);
    const auto lat = parse_double(f[static_cast<std::size_t>(cols.lat)]);
    const auto lon = parse_double(f[static_cast<std::size_t>(cols.lon)]);
    if (r.user_id.empty() || r.poi_id.empty() || r.category.empty() || !ts || *ts <= 0 || !lat ||
        !lon || *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
      ++result.dropped;
      continue;
    }
    r.timestamp = *ts;
    r.lat = *lat;
    r.lon = *lon;
    if (cols.city >= 0 && cols.city < static_cast<int>(f.size())) {
      std::string city = trim(f[static_cast<std::size_t>(cols.city)]);
      if (!city.empty()) r.city = std::move(city);
    }
    result.records.push_back(std::move(r));
  }
  if (result.rows > 0 && result.dropped * 2 > result.rows) {
    throw DataError("dropped " + std::to_string(result.dropped) + " of " +
                    std::to_string(result.rows) +
                    " check-in rows as malformed; check the column schema");
  }
  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const CheckinRecord& a, const CheckinRecord& b) {
                     if (a.user_id != b.user_id) return a.user_id < b.user_id;
                     return a.timestamp < b.timestamp;
                   });
  return result;
}

ParseResult parse_checkins(const std::filesystem::path& path, CsvFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read check-in file " + path.string());
  return parse_checkins(in, format);
}

std::vector<std::pair<std::string, std::string>> parse_friendships(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read friendship file " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::pair<std::string, std::string>> edges;
  while (std::getline(in, line)) {
    auto f = split_csv_line(line);
    if (f.size() < 2) continue;
    std::string a = trim(f[0]), b = trim(f[1]);
    if (a.empty() || b.empty()) continue;
    edges.emplace_back(std::move(a), std::move(b));
  }
  return edges;
}

void write_checkins_csv(std::ostream& out, std::span<const CheckinRecord> records) {
  out << "userid,placeid,datetime,lat,lon,city,category\n";
  char coord[64];
  for (const auto& r : records) {
    std::snprintf(coord, sizeof coord, "%.6f,%.6f", r.lat, r.lon);
    out << csv_escape(r.user_id) << ',' << csv_escape(r.poi_id) << ','
        << format_utc_datetime(r.timestamp) << ',' << coord << ','
        << csv_escape(r.city.value_or("")) << ',' << csv_escape(r.category) << '\n';
  }
}

// ---------------------------------------------------------------------------

int Encodings::add(std::vector<std::string>& ids, std::unordered_map<std::string, int>& index,
                   const std::string& id) {
  auto [it, inserted] = index.try_emplace(id, static_cast<int>(ids.size()));
  if (inserted) ids.push_back(id);
  return it->second;
}

int Encodings::add_user(const std::string& id) { return add(users_, user_index_, id); }
int Encodings::add_poi(const std::string& id) { return add(pois_, poi_index_, id); }
int Encodings::add_category(const std::string& id) {
  return add(categories_, category_index_, id);
}

namespace {
std::optional<int> lookup(const std::unordered_map<std::string, int>& index,
                          const std::string& id) {
  auto it = index.find(id);
  if (it == index.end()) return std::nullopt;
  return it->second;
}
}  // namespace

std::optional<int> Encodings::user(const std::string& id) const { return lookup(user_index_, id); }
std::optional<int> Encodings::poi(const std::string& id) const { return lookup(poi_index_, id); }
std::optional<int> Encodings::category(const std::string& id) const {
  return lookup(category_index_, id);
}

void SocialGraph::add_edge(int a, int b) {
  if (a == b) return;
  if (a < 0 || b < 0 || a >= num_users() || b >= num_users()) {
    throw std::out_of_range("friendship edge references unknown user");
  }
  auto insert = [](std::vector<int>& v, int x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  };
  insert(friends_[static_cast<std::size_t>(a)], b);
  insert(friends_[static_cast<std::size_t>(b)], a);
}

std::span<const int> SocialGraph::friends(int user) const {
  if (user < 0 || user >= num_users()) return {};
  return friends_[static_cast<std::size_t>(user)];
}

bool SocialGraph::are_friends(int a, int b) const {
  const auto f = friends(a);
  return std::binary_search(f.begin(), f.end(), b);
}

std::vector<std::pair<int, int>> SocialGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < num_users(); ++a) {
    for (int b : friends(a)) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

int Visit::arrival_hour() const {
  const std::int64_t sec_of_day = ((arrival % 86400) + 86400) % 86400;
  return static_cast<int>(sec_of_day / 3600);
}

double TravelTimeModel::seconds(double distance_km) const {
  if (mode == Mode::lognormal) return distance_km * std::exp(log_pace_mu);
  return geo::walking_seconds(distance_km);
}

TravelTimeModel TravelTimeModel::fit_lognormal(std::span<const CheckinRecord> records) {
  std::vector<double> logs;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    if (a.user_id != b.user_id) continue;
    const double gap = static_cast<double>(b.timestamp - a.timestamp);
    const double d = geo::haversine_km({a.lat, a.lon}, {b.lat, b.lon});
    if (d < 0.05 || gap <= 0.0 || gap > static_cast<double>(kSessionWindowSeconds)) continue;
    logs.push_back(std::log(gap / d));
  }
  TravelTimeModel model;
  model.mode = Mode::lognormal;
  if (logs.empty()) {
    model.log_pace_mu = std::log(3600.0 / geo::kWalkingSpeedKmh);
    return model;
  }
  const double n = static_cast<double>(logs.size());
  const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
  double var = 0.0;
  for (double v : logs) var += (v - mean) * (v - mean);
  model.log_pace_mu = mean;
  model.log_pace_sigma = std::sqrt(var / n);
  return model;
}

std::vector<Visit> derive_visits(std::span<const CheckinRecord> records, const Encodings& enc,
                                 const TravelTimeModel& travel) {
  std::vector<Visit> visits;
  std::vector<geo::LatLon> where;
  visits.reserve(records.size());
  for (const auto& r : records) {
    if (!visits.empty() && r.timestamp <= visits.back().arrival) continue;  // duplicate time
    const auto poi = enc.poi(r.poi_id);
    if (!poi) throw std::out_of_range("record references unencoded poi " + r.poi_id);
    visits.push_back({*poi, r.timestamp, r.timestamp});
    where.push_back({r.lat, r.lon});
  }
  if (visits.empty()) return visits;

  std::vector<double> stays;
  for (std::size_t i = 0; i + 1 < visits.size(); ++i) {
    const double tt = travel.seconds(geo::haversine_km(where[i], where[i + 1]));
    const auto leave = visits[i + 1].arrival - static_cast<std::int64_t>(std::llround(tt));
    visits[i].departure = std::max(visits[i].arrival, leave);
    stays.push_back(visits[i].stay_seconds());
  }
  const double last_stay =
      stays.empty() ? static_cast<double>(kFallbackStaySeconds) : median_of(stays);
  visits.back().departure = visits.back().arrival + static_cast<std::int64_t>(std::llround(last_stay));
  return visits;
}

std::vector<Session> sessionize(int user, std::span<const Visit> visits) {
  std::vector<Session> sessions;
  for (const auto& v : visits) {
    if (sessions.empty() || v.arrival > sessions.back().start() + kSessionWindowSeconds) {
      sessions.push_back(Session{user, {}});
    }
    sessions.back().visits.push_back(v);
  }
  return sessions;
}

std::vector<Session> filter_users(std::vector<Session> sessions, int min_checkins) {
  if (min_checkins < 0) throw std::invalid_argument("min_checkins must be >= 0");
  if (min_checkins == 0) return sessions;
  std::map<int, std::size_t> counts;
  for (const auto& s : sessions) counts[s.user] += s.size();
  std::erase_if(sessions, [&](const Session& s) {
    return counts[s.user] < static_cast<std::size_t>(min_checkins);
  });
  return sessions;
}

double Dataset::distance_km(int a, int b) const {
  return geo::haversine_km(poi(a).where, poi(b).where);
}

int Dataset::num_active_users() const {
  std::vector<char> seen(static_cast<std::size_t>(enc.num_users()), 0);
  int n = 0;
  for (const auto& s : sessions) {
    if (!seen[static_cast<std::size_t>(s.user)]) {
      seen[static_cast<std::size_t>(s.user)] = 1;
      ++n;
    }
  }
  return n;
}

Dataset build_dataset(std::span<const CheckinRecord> input,
                      std::span<const std::pair<std::string, std::string>> friendships,
                      const BuildOptions& options) {
  std::vector<CheckinRecord> records(input.begin(), input.end());
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.timestamp < b.timestamp;
  });

  Dataset data;
  for (const auto& r : records) {
    data.enc.add_user(r.user_id);
    const int cat = data.enc.add_category(r.category);
    const int poi = data.enc.add_poi(r.poi_id);
    if (poi == static_cast<int>(data.pois.size())) {
      data.pois.push_back({{r.lat, r.lon}, cat, r.city.value_or("")});
    }
  }

  TravelTimeModel travel = options.travel;
  if (options.fit_lognormal_travel) travel = TravelTimeModel::fit_lognormal(records);

  std::vector<Session> sessions;
  for (std::size_t begin = 0; begin < records.size();) {
    std::size_t end = begin;
    while (end < records.size() && records[end].user_id == records[begin].user_id) ++end;
    const std::span<const CheckinRecord> user_records(records.data() + begin, end - begin);
    const int user = *data.enc.user(records[begin].user_id);
    auto visits = derive_visits(user_records, data.enc, travel);
    auto user_sessions = sessionize(user, visits);
    sessions.insert(sessions.end(), std::make_move_iterator(user_sessions.begin()),
                    std::make_move_iterator(user_sessions.end()));
    begin = end;
  }
  data.sessions = filter_users(std::move(sessions), options.min_checkins);

  data.graph = SocialGraph(data.enc.num_users());
  for (const auto& [a, b] : friendships) {
    const auto ua = data.enc.user(a);
    const auto ub = data.enc.user(b);
    if (ua && ub) data.graph.add_edge(*ua, *ub);
  }
  return data;
}

// ---------------------------------------------------------------------------
// Synthetic city

namespace {

struct CategorySpec {
  const char* name;
  double weight;
};

constexpr CategorySpec kCategories[] = {
    {"Home/Work/Other:Home", 0.20},    {"Home/Work/Other:Corporate/Office", 0.15},
    {"Food:Coffee Shop", 0.12},        {"Food:Restaurant", 0.18},
    {"Nightlife:Bar", 0.12},           {"Parks & Outdoors:Park", 0.08},
    {"Shop:Grocery/Supermarket", 0.10}, {"Sports:Gym", 0.05},
};
enum Cat { kHome, kOffice, kCoffee, kRestaurant, kBar, kPark, kShop, kGym };

struct SynthPoi {
  geo::LatLon where;
  int category;
};

struct Anchors {
  int home, work, coffee, lunch1, lunch2, gym, dinner, bar1, bar2, late_dinner, park, shop;
};

class SynthCity {
 public:
  SynthCity(std::mt19937_64& rng, int n_pois) : rng_(rng) {
    constexpr double kLat = 40.0, kLon = -74.0;
    std::uniform_real_distribution<double> dlat(-0.1, 0.1), dlon(-0.13, 0.13);
    std::vector<double> weights;
    for (const auto& c : kCategories) weights.push_back(c.weight);
    std::discrete_distribution<int> pick_cat(weights.begin(), weights.end());
    constexpr int kNumCats = static_cast<int>(std::size(kCategories));
    for (int i = 0; i < n_pois; ++i) {
      const int cat = i < kNumCats ? i : pick_cat(rng_);
      const double lat = std::round((kLat + dlat(rng_)) * 1e6) / 1e6;
      const double lon = std::round((kLon + dlon(rng_)) * 1e6) / 1e6;
      pois_.push_back({{lat, lon}, cat});
    }
  }

  const std::vector<SynthPoi>& pois() const { return pois_; }

  // One of the three nearest POIs of the category around `near`; falls back to
  // any category when the city has none of the requested kind.
  int pick_near(int category, geo::LatLon near, int exclude = -1) {
    std::vector<std::pair<double, int>> ranked;
    for (int i = 0; i < static_cast<int>(pois_.size()); ++i) {
      if (pois_[static_cast<std::size_t>(i)].category == category && i != exclude) {
        ranked.emplace_back(geo::haversine_km(near, pois_[static_cast<std::size_t>(i)].where), i);
      }
    }
    if (ranked.empty()) {
      for (int i = 0; i < static_cast<int>(pois_.size()); ++i) {
        ranked.emplace_back(geo::haversine_km(near, pois_[static_cast<std::size_t>(i)].where), i);
      }
    }
    std::sort(ranked.begin(), ranked.end());
    const int top = static_cast<int>(std::min<std::size_t>(3, ranked.size()));
    std::uniform_int_distribution<int> pick(0, top - 1);
    return ranked[static_cast<std::size_t>(pick(rng_))].second;
  }

  int pick_any(int category) {
    std::vector<int> pool;
    for (int i = 0; i < static_cast<int>(pois_.size()); ++i) {
      if (pois_[static_cast<std::size_t>(i)].category == category) pool.push_back(i);
    }
    if (pool.empty()) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(pois_.size()) - 1);
      return pick(rng_);
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng_)];
  }

  int random_within(geo::LatLon near, double radius_km) {
    std::vector<int> pool;
    for (int i = 0; i < static_cast<int>(pois_.size()); ++i) {
      if (geo::haversine_km(near, pois_[static_cast<std::size_t>(i)].where) <= radius_km) {
        pool.push_back(i);
      }
    }
    if (pool.empty()) return pick_near(pois_.front().category, near);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng_)];
  }

  geo::LatLon where(int poi) const { return pois_[static_cast<std::size_t>(poi)].where; }

 private:
  std::mt19937_64& rng_;
  std::vector<SynthPoi> pois_;
};

}  // namespace

SyntheticData synth_dataset(const SynthConfig& config) {
  if (config.users < 1 || config.pois < 1 || config.days < 1) {
    throw std::invalid_argument("synth_dataset: users, pois and days must be >= 1");
  }
  std::mt19937_64 rng(config.seed);
  SynthCity city(rng, config.pois);

  auto poi_name = [](int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "poi_%04d", i);
    return std::string(buf);
  };
  auto user_name = [](int u) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "user_%03d", u);
    return std::string(buf);
  };

  std::vector<Anchors> anchors;
  for (int u = 0; u < config.users; ++u) {
    Anchors a{};
    a.home = city.pick_any(kHome);
    a.work = city.pick_any(kOffice);
    const auto home = city.where(a.home);
    const auto work = city.where(a.work);
    a.coffee = city.pick_near(kCoffee, home);
    a.lunch1 = city.pick_near(kRestaurant, work);
    a.lunch2 = city.pick_near(kRestaurant, work, a.lunch1);
    a.gym = city.pick_near(kGym, home);
    a.dinner = city.pick_near(kRestaurant, home);
    a.bar1 = city.pick_near(kBar, home);
    a.bar2 = city.pick_near(kBar, city.where(a.bar1), a.bar1);
    a.late_dinner = city.pick_near(kRestaurant, city.where(a.bar1));
    a.park = city.pick_near(kPark, home);
    a.shop = city.pick_near(kShop, home);
    anchors.push_back(a);
  }

  using namespace std::chrono;
  const std::int64_t base =
      static_cast<std::int64_t>(sys_days{year{2010} / 5 / 3}.time_since_epoch().count()) * 86400;

  SyntheticData out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto minutes = [&](double lo, double hi) {
    return static_cast<std::int64_t>(std::llround((lo + (hi - lo) * unit(rng)) * 60.0));
  };

  for (int u = 0; u < config.users; ++u) {
    const Anchors& a = anchors[static_cast<std::size_t>(u)];
    for (int d = 0; d < config.days; ++d) {
      const std::int64_t day = base + static_cast<std::int64_t>(d) * 86400;
      const bool weekday = d % 7 < 5;
      std::vector<std::vector<std::pair<int, std::int64_t>>> sessions;

      if (weekday) {
        std::vector<std::pair<int, std::int64_t>> morning;
        std::int64_t t = day + 7 * 3600 + minutes(0, 60);
        morning.emplace_back(a.home, t);
        t += minutes(20, 40);
        morning.emplace_back(a.coffee, t);
        t += minutes(30, 60);
        morning.emplace_back(a.work, t);
        t = std::max(t + 1800, day + 12 * 3600 + minutes(0, 60));
        morning.emplace_back(unit(rng) < 0.5 ? a.lunch1 : a.lunch2, t);
        sessions.push_back(std::move(morning));

        if (unit(rng) < 0.85) {
          std::vector<std::pair<int, std::int64_t>> evening;
          t = day + 17 * 3600 + 30 * 60 + minutes(0, 60);
          evening.emplace_back(a.work, t);
          const std::array<int, 3> active{a.gym, a.dinner, a.home};
          const std::array<int, 3> social{a.bar1, a.late_dinner, a.bar2};
          const auto& branch = unit(rng) < 0.6 ? active : social;
          for (int poi : branch) {
            t += minutes(45, 90);
            evening.emplace_back(poi, t);
          }
          sessions.push_back(std::move(evening));
        }
      } else {
        std::vector<std::pair<int, std::int64_t>> weekend;
        std::int64_t t = day + 10 * 3600 + minutes(0, 60);
        weekend.emplace_back(a.home, t);
        const std::array<int, 3> outdoor{a.park, a.coffee, a.shop};
        const std::array<int, 3> night{a.shop, a.dinner, a.bar1};
        const auto& branch = unit(rng) < 0.5 ? outdoor : night;
        for (int poi : branch) {
          t += minutes(45, 120);
          weekend.emplace_back(poi, t);
        }
        sessions.push_back(std::move(weekend));
      }

      for (auto& s : sessions) {
        for (std::size_t i = 0; i < s.size(); ++i) {
          // Occasional detours to a random nearby place; the first stop stays fixed.
          if (i > 0 && unit(rng) < 0.08) {
            s[i].first = city.random_within(city.where(s[i - 1].first), 2.0);
          }
          const int poi = s[i].first;
          const auto where = city.where(poi);
          out.records.push_back({user_name(u), poi_name(poi), s[i].second, where.lat, where.lon,
                                 kCategories[city.pois()[static_cast<std::size_t>(poi)].category].name,
                                 std::string("synth-city")});
        }
      }
    }
  }

  std::uniform_int_distribution<int> pick_user(0, config.users - 1);
  for (int u = 0; u < config.users && config.users > 1; ++u) {
    for (int k = 0; k < 2; ++k) {
      int v = pick_user(rng);
      if (v == u) v = (v + 1) % config.users;
      out.friendships.emplace_back(user_name(u), user_name(v));
    }
  }

  std::stable_sort(out.records.begin(), out.records.end(), [](const auto& x, const auto& y) {
    if (x.user_id != y.user_id) return x.user_id < y.user_id;
    return x.timestamp < y.timestamp;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Canonical dataset files

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  using nlohmann::json;
  std::filesystem::create_directories(dir);

  json enc;
  enc["users"] = data.enc.users();
  enc["categories"] = data.enc.categories();
  json pois = json::array();
  for (int i = 0; i < data.enc.num_pois(); ++i) {
    const auto& p = data.poi(i);
    pois.push_back({{"id", data.enc.poi_id(i)},
                    {"lat", p.where.lat},
                    {"lon", p.where.lon},
                    {"category", p.category},
                    {"city", p.city}});
  }
  enc["pois"] = std::move(pois);
  std::ofstream(dir / "encodings.json") << enc.dump(1) << '\n';

  json social;
  json edges = json::array();
  for (const auto& [a, b] : data.graph.edges()) edges.push_back({a, b});
  social["edges"] = std::move(edges);
  std::ofstream(dir / "social.json") << social.dump() << '\n';

  std::ofstream out(dir / "sessions.jsonl");
  for (const auto& s : data.sessions) {
    json visits = json::array();
    for (const auto& v : s.visits) visits.push_back({v.poi, v.arrival, v.departure});
    out << json{{"user", s.user}, {"visits", std::move(visits)}}.dump() << '\n';
  }
  if (!out) throw DataError("failed writing dataset to " + dir.string());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  using nlohmann::json;
  auto read_json = [&](const char* name) {
    std::ifstream in(dir / name);
    if (!in) throw DataError("missing " + (dir / name).string() + " (run `ingest` first)");
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw DataError((dir / name).string() + ": " + e.what());
    }
  };

  Dataset data;
  try {
    const json enc = read_json("encodings.json");
    for (const auto& u : enc.at("users")) data.enc.add_user(u.get<std::string>());
    for (const auto& c : enc.at("categories")) data.enc.add_category(c.get<std::string>());
    for (const auto& p : enc.at("pois")) {
      data.enc.add_poi(p.at("id").get<std::string>());
      PoiInfo info{{p.at("lat").get<double>(), p.at("lon").get<double>()},
                   p.at("category").get<int>(),
                   p.value("city", std::string{})};
      if (info.category < 0 || info.category >= data.enc.num_categories()) {
        throw DataError("poi category index out of range");
      }
      data.pois.push_back(std::move(info));
    }
    data.graph = SocialGraph(data.enc.num_users());
    const json social = read_json("social.json");
    for (const auto& e : social.at("edges")) {
      data.graph.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
    }

    std::ifstream in(dir / "sessions.jsonl");
    if (!in) throw DataError("missing sessions.jsonl in " + dir.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      Session s{j.at("user").get<int>(), {}};
      if (s.user < 0 || s.user >= data.enc.num_users()) throw DataError("session user out of range");
      for (const auto& v : j.at("visits")) {
        Visit visit{v.at(0).get<int>(), v.at(1).get<std::int64_t>(), v.at(2).get<std::int64_t>()};
        if (visit.poi < 0 || visit.poi >= data.enc.num_pois()) {
          throw DataError("session poi out of range");
        }
        s.visits.push_back(visit);
      }
      data.sessions.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw DataError("malformed dataset in " + dir.string() + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw DataError("malformed dataset in " + dir.string() + ": " + e.what());
  }
  return data;
}

}  // namespace caps
