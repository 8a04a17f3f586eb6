#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "caps/geo.hpp"

namespace caps {

inline constexpr std::int64_t kSessionWindowSeconds = 8 * 3600;
inline constexpr std::int64_t kFallbackStaySeconds = 30 * 60;

struct CheckinRecord {
  std::string user_id;
  std::string poi_id;
  std::int64_t timestamp = 0;  // UTC seconds
  double lat = 0.0;
  double lon = 0.0;
  std::string category;  // hierarchical, ':'-separated
  std::optional<std::string> city;
};

enum class CsvFormat { weeplaces, gowalla };

CsvFormat parse_format(const std::string& name);

struct ParseResult {
  std::vector<CheckinRecord> records;  // sorted by (user_id, timestamp)
  std::size_t rows = 0;                // data rows seen, excluding the header
  std::size_t dropped = 0;
};

// Parses an ISO-8601 UTC datetime ("2010-05-01T09:00:00Z" or with a space
// separator). Returns nullopt when the text is not a valid datetime.
std::optional<std::int64_t> parse_utc_datetime(const std::string& text);
std::string format_utc_datetime(std::int64_t seconds);

// Columns are located by header name, so both formats share one canonical
// schema. Throws DataError if the file is unreadable, has no header, lacks a
// mandatory column, or more than half of the rows are malformed.
ParseResult parse_checkins(const std::filesystem::path& path, CsvFormat format);
ParseResult parse_checkins(std::istream& in, CsvFormat format);

// Friendship edge list "userid1,userid2" with a header row.
std::vector<std::pair<std::string, std::string>> parse_friendships(
    const std::filesystem::path& path);

void write_checkins_csv(std::ostream& out, std::span<const CheckinRecord> records);

struct PoiInfo {
  geo::LatLon where;
  int category = 0;
  std::string city;
};

class Encodings {
 public:
  int add_user(const std::string& id);
  int add_poi(const std::string& id);
  int add_category(const std::string& id);

  std::optional<int> user(const std::string& id) const;
  std::optional<int> poi(const std::string& id) const;
  std::optional<int> category(const std::string& id) const;

  const std::string& user_id(int index) const { return users_.at(index); }
  const std::string& poi_id(int index) const { return pois_.at(index); }
  const std::string& category_id(int index) const { return categories_.at(index); }

  int num_users() const { return static_cast<int>(users_.size()); }
  int num_pois() const { return static_cast<int>(pois_.size()); }
  int num_categories() const { return static_cast<int>(categories_.size()); }

  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::string>& pois() const { return pois_; }
  const std::vector<std::string>& categories() const { return categories_; }

 private:
  static int add(std::vector<std::string>& ids, std::unordered_map<std::string, int>& index,
                 const std::string& id);

  std::vector<std::string> users_, pois_, categories_;
  std::unordered_map<std::string, int> user_index_, poi_index_, category_index_;
};

// Undirected friendship graph over encoded user indices.
class SocialGraph {
 public:
  SocialGraph() = default;
  explicit SocialGraph(int num_users) : friends_(static_cast<std::size_t>(num_users)) {}

  // Adds both directions; self-loops and duplicates are ignored.
  void add_edge(int a, int b);
  std::span<const int> friends(int user) const;
  bool are_friends(int a, int b) const;
  int num_users() const { return static_cast<int>(friends_.size()); }
  std::vector<std::pair<int, int>> edges() const;  // a < b, sorted

 private:
  std::vector<std::vector<int>> friends_;  // sorted
};

struct Visit {
  int poi = 0;
  std::int64_t arrival = 0;
  std::int64_t departure = 0;

  double stay_seconds() const { return static_cast<double>(departure - arrival); }
  int arrival_hour() const;  // UTC hour of day
};

struct Session {
  int user = 0;
  std::vector<Visit> visits;

  std::int64_t start() const { return visits.empty() ? 0 : visits.front().arrival; }
  std::int64_t end() const { return visits.empty() ? 0 : visits.back().arrival; }
  std::size_t size() const { return visits.size(); }
  bool singleton() const { return visits.size() == 1; }
};

// Travel time between consecutive POIs. Defaults to walking speed; the
// log-normal mode scales distance by a fitted median pace.
struct TravelTimeModel {
  enum class Mode { walking, lognormal };
  Mode mode = Mode::walking;
  double log_pace_mu = 0.0;     // log(seconds per km)
  double log_pace_sigma = 0.0;

  double seconds(double distance_km) const;

  // Fits mu/sigma of log(gap / distance) over consecutive check-ins of the
  // same user that are at least 50 m apart and within the session window.
  static TravelTimeModel fit_lognormal(std::span<const CheckinRecord> sorted_records);
};

// Records of one user, sorted by timestamp. Departure of visit i is the next
// arrival minus travel time, clamped to the arrival; the last visit stays for
// the median of the derived stays (30 minutes when there are none).
std::vector<Visit> derive_visits(std::span<const CheckinRecord> user_records,
                                 const Encodings& enc, const TravelTimeModel& travel = {});

std::vector<Session> sessionize(int user, std::span<const Visit> visits);

std::vector<Session> filter_users(std::vector<Session> sessions, int min_checkins);

struct Dataset {
  Encodings enc;
  std::vector<PoiInfo> pois;  // indexed by encoded poi
  SocialGraph graph;
  std::vector<Session> sessions;  // ordered by (user, start)

  const PoiInfo& poi(int index) const { return pois.at(static_cast<std::size_t>(index)); }
  double distance_km(int a, int b) const;
  int num_active_users() const;
};

struct BuildOptions {
  int min_checkins = 25;
  TravelTimeModel travel;
  bool fit_lognormal_travel = false;
};

// Encodes records, derives visits and sessions per user, and drops users with
// fewer than min_checkins visits. Users, POIs and categories are encoded in
// order of first appearance in the sorted record list.
Dataset build_dataset(std::span<const CheckinRecord> records,
                      std::span<const std::pair<std::string, std::string>> friendships,
                      const BuildOptions& options = {});

struct SyntheticData {
  std::vector<CheckinRecord> records;  // sorted by (user, timestamp)
  std::vector<std::pair<std::string, std::string>> friendships;
};

struct SynthConfig {
  std::uint64_t seed = 7;
  int users = 60;
  int pois = 200;
  int days = 30;
};

// Desk-scale city with per-user home/work/leisure anchors and Markovian daily
// routines. Every user gets at least one session per simulated day.
SyntheticData synth_dataset(const SynthConfig& config);

// Canonical on-disk layout written by `ingest`:
//   sessions.jsonl  one session per line with encoded ids
//   encodings.json  user/category ids and the POI table
//   social.json     friendship edges over encoded users
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace caps
