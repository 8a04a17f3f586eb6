#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caps/checkin_data.hpp"

namespace caps {

inline constexpr std::size_t kAttributeDim = 30;
inline constexpr std::size_t kFeatureDim = 7;
inline constexpr int kHours = 24;

using HourCounts = std::array<int, kHours>;

// Min-max normalization; a degenerate range (min == max) maps to 0.
double min_max(double value, double lo, double hi);

// Per-user visit statistics shared by the AST and preference tables. All maps
// are ordered so aggregate sums are reproducible.
struct UserVisits {
  int total = 0;                                 // |V_u|
  std::map<int, int> poi_count;                  // |V_{u,l}|
  std::map<int, HourCounts> poi_hour_count;      // |V_{u,l,t}|
  std::map<int, int> category_checkins;          // check-ins per category
  std::map<int, std::vector<int>> category_pois; // distinct locations per category
  int common_with_friends = 0;                   // check-ins at places a friend visited
  std::map<int, int> common_with_friends_by_category;
};

class VisitIndex {
 public:
  // hour: when set, only visits arriving in that UTC hour are indexed.
  static VisitIndex build(std::span<const Session> sessions, const Dataset& catalog,
                          std::optional<int> hour = std::nullopt);

  const UserVisits& user(int u) const { return users_.at(static_cast<std::size_t>(u)); }
  int num_users() const { return static_cast<int>(users_.size()); }
  int num_active_users() const { return active_users_; }
  const std::vector<int>& active_users() const { return active_; }

 private:
  std::vector<UserVisits> users_;
  std::vector<int> active_;
  int active_users_ = 0;
};

struct StayStats {
  std::vector<double> mean_stay;   // ST(i), seconds
  std::vector<double> normalized;  // ST'(i) in [0,1]
  std::vector<char> observed;      // 0 when the POI had no visits (ST = global mean)
};

// ST(i): mean over visiting users of each user's mean stay at i.
StayStats compute_stay_stats(std::span<const Session> sessions, int num_pois);

// Aggregate stay time tables with categorical and social blending.
class AstTable {
 public:
  AstTable() = default;
  AstTable(std::shared_ptr<const VisitIndex> visits, std::vector<double> stay_norm,
           const Dataset& catalog);

  double alpha(int u, int poi) const;           // share of u's check-ins in poi's category
  double psi1(int u) const;                     // share of u's check-ins shared with friends
  double gamma1(int u, int category) const;     // ... shared with friends and in category
  double ast_cat(int u, int poi) const;         // categorical blend
  double ast(int u, int poi) const;             // with social blending
  double ast_user_category(int u, int category) const;
  double ast_category(int category) const;      // mean over active users

  const VisitIndex& visits() const { return *visits_; }
  const std::vector<double>& stay_norm() const { return stay_norm_; }
  int poi_category(int poi) const { return categories_.at(static_cast<std::size_t>(poi)); }
  const SocialGraph& graph() const { return graph_; }
  int num_categories() const { return num_categories_; }

 private:
  double category_sum(int u, int category) const;  // sum over u's category locations

  std::shared_ptr<const VisitIndex> visits_;
  std::vector<double> stay_norm_;
  std::vector<int> categories_;
  SocialGraph graph_;
  int num_categories_ = 0;
  // per user: category -> (sum ST'(l)/V'_{u,l}, sum AST_cat(u,l))
  std::vector<std::map<int, std::pair<double, double>>> per_category_;
};

AstTable compute_ast(const StayStats& stats, std::span<const Session> sessions,
                     const Dataset& catalog);

// Normalized constraint between the user's current location and a target,
// each in [0,1].
struct Constraint {
  std::string name;
  std::function<double(int target, int current)> measure;
};

class PreferenceTable {
 public:
  PreferenceTable() = default;
  PreferenceTable(AstTable ast, const Dataset& catalog, std::span<const Session> sessions);

  double theta(int u, int poi) const { return ast_.alpha(u, poi); }
  double beta(int u, int poi) const;  // normalized TF-IDF of the poi's category for u

  // Personalized score; users outside the table or without any visits or
  // friends fall back to the generalized score.
  double ps(int u, int poi, int hour) const;
  double generalized(int poi, int hour) const;
  // PS discounted by the mean of the registered constraints against `current`.
  double consolidated(int u, int poi, int hour, int current) const;
  double constraint_mean(int poi, int current) const;

  void set_constraints(std::vector<Constraint> constraints);
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const AstTable& ast() const { return ast_; }

  // Default m = 2: distance and walking travel time, each min-max normalized
  // by the range observed over transitions into the target.
  static std::vector<Constraint> default_constraints(const Dataset& catalog,
                                                     std::span<const Session> sessions);

 private:
  double personalized(int u, int poi, int hour) const;

  AstTable ast_;
  std::vector<std::vector<double>> tfidf_norm_;  // [user][category]
  std::vector<double> generalized_;              // [poi * 24 + hour]
  std::vector<Constraint> constraints_;
};

PreferenceTable compute_preference(const AstTable& ast, std::span<const Session> sessions,
                                   const Dataset& catalog);

// Check-ins per (poi, hour) divided by the maximum over all (poi, hour).
std::vector<std::array<double, kHours>> temporal_popularity(std::span<const Session> sessions,
                                                            int num_pois);

struct AttributeVector {
  double stay_norm = 0.0;     // ST'(l)
  double ast = 0.0;           // AST(l), mean over users
  double ast_cat_hour = 0.0;  // category AST at this hour
  double ps = 0.0;            // generalized PS(l, t)
  int category = 0;
  std::array<double, kHours> popularity{};
  double dist_prev_km = 0.0;
};

struct FeatureVector {
  int cat_start = 0;
  int cat_end = 0;
  int loc_start = 0;
  int loc_end = 0;
  double mean_dist_km = 0.0;
  int hour_start = 0;
  int hour_end = 0;
};

// POI-level tables feeding the network inputs. Exportable as a JSON snapshot.
class AttributeTables {
 public:
  AttributeTables() = default;
  AttributeTables(const StayStats& stay, const PreferenceTable& pref, const Dataset& catalog,
                  std::span<const Session> sessions);

  int num_pois() const { return static_cast<int>(where_.size()); }
  int num_categories() const { return num_categories_; }
  int category(int poi) const { return category_.at(static_cast<std::size_t>(poi)); }
  double distance_km(int a, int b) const;
  double mean_stay_seconds(int poi) const { return mean_stay_.at(static_cast<std::size_t>(poi)); }

  // Throws std::out_of_range for an unknown poi.
  AttributeVector attribute_vector(int poi, int hour, std::optional<int> prev_poi) const;
  // Fixed-length network input; every entry is scaled into [0,1].
  std::array<double, kAttributeDim> encode(const AttributeVector& a) const;
  std::array<double, kFeatureDim> encode(const FeatureVector& f) const;

  // (poi, arrival) steps of one sequence, in order.
  FeatureVector feature_vector(std::span<const Visit> visits) const;

  void save(const std::filesystem::path& path) const;
  static AttributeTables load(const std::filesystem::path& path);
  friend bool operator==(const AttributeTables&, const AttributeTables&) = default;

 private:
  std::vector<geo::LatLon> where_;
  std::vector<int> category_;
  int num_categories_ = 0;
  std::vector<double> mean_stay_;
  std::vector<double> stay_norm_;
  std::vector<double> ast_poi_;
  std::vector<std::array<double, kHours>> ast_cat_hour_;  // [category][hour]
  std::vector<std::array<double, kHours>> ps_general_;    // [poi][hour]
  std::vector<std::array<double, kHours>> popularity_;    // [poi][hour]
  double max_ast_ = 0.0, max_ast_cat_hour_ = 0.0, max_ps_ = 0.0;
};

// Everything derived from one training set.
struct FeatureTables {
  StayStats stay;
  PreferenceTable pref;
  AttributeTables attrs;
};

FeatureTables build_feature_tables(const Dataset& catalog, std::span<const Session> sessions);

}  // namespace caps
