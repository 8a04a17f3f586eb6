#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "caps/checkin_data.hpp"
#include "caps/context_features.hpp"
#include "caps/numerics.hpp"
#include "caps/seq_generation.hpp"

namespace caps {

// ---------------------------------------------------------------------------
// POI popularity

struct PopularityPick {
  int poi = -1;
  double radius_km = 0.0;  // radius at which it was found
  int expansions = 0;
};

class PopularityModel {
 public:
  PopularityModel(const Dataset& catalog, std::span<const Session> sessions);

  // Most-visited POI within the radius around `current` that is not excluded;
  // the radius grows by `growth` until one is found. Ties go to the lower
  // index. Throws std::runtime_error when every POI is excluded.
  PopularityPick next(int current, const std::set<int>& exclusions, double radius_km = 2.0,
                      double growth = 1.5) const;
  std::vector<int> generate(int start, int length, double radius_km = 2.0,
                            double growth = 1.5) const;

  int count(int poi) const { return counts_.at(static_cast<std::size_t>(poi)); }

 private:
  std::vector<geo::LatLon> where_;
  std::vector<int> counts_;
};

// ---------------------------------------------------------------------------
// First-order Markov chain, personalized per user

class MarkovModel {
 public:
  // smoothing = Laplace pseudo-count added to every transition and start.
  static MarkovModel fit(std::span<const Session> sessions, double smoothing = 1.0);

  // (poi, probability) over the user's alphabet, or over the population
  // alphabet for users without sessions.
  std::vector<std::pair<int, double>> transition_row(int user, int from) const;
  std::vector<std::pair<int, double>> initial(int user) const;
  std::vector<int> generate(int user, int start, int length, num::Rng& rng) const;

  bool knows_user(int user) const { return users_.contains(user); }

 private:
  struct Chain {
    std::vector<int> alphabet;                      // sorted
    std::map<int, int> starts;
    std::map<int, std::map<int, int>> transitions;  // from -> to -> count
  };
  const Chain& chain(int user) const;

  double smoothing_ = 1.0;
  std::map<int, Chain> users_;
  Chain population_;
};

// ---------------------------------------------------------------------------
// Apriori-style level-wise trip construction

struct AprioriConfig {
  double epsilon_km = 2.0;                     // max distance between consecutive POIs
  double budget_seconds = 8.0 * 3600.0;        // stays + travel
  int beam = 100;
  bool exhaustive = false;                     // keep every candidate per level
  int k = 1;
};

struct Trip {
  std::vector<int> pois;
  double score = 0.0;           // sum of consolidated preference P(u, l, t)
  double travel_seconds = 0.0;  // walking time along the trip
  double elapsed_seconds = 0.0; // travel plus stays before the last POI
};

class AprioriModel {
 public:
  explicit AprioriModel(std::shared_ptr<const FeatureTables> tables);

  // Extends [start] one POI per level, never revisiting a POI, pruning by
  // epsilon and the time budget, up to max_length POIs. Returns the k best
  // trips of the longest level reached (higher score first, then lower
  // travel time).
  std::vector<Trip> generate(int user, int start, int start_hour, int max_length,
                             const AprioriConfig& config = {}) const;

  // Score and timing of an explicit trip under the same rules.
  Trip evaluate(int user, std::span<const int> pois, int start_hour) const;
  bool feasible(std::span<const int> pois, const AprioriConfig& config) const;

 private:
  double consolidated(int user, int poi, int hour, int current) const;

  std::shared_ptr<const FeatureTables> tables_;
  ScoreCache cache_;
};

// ---------------------------------------------------------------------------
// HITS over user-location visits, per region

struct HitsScores {
  std::vector<double> hub;        // per row (user)
  std::vector<double> authority;  // per column (location)
  int iterations = 0;
};

// a = M^T h, h = M a, each L2-normalized, from h = 1, until both change by
// less than tol (L2) or max_iter iterations.
HitsScores hits_power_iteration(const std::vector<std::vector<double>>& adjacency,
                                int max_iter = 100, double tol = 1e-8);

class HitsModel {
 public:
  static HitsModel fit(const Dataset& catalog, std::span<const Session> sessions,
                       double radius_km = 10.0);

  struct Region {
    int leader = 0;
    std::vector<int> pois;           // sorted
    std::vector<int> users;          // sorted
    std::map<int, double> authority; // poi -> score
    std::map<int, double> hub;       // user -> score
  };

  int region_of(int poi) const { return region_of_.at(static_cast<std::size_t>(poi)); }
  const std::vector<Region>& regions() const { return regions_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Sum of authorities times the mean hub of users who visited both POIs of
  // at least one ordered pair of the sequence (0 when nobody did).
  double score(std::span<const int> pois) const;
  std::vector<std::vector<int>> candidates(int start, int length) const;
  // Best-scoring k candidates; ties keep candidate order.
  std::vector<std::vector<int>> rank(std::vector<std::vector<int>> candidates, int k) const;

 private:
  std::vector<Region> regions_;
  std::vector<int> region_of_;
  std::vector<std::set<int>> visited_by_;          // poi -> users
  std::vector<std::vector<int>> sessions_;         // training POI sequences
  std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// Recommender adapters used by the evaluator

class PopularityRecommender final : public Recommender {
 public:
  explicit PopularityRecommender(PopularityModel model, double radius_km = 2.0,
                                 double growth = 1.5)
      : model_(std::move(model)), radius_km_(radius_km), growth_(growth) {}
  std::string name() const override { return "popularity"; }
  std::vector<std::vector<int>> recommend(const Query& q) const override;

 private:
  PopularityModel model_;
  double radius_km_, growth_;
};

class MarkovRecommender final : public Recommender {
 public:
  explicit MarkovRecommender(MarkovModel model) : model_(std::move(model)) {}
  std::string name() const override { return "markov"; }
  std::vector<std::vector<int>> recommend(const Query& q) const override;

 private:
  MarkovModel model_;
};

class AprioriRecommender final : public Recommender {
 public:
  AprioriRecommender(AprioriModel model, AprioriConfig config)
      : model_(std::move(model)), config_(config) {}
  std::string name() const override { return "apriori"; }
  std::vector<std::vector<int>> recommend(const Query& q) const override;

 private:
  AprioriModel model_;
  AprioriConfig config_;
};

class HitsRecommender final : public Recommender {
 public:
  explicit HitsRecommender(HitsModel model) : model_(std::move(model)) {}
  std::string name() const override { return "hits"; }
  std::vector<std::vector<int>> recommend(const Query& q) const override;

 private:
  HitsModel model_;
};

}  // namespace caps
