#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caps/context_features.hpp"
#include "caps/numerics.hpp"
#include "caps/sequence_model.hpp"

namespace caps {

// Dense per-user PS(u, l, hour) rows filled on first use. Not thread-safe.
class ScoreCache {
 public:
  explicit ScoreCache(const PreferenceTable& pref, int num_pois);
  double ps(int user, int poi, int hour) const;

 private:
  const PreferenceTable* pref_;
  int num_pois_;
  mutable std::vector<std::vector<double>> rows_;  // [user + 1] -> poi * 24 + hour
};

struct GenRequest {
  int user = -1;
  int start_poi = 0;
  int start_hour = 0;
  int length = 25;
  int candidates = 10;
  int k = 1;
  bool no_repeat = false;
  bool consolidated = false;  // rank by P instead of PS
  // Sequence-level context; defaults to a sequence that starts and ends at
  // start_poi at start_hour.
  std::optional<FeatureVector> feature;

  void validate() const;
};

struct GeneratedSequence {
  std::vector<int> pois;
  std::vector<int> hours;      // arrival hour of each poi
  std::vector<double> probs;   // probability of each sampled step (first = 1)
  double score = 0.0;
  int index = 0;               // candidate number
};

std::size_t sample_next(std::span<const double> probs, num::Rng& rng);
// Feeds `poi` into the model and samples the next poi from its output.
int sample_next(const SequenceModel& model, RecurrentState& state, int poi,
                std::span<const double> attr, std::span<const double> feature, num::Rng& rng);

// Samples `candidates` sequences, each from its own stream (seed, index), and
// returns the k best by summed preference score (ties: earlier candidate).
std::vector<GeneratedSequence> generate(const SequenceModel& model, const GenRequest& request,
                                        const FeatureTables& tables, std::uint64_t seed,
                                        const ScoreCache* cache = nullptr);

// Sum over positions of PS(u, l, hour) or the consolidated P.
double sequence_score(const FeatureTables& tables, int user, std::span<const int> pois,
                      std::span<const int> hours, bool consolidated,
                      const ScoreCache* cache = nullptr);

// Arrival hours along `pois`: each step adds the mean stay at the previous POI
// and the walking time to the next one.
std::vector<int> rollout_hours(const AttributeTables& tables, std::span<const int> pois,
                               int start_hour);

// ---------------------------------------------------------------------------
// Common interface of every evaluated recommender.

struct Query {
  int user = -1;
  int start_poi = 0;
  int start_hour = 0;
  int length = 1;
  FeatureVector feature;
  std::uint64_t seed = 0;
};

class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual std::string name() const = 0;
  // One or more sequences starting at q.start_poi.
  virtual std::vector<std::vector<int>> recommend(const Query& q) const = 0;
};

class NeuralRecommender final : public Recommender {
 public:
  NeuralRecommender(std::string name, std::shared_ptr<const SequenceModel> model,
                    std::shared_ptr<const FeatureTables> tables, int candidates, int k);
  std::string name() const override { return name_; }
  std::vector<std::vector<int>> recommend(const Query& q) const override;

 private:
  std::string name_;
  std::shared_ptr<const SequenceModel> model_;
  std::shared_ptr<const FeatureTables> tables_;
  int candidates_, k_;
  ScoreCache cache_;
};

}  // namespace caps
