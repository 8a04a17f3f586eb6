#include "caps/seq_generation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "caps/geo.hpp"

namespace caps {

ScoreCache::ScoreCache(const PreferenceTable& pref, int num_pois)
    : pref_(&pref), num_pois_(num_pois) {}

double ScoreCache::ps(int user, int poi, int hour) const {
  hour = ((hour % kHours) + kHours) % kHours;
  const auto slot = static_cast<std::size_t>(std::max(user, -1) + 1);
  if (slot >= rows_.size()) rows_.resize(slot + 1);
  auto& row = rows_[slot];
  if (row.empty()) {
    row.resize(static_cast<std::size_t>(num_pois_) * kHours);
    for (int l = 0; l < num_pois_; ++l) {
      for (int t = 0; t < kHours; ++t) {
        row[static_cast<std::size_t>(l) * kHours + static_cast<std::size_t>(t)] =
            pref_->ps(user, l, t);
      }
    }
  }
  return row.at(static_cast<std::size_t>(poi) * kHours + static_cast<std::size_t>(hour));
}

void GenRequest::validate() const {
  if (length < 1) throw std::invalid_argument("length must be >= 1");
  if (k < 1 || candidates < k) throw std::invalid_argument("need 1 <= k <= candidates");
  if (start_hour < 0 || start_hour >= kHours) throw std::invalid_argument("start hour outside [0,24)");
}

std::size_t sample_next(std::span<const double> probs, num::Rng& rng) {
  return rng.categorical(probs);
}

int sample_next(const SequenceModel& model, RecurrentState& state, int poi,
                std::span<const double> attr, std::span<const double> feature, num::Rng& rng) {
  const num::Vector probs = num::softmax(model.step(state, poi, attr, feature));
  return static_cast<int>(sample_next(probs, rng));
}

std::vector<int> rollout_hours(const AttributeTables& tables, std::span<const int> pois,
                               int start_hour) {
  std::vector<int> hours;
  hours.reserve(pois.size());
  double elapsed = 0.0;
  for (std::size_t i = 0; i < pois.size(); ++i) {
    if (i > 0) {
      elapsed += tables.mean_stay_seconds(pois[i - 1]) +
                 geo::walking_seconds(tables.distance_km(pois[i - 1], pois[i]));
    }
    const auto h = static_cast<long long>(std::floor(start_hour + elapsed / 3600.0));
    hours.push_back(static_cast<int>(((h % kHours) + kHours) % kHours));
  }
  return hours;
}

double sequence_score(const FeatureTables& tables, int user, std::span<const int> pois,
                      std::span<const int> hours, bool consolidated, const ScoreCache* cache) {
  double score = 0.0;
  for (std::size_t i = 0; i < pois.size(); ++i) {
    if (consolidated) {
      const int current = i > 0 ? pois[i - 1] : pois[i];
      score += tables.pref.consolidated(user, pois[i], hours[i], current);
    } else {
      score += cache ? cache->ps(user, pois[i], hours[i]) : tables.pref.ps(user, pois[i], hours[i]);
    }
  }
  return score;
}

std::vector<GeneratedSequence> generate(const SequenceModel& model, const GenRequest& request,
                                        const FeatureTables& tables, std::uint64_t seed,
                                        const ScoreCache* cache) {
  request.validate();
  const auto& attrs = tables.attrs;
  FeatureVector fv;
  if (request.feature) {
    fv = *request.feature;
  } else {
    fv.loc_start = fv.loc_end = request.start_poi;
    fv.cat_start = fv.cat_end = attrs.category(request.start_poi);
    fv.hour_start = fv.hour_end = request.start_hour;
  }
  const auto feature = attrs.encode(fv);

  std::vector<GeneratedSequence> out(static_cast<std::size_t>(request.candidates));
  const auto n = static_cast<std::int64_t>(out.size());
  // Each candidate owns its RNG stream, so the result does not depend on the
  // thread schedule. Scores go through the (non thread-safe) cache afterwards.
#pragma omp parallel for schedule(dynamic) if (n > 1 && model.num_pois() > 1000)
  for (std::int64_t c = 0; c < n; ++c) {
    num::Rng rng = num::Rng::stream(seed, static_cast<std::uint64_t>(c));
    auto& g = out[static_cast<std::size_t>(c)];
    g.index = static_cast<int>(c);
    g.pois.push_back(request.start_poi);
    g.hours.push_back(request.start_hour);
    g.probs.push_back(1.0);
    RecurrentState state = model.initial_state();
    double elapsed = 0.0;
    for (int t = 1; t < request.length; ++t) {
      const int cur = g.pois.back();
      const std::optional<int> prev =
          g.pois.size() > 1 ? std::optional<int>(g.pois[g.pois.size() - 2]) : std::nullopt;
      const auto a = attrs.encode(attrs.attribute_vector(cur, g.hours.back(), prev));
      num::Vector probs = num::softmax(model.step(state, cur, a, feature));
      if (request.no_repeat) {
        num::Vector masked = probs;
        for (int p : g.pois) masked[static_cast<std::size_t>(p)] = 0.0;
        double total = 0.0;
        for (double v : masked) total += v;
        if (total > 0.0) probs = std::move(masked);
      }
      const auto next = static_cast<int>(sample_next(probs, rng));
      double total = 0.0;
      for (double v : probs) total += v;
      g.probs.push_back(probs[static_cast<std::size_t>(next)] / total);
      elapsed += attrs.mean_stay_seconds(cur) + geo::walking_seconds(attrs.distance_km(cur, next));
      const auto h = static_cast<long long>(std::floor(request.start_hour + elapsed / 3600.0));
      g.pois.push_back(next);
      g.hours.push_back(static_cast<int>(((h % kHours) + kHours) % kHours));
    }
  }
  for (auto& g : out) {
    g.score = sequence_score(tables, request.user, g.pois, g.hours, request.consolidated, cache);
  }
  std::stable_sort(out.begin(), out.end(), [](const GeneratedSequence& a, const GeneratedSequence& b) {
    return a.score > b.score;
  });
  out.resize(static_cast<std::size_t>(request.k));
  return out;
}

NeuralRecommender::NeuralRecommender(std::string name, std::shared_ptr<const SequenceModel> model,
                                     std::shared_ptr<const FeatureTables> tables, int candidates,
                                     int k)
    : name_(std::move(name)), model_(std::move(model)), tables_(std::move(tables)),
      candidates_(candidates), k_(k), cache_(tables_->pref, tables_->attrs.num_pois()) {}

std::vector<std::vector<int>> NeuralRecommender::recommend(const Query& q) const {
  GenRequest r;
  r.user = q.user;
  r.start_poi = q.start_poi;
  r.start_hour = q.start_hour;
  r.length = q.length;
  r.candidates = candidates_;
  r.k = k_;
  r.feature = q.feature;
  std::vector<std::vector<int>> out;
  for (auto& g : generate(*model_, r, *tables_, q.seed, &cache_)) out.push_back(std::move(g.pois));
  return out;
}

}  // namespace caps
