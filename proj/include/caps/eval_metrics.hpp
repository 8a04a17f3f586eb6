#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "caps/checkin_data.hpp"
#include "caps/context_features.hpp"
#include "caps/seq_generation.hpp"

namespace caps {

struct PairScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Ordered pairs (x, y) with x strictly before y and x != y, as sets. When both
// pair sets are empty the score is 1 if the sequences are identical, else 0.
PairScore pairs_f1(std::span<const int> actual, std::span<const int> predicted);

// Fraction of unordered pairs with distinct categories. Throws
// std::invalid_argument for fewer than two entries.
double diversity(std::span<const int> categories);
// Number of unordered pairs with distinct categories.
int diversity_raw(std::span<const int> categories);

struct Displacement {
  double sum_km = 0.0;
  double mean_km = 0.0;
  bool truncated = false;  // lengths differed; compared the common prefix
};

Displacement displacement(std::span<const geo::LatLon> actual,
                          std::span<const geo::LatLon> predicted);

// ---------------------------------------------------------------------------

struct EvalReport {
  std::string model;
  int fold = -1;  // -1 for the aggregate over folds
  double precision = 0.0;
  double recall = 0.0;
  double pairs_f1 = 0.0;
  double diversity = 0.0;
  double diversity_raw = 0.0;
  double displacement_mean_km = 0.0;
  double displacement_sum_km = 0.0;
  double f1_std = 0.0;  // across folds, aggregate rows only
  int queries = 0;
  double seconds = 0.0;  // training plus inference
};

// Metrics of one held-out session, averaged over the returned sequences.
struct QueryResult {
  std::string model;
  int fold = 0;
  int user = 0;
  int length = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  double diversity = 0.0, diversity_raw = 0.0;
  double displacement_mean_km = 0.0, displacement_sum_km = 0.0;
};

// Everything a model factory gets for one fold.
struct FoldContext {
  const Dataset& data;
  std::span<const Session> train;
  std::shared_ptr<const FeatureTables> tables;
  int fold;
  std::uint64_t seed;
};

struct ModelSpec {
  std::string name;
  std::function<std::unique_ptr<Recommender>(const FoldContext&)> build;
};

struct CvConfig {
  int folds = 5;
  std::uint64_t seed = 7;
  std::function<void(const std::string&)> log;  // progress and warnings
};

struct CvResult {
  std::vector<EvalReport> reports;  // per model per fold, then one aggregate per model
  std::vector<QueryResult> queries;
  std::vector<std::string> warnings;
};

// Per user, sessions are shuffled with the seed and dealt round-robin into
// folds. Users with fewer sessions than folds are not evaluated (their
// sessions still train). Each held-out session of length >= 2 becomes one
// query seeded with its first POI and hour.
CvResult cross_validate(const Dataset& data, std::span<const ModelSpec> models,
                        const CvConfig& config);

// Fold assignment used by cross_validate: fold index per session, -1 when the
// session's user is not evaluated.
std::vector<int> assign_folds(std::span<const Session> sessions, int folds, std::uint64_t seed);

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports);
void write_query_csv(std::ostream& out, std::span<const QueryResult> queries);
void write_timing_csv(std::ostream& out, std::span<const EvalReport> reports);
std::vector<QueryResult> read_query_csv(std::istream& in);

// Aggregates per model (mean over queries).
std::vector<EvalReport> summarize(std::span<const QueryResult> queries);
// Table with one row per model and one column per metric.
void write_text_table(std::ostream& out, std::span<const EvalReport> reports,
                      const std::string& title, bool show_raw_diversity = true);
// Mean metrics per (model, held-out length).
void write_length_sweep_csv(std::ostream& out, std::span<const QueryResult> queries);

}  // namespace caps
