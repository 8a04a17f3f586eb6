#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "caps/baselines.hpp"
#include "caps/eval_metrics.hpp"
#include "caps/numerics.hpp"
#include "caps/sequence_model.hpp"

namespace caps {

// Hyperparameters of every model the evaluator can build.
struct PipelineConfig {
  int rnn_embedding = 384;
  int rnn_hidden = 256;
  int rnn_layers = 5;
  int lstm_embedding = 384;
  int lstm_hidden = 512;
  num::SgdConfig sgd;
  int candidates = 10;
  int top_k = 1;
  double popularity_radius_km = 2.0;
  double popularity_growth = 1.5;
  double markov_smoothing = 1.0;
  AprioriConfig apriori;
  double hits_radius_km = 10.0;
  // Called after each training epoch with (model name, epoch, loss).
  std::function<void(const std::string&, int, double)> on_epoch;
};

ModelConfig model_config(ModelKind kind, int num_pois, const PipelineConfig& config);

// Known names: plain-rnn, caps-rnn, caps-lstm, popularity, markov, apriori,
// hits; "all" expands to every model. Throws std::invalid_argument otherwise.
std::vector<std::string> expand_model_names(const std::vector<std::string>& names);
std::vector<ModelSpec> make_model_specs(const std::vector<std::string>& names,
                                        const PipelineConfig& config);

}  // namespace caps
