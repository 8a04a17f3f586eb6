#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "caps/context_features.hpp"
#include "caps/numerics.hpp"

namespace caps {

enum class ModelKind { plain_rnn, caps_rnn, caps_lstm };

std::string to_string(ModelKind kind);
// Accepts "plain-rnn", "caps-rnn", "caps-lstm"; throws std::invalid_argument.
ModelKind parse_model_kind(const std::string& name);

struct ModelConfig {
  ModelKind kind = ModelKind::caps_lstm;
  int num_pois = 0;
  int embedding = 384;
  int hidden = 256;  // 512 is the usual LSTM width
  int layers = 5;    // RNN only
  int attr_dim = static_cast<int>(kAttributeDim);
  int feature_dim = static_cast<int>(kFeatureDim);

  bool contextual() const { return kind != ModelKind::plain_rnn; }
  void validate() const;
};

// One teacher-forced training example. attrs[t] is the context of pois[t];
// the model reads pois[0..T-1] and predicts pois[1..T].
struct TrainingSequence {
  std::vector<int> pois;
  std::vector<std::array<double, kAttributeDim>> attrs;
  std::array<double, kFeatureDim> feature{};

  std::size_t steps() const { return pois.empty() ? 0 : pois.size() - 1; }
};

// Opaque recurrent state: per-layer hidden vectors for the RNN, {c, h} for
// the LSTM.
struct RecurrentState {
  std::vector<num::Vector> v;
};

class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  virtual std::unique_ptr<SequenceModel> clone() const = 0;
  virtual RecurrentState initial_state() const = 0;
  // Consumes one input step and returns the output logits over POIs.
  virtual num::Vector step(RecurrentState& state, int poi, std::span<const double> attr,
                           std::span<const double> feature) const = 0;
  // -sum_t log p(pois[t+1] | pois[0..t]). When grads is given, adds
  // scale * d(loss)/d(params) into it.
  virtual double sequence_nll(const TrainingSequence& seq, num::ParamSet* grads = nullptr,
                              double scale = 1.0) const = 0;

  const ModelConfig& config() const { return config_; }
  ModelKind kind() const { return config_.kind; }
  int num_pois() const { return config_.num_pois; }
  num::ParamSet& params() { return params_; }
  const num::ParamSet& params() const { return params_; }

 protected:
  explicit SequenceModel(ModelConfig config) : config_(std::move(config)) {}

  void check_poi(int poi) const;

  ModelConfig config_;
  num::ParamSet params_;
};

}  // namespace caps
