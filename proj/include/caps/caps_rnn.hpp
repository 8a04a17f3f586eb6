#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "caps/sequence_model.hpp"

namespace caps {

// Stacked tanh RNN. In contextual mode every layer computes
//   g    = sigmoid(P_A A + b_A)
//   c(t) = tanh(W_x x + W_h (c(t-1) * g) + F f + b)
// and the output is logits = V c_top + G f + b_y. Plain mode drops g, F and G.
class RnnModel final : public SequenceModel {
 public:
  // Xavier-uniform weights, zero biases.
  RnnModel(ModelConfig config, std::uint64_t seed);
  // Blocks allocated but left zero.
  explicit RnnModel(ModelConfig config);

  std::unique_ptr<SequenceModel> clone() const override;
  RecurrentState initial_state() const override;
  num::Vector step(RecurrentState& state, int poi, std::span<const double> attr,
                   std::span<const double> feature) const override;
  double sequence_nll(const TrainingSequence& seq, num::ParamSet* grads = nullptr,
                      double scale = 1.0) const override;

  struct Layer {
    std::size_t w_x, w_h, b;
    std::size_t p_a = 0, b_a = 0, f = 0;  // contextual only
  };
  const Layer& layer(int k) const { return layers_.at(static_cast<std::size_t>(k)); }
  std::size_t embedding_block() const { return emb_; }
  std::size_t output_block() const { return v_; }
  std::size_t output_bias_block() const { return b_y_; }
  std::size_t output_feature_block() const { return g_; }

 private:
  struct StepCache {
    std::vector<num::Vector> x, gate, r, c, c_prev;  // per layer
    num::Vector logits, probs;
  };
  void forward(const std::vector<num::Vector>& prev, int poi, std::span<const double> attr,
               std::span<const double> feature, StepCache& cache) const;

  std::vector<Layer> layers_;
  std::size_t emb_ = 0, v_ = 0, b_y_ = 0, g_ = 0;
};

struct RnnStep {
  RecurrentState state;
  num::Vector logits;
  num::Vector probs;
};

// Pure single-step form: returns the new state with logits and softmax.
RnnStep forward_step(const SequenceModel& model, const RecurrentState& state, int poi,
                     std::span<const double> attr, std::span<const double> feature);

}  // namespace caps
