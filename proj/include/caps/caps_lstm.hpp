#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "caps/sequence_model.hpp"

namespace caps {

// Single-layer LSTM with attribute-gated recurrence and feature injection:
//   hg  = h(t-1) * sigmoid(P_A A + b_A)
//   i   = sigmoid(W_xi x + W_hi hg + w_ci * c(t-1) + b_i + W_feat F)
//   f   = sigmoid(W_xf x + W_hf hg + w_cf * c(t-1) + b_f + W_feat F)
//   z   = tanh   (W_xz x + W_hz hg                + b_z + W_feat F)
//   o   = sigmoid(W_xo x + W_ho hg + w_co * c(t-1) + b_o + W_feat F)
//   c   = f * c(t-1) + i * z,   h = o * tanh(c)
//   logits = V h + G F + b_y
// Gate rows are stacked in the order i, f, z, o. Peepholes are diagonal.
class LstmModel final : public SequenceModel {
 public:
  LstmModel(ModelConfig config, std::uint64_t seed);
  explicit LstmModel(ModelConfig config);

  std::unique_ptr<SequenceModel> clone() const override;
  RecurrentState initial_state() const override;  // {c, h}
  num::Vector step(RecurrentState& state, int poi, std::span<const double> attr,
                   std::span<const double> feature) const override;
  double sequence_nll(const TrainingSequence& seq, num::ParamSet* grads = nullptr,
                      double scale = 1.0) const override;

  struct Blocks {
    std::size_t emb, w_x, w_h, b, w_ci, w_cf, w_co, p_a, b_a, w_feat, v, b_y, g;
  };
  const Blocks& blocks() const { return blocks_; }

  // Intermediate values of one step, exposed for inspection.
  struct Step {
    num::Vector x, gate, hg, c_prev, h_prev;
    num::Vector i, f, z, o, c, tanh_c, h;
    num::Vector logits, probs;
  };
  Step forward(const num::Vector& c_prev, const num::Vector& h_prev, int poi,
               std::span<const double> attr, std::span<const double> feature) const;

 private:
  Blocks blocks_{};
};

}  // namespace caps
