#include "caps/caps_lstm.hpp"

#include <cmath>

#include "caps/error.hpp"

namespace caps {

namespace {

using num::Vector;

void add_into(std::span<double> y, std::span<const double> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

}  // namespace

LstmModel::LstmModel(ModelConfig config) : SequenceModel(std::move(config)) {
  config_.validate();
  if (config_.kind != ModelKind::caps_lstm) throw std::invalid_argument("LstmModel: wrong kind");
  const auto L = static_cast<std::size_t>(config_.num_pois);
  const auto E = static_cast<std::size_t>(config_.embedding);
  const auto H = static_cast<std::size_t>(config_.hidden);
  const auto A = static_cast<std::size_t>(config_.attr_dim);
  const auto Fd = static_cast<std::size_t>(config_.feature_dim);

  auto& b = blocks_;
  b.emb = params_.add("embedding", L, E);
  b.w_x = params_.add("W_x", 4 * H, E);
  b.w_h = params_.add("W_h", 4 * H, H);
  b.b = params_.add("b", 4 * H, 1);
  b.w_ci = params_.add("w_ci", H, 1);
  b.w_cf = params_.add("w_cf", H, 1);
  b.w_co = params_.add("w_co", H, 1);
  b.p_a = params_.add("P_A", H, A);
  b.b_a = params_.add("b_A", H, 1);
  b.w_feat = params_.add("W_feat", H, Fd);
  b.v = params_.add("V", L, H);
  b.b_y = params_.add("b_y", L, 1);
  b.g = params_.add("G", L, Fd);
}

LstmModel::LstmModel(ModelConfig config, std::uint64_t seed) : LstmModel(std::move(config)) {
  num::Rng rng(seed);
  for (auto& block : params_.blocks()) {
    if (block.value.cols() > 1) num::xavier_uniform(block.value, rng);
  }
  // forget gate starts open
  const auto H = static_cast<std::size_t>(config_.hidden);
  for (std::size_t i = H; i < 2 * H; ++i) params_[blocks_.b](i, 0) = 1.0;
}

std::unique_ptr<SequenceModel> LstmModel::clone() const { return std::make_unique<LstmModel>(*this); }

RecurrentState LstmModel::initial_state() const {
  RecurrentState s;
  s.v.assign(2, Vector(static_cast<std::size_t>(config_.hidden), 0.0));
  return s;
}

LstmModel::Step LstmModel::forward(const Vector& c_prev, const Vector& h_prev, int poi,
                                   std::span<const double> attr,
                                   std::span<const double> feature) const {
  check_poi(poi);
  if (attr.size() != static_cast<std::size_t>(config_.attr_dim) ||
      feature.size() != static_cast<std::size_t>(config_.feature_dim)) {
    throw ShapeError("LstmModel: context width mismatch");
  }
  const auto H = static_cast<std::size_t>(config_.hidden);
  const auto& b = blocks_;
  Step s;
  const auto row = params_[b.emb].row(static_cast<std::size_t>(poi));
  s.x.assign(row.begin(), row.end());
  s.c_prev = c_prev;
  s.h_prev = h_prev;

  Vector gp(H, 0.0);
  num::matvec_add(params_[b.p_a], attr, gp);
  add_into(gp, params_[b.b_a].data());
  s.gate = num::sigmoid(gp);
  s.hg = num::hadamard(h_prev, s.gate);

  Vector fin(H, 0.0);
  num::matvec_add(params_[b.w_feat], feature, fin);

  Vector pre(4 * H, 0.0);
  num::matvec_add(params_[b.w_x], s.x, pre);
  num::matvec_add(params_[b.w_h], s.hg, pre);
  const auto wci = params_[b.w_ci].data();
  const auto wcf = params_[b.w_cf].data();
  const auto wco = params_[b.w_co].data();
  for (std::size_t j = 0; j < H; ++j) {
    pre[j] += wci[j] * c_prev[j];
    pre[H + j] += wcf[j] * c_prev[j];
    pre[3 * H + j] += wco[j] * c_prev[j];
  }
  for (std::size_t q = 0; q < 4; ++q) {
    for (std::size_t j = 0; j < H; ++j) pre[q * H + j] += fin[j];
  }
  add_into(pre, params_[b.b].data());

  s.i.resize(H);
  s.f.resize(H);
  s.z.resize(H);
  s.o.resize(H);
  s.c.resize(H);
  s.tanh_c.resize(H);
  s.h.resize(H);
  for (std::size_t j = 0; j < H; ++j) {
    s.i[j] = num::sigmoid(pre[j]);
    s.f[j] = num::sigmoid(pre[H + j]);
    s.z[j] = std::tanh(pre[2 * H + j]);
    s.o[j] = num::sigmoid(pre[3 * H + j]);
    s.c[j] = s.f[j] * c_prev[j] + s.i[j] * s.z[j];
    s.tanh_c[j] = std::tanh(s.c[j]);
    s.h[j] = s.o[j] * s.tanh_c[j];
  }

  s.logits.assign(static_cast<std::size_t>(config_.num_pois), 0.0);
  num::matvec_add(params_[b.v], s.h, s.logits);
  num::matvec_add(params_[b.g], feature, s.logits);
  add_into(s.logits, params_[b.b_y].data());
  s.probs = num::softmax(s.logits);
  return s;
}

Vector LstmModel::step(RecurrentState& state, int poi, std::span<const double> attr,
                       std::span<const double> feature) const {
  Step s = forward(state.v.at(0), state.v.at(1), poi, attr, feature);
  state.v[0] = std::move(s.c);
  state.v[1] = std::move(s.h);
  return std::move(s.logits);
}

double LstmModel::sequence_nll(const TrainingSequence& seq, num::ParamSet* grads,
                               double scale) const {
  const std::size_t T = seq.steps();
  if (T == 0) return 0.0;
  const auto H = static_cast<std::size_t>(config_.hidden);
  const std::span<const double> feature(seq.feature);
  const auto& b = blocks_;

  std::vector<Step> steps;
  steps.reserve(T);
  Vector c(H, 0.0), h(H, 0.0);
  double loss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    steps.push_back(forward(c, h, seq.pois[t], seq.attrs.at(t), feature));
    check_poi(seq.pois[t + 1]);
    loss += num::cross_entropy(steps.back().logits, static_cast<std::size_t>(seq.pois[t + 1]));
    c = steps.back().c;
    h = steps.back().h;
  }
  if (!grads) return loss;

  auto& g = *grads;
  const auto wci = params_[b.w_ci].data();
  const auto wcf = params_[b.w_cf].data();
  const auto wco = params_[b.w_co].data();
  Vector dh_next(H, 0.0), dc_next(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    const Step& s = steps[t];
    Vector dlogits = s.probs;
    dlogits[static_cast<std::size_t>(seq.pois[t + 1])] -= 1.0;
    for (double& d : dlogits) d *= scale;

    num::outer_add(g[b.v], dlogits, s.h);
    add_into(g[b.b_y].data(), dlogits);
    num::outer_add(g[b.g], dlogits, feature);

    Vector dh = dh_next;
    num::matvec_t_add(params_[b.v], dlogits, dh);

    Vector dpre(4 * H);
    Vector dc_prev(H);
    for (std::size_t j = 0; j < H; ++j) {
      const double dc = dc_next[j] + dh[j] * s.o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]);
      const double d_o = dh[j] * s.tanh_c[j];
      const double d_i = dc * s.z[j];
      const double d_z = dc * s.i[j];
      const double d_f = dc * s.c_prev[j];
      dpre[j] = d_i * s.i[j] * (1.0 - s.i[j]);
      dpre[H + j] = d_f * s.f[j] * (1.0 - s.f[j]);
      dpre[2 * H + j] = d_z * (1.0 - s.z[j] * s.z[j]);
      dpre[3 * H + j] = d_o * s.o[j] * (1.0 - s.o[j]);
      dc_prev[j] = dc * s.f[j] + wci[j] * dpre[j] + wcf[j] * dpre[H + j] +
                   wco[j] * dpre[3 * H + j];
    }

    num::outer_add(g[b.w_x], dpre, s.x);
    num::outer_add(g[b.w_h], dpre, s.hg);
    add_into(g[b.b].data(), dpre);
    auto gci = g[b.w_ci].data();
    auto gcf = g[b.w_cf].data();
    auto gco = g[b.w_co].data();
    Vector dfin(H);
    for (std::size_t j = 0; j < H; ++j) {
      gci[j] += dpre[j] * s.c_prev[j];
      gcf[j] += dpre[H + j] * s.c_prev[j];
      gco[j] += dpre[3 * H + j] * s.c_prev[j];
      dfin[j] = dpre[j] + dpre[H + j] + dpre[2 * H + j] + dpre[3 * H + j];
    }
    num::outer_add(g[b.w_feat], dfin, feature);
    num::matvec_t_add(params_[b.w_x], dpre, g[b.emb].row(static_cast<std::size_t>(seq.pois[t])));

    Vector dhg(H, 0.0);
    num::matvec_t_add(params_[b.w_h], dpre, dhg);
    Vector dgp(H);
    for (std::size_t j = 0; j < H; ++j) {
      dh_next[j] = dhg[j] * s.gate[j];
      dgp[j] = dhg[j] * s.h_prev[j] * s.gate[j] * (1.0 - s.gate[j]);
    }
    num::outer_add(g[b.p_a], dgp, seq.attrs[t]);
    add_into(g[b.b_a].data(), dgp);
    dc_next = std::move(dc_prev);
  }
  return loss;
}

}  // namespace caps
