#include "caps/caps_rnn.hpp"

#include <cmath>

#include "caps/error.hpp"

namespace caps {

namespace {

using num::Matrix;
using num::Vector;

std::span<const double> as_span(const Matrix& m) { return m.data(); }

void add_into(std::span<double> y, std::span<const double> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

}  // namespace

RnnModel::RnnModel(ModelConfig config) : SequenceModel(std::move(config)) {
  config_.validate();
  if (config_.kind == ModelKind::caps_lstm) throw std::invalid_argument("RnnModel: wrong kind");
  const auto L = static_cast<std::size_t>(config_.num_pois);
  const auto E = static_cast<std::size_t>(config_.embedding);
  const auto H = static_cast<std::size_t>(config_.hidden);
  const auto A = static_cast<std::size_t>(config_.attr_dim);
  const auto Fd = static_cast<std::size_t>(config_.feature_dim);

  emb_ = params_.add("embedding", L, E);
  for (int k = 0; k < config_.layers; ++k) {
    const std::string s = std::to_string(k);
    Layer layer{};
    layer.w_x = params_.add("W_x" + s, H, k == 0 ? E : H);
    layer.w_h = params_.add("W_h" + s, H, H);
    layer.b = params_.add("b" + s, H, 1);
    if (config_.contextual()) {
      layer.p_a = params_.add("P_A" + s, H, A);
      layer.b_a = params_.add("b_A" + s, H, 1);
      layer.f = params_.add("F" + s, H, Fd);
    }
    layers_.push_back(layer);
  }
  v_ = params_.add("V", L, H);
  b_y_ = params_.add("b_y", L, 1);
  if (config_.contextual()) g_ = params_.add("G", L, Fd);
}

RnnModel::RnnModel(ModelConfig config, std::uint64_t seed) : RnnModel(std::move(config)) {
  num::Rng rng(seed);
  for (auto& block : params_.blocks()) {
    if (block.value.cols() > 1) num::xavier_uniform(block.value, rng);
  }
}

std::unique_ptr<SequenceModel> RnnModel::clone() const { return std::make_unique<RnnModel>(*this); }

RecurrentState RnnModel::initial_state() const {
  RecurrentState s;
  s.v.assign(layers_.size(), Vector(static_cast<std::size_t>(config_.hidden), 0.0));
  return s;
}

void RnnModel::forward(const std::vector<Vector>& prev, int poi, std::span<const double> attr,
                       std::span<const double> feature, StepCache& cache) const {
  check_poi(poi);
  const bool ctx = config_.contextual();
  if (ctx && (attr.size() != static_cast<std::size_t>(config_.attr_dim) ||
              feature.size() != static_cast<std::size_t>(config_.feature_dim))) {
    throw ShapeError("RnnModel: context width mismatch");
  }
  const auto H = static_cast<std::size_t>(config_.hidden);
  const std::size_t n = layers_.size();
  cache.x.resize(n);
  cache.gate.resize(n);
  cache.r.resize(n);
  cache.c.resize(n);
  cache.c_prev.resize(n);

  for (std::size_t k = 0; k < n; ++k) {
    const Layer& l = layers_[k];
    const auto in = k == 0 ? params_[emb_].row(static_cast<std::size_t>(poi))
                           : std::span<const double>(cache.c[k - 1]);
    cache.x[k].assign(in.begin(), in.end());
    cache.c_prev[k] = prev[k];

    if (ctx) {
      Vector gp(H, 0.0);
      num::matvec_add(params_[l.p_a], attr, gp);
      add_into(gp, as_span(params_[l.b_a]));
      cache.gate[k] = num::sigmoid(gp);
      cache.r[k] = num::hadamard(prev[k], cache.gate[k]);
    } else {
      cache.gate[k].clear();
      cache.r[k] = prev[k];
    }

    Vector pre(H, 0.0);
    num::matvec_add(params_[l.w_x], cache.x[k], pre);
    num::matvec_add(params_[l.w_h], cache.r[k], pre);
    if (ctx) num::matvec_add(params_[l.f], feature, pre);
    add_into(pre, as_span(params_[l.b]));
    cache.c[k] = num::tanh(pre);
  }

  cache.logits.assign(static_cast<std::size_t>(config_.num_pois), 0.0);
  num::matvec_add(params_[v_], cache.c.back(), cache.logits);
  if (ctx) num::matvec_add(params_[g_], feature, cache.logits);
  add_into(cache.logits, as_span(params_[b_y_]));
  cache.probs = num::softmax(cache.logits);
}

Vector RnnModel::step(RecurrentState& state, int poi, std::span<const double> attr,
                      std::span<const double> feature) const {
  StepCache cache;
  forward(state.v, poi, attr, feature, cache);
  state.v = std::move(cache.c);
  return std::move(cache.logits);
}

double RnnModel::sequence_nll(const TrainingSequence& seq, num::ParamSet* grads,
                              double scale) const {
  const std::size_t T = seq.steps();
  if (T == 0) return 0.0;
  const bool ctx = config_.contextual();
  const std::size_t n = layers_.size();
  const auto H = static_cast<std::size_t>(config_.hidden);
  const std::span<const double> feature(seq.feature);

  std::vector<StepCache> caches(T);
  std::vector<Vector> state = initial_state().v;
  double loss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto attr = ctx ? std::span<const double>(seq.attrs.at(t)) : std::span<const double>();
    forward(state, seq.pois[t], attr, feature, caches[t]);
    check_poi(seq.pois[t + 1]);
    loss += num::cross_entropy(caches[t].logits, static_cast<std::size_t>(seq.pois[t + 1]));
    state = caches[t].c;
  }
  if (!grads) return loss;

  auto& g = *grads;
  std::vector<Vector> dc_next(n, Vector(H, 0.0));
  for (std::size_t t = T; t-- > 0;) {
    const StepCache& cache = caches[t];
    Vector dlogits = cache.probs;
    dlogits[static_cast<std::size_t>(seq.pois[t + 1])] -= 1.0;
    for (double& d : dlogits) d *= scale;

    num::outer_add(g[v_], dlogits, cache.c.back());
    add_into(g[b_y_].data(), dlogits);
    if (ctx) num::outer_add(g[g_], dlogits, feature);

    std::vector<Vector> dc = dc_next;
    num::matvec_t_add(params_[v_], dlogits, dc.back());

    for (std::size_t k = n; k-- > 0;) {
      const Layer& l = layers_[k];
      Vector dpre(H);
      for (std::size_t i = 0; i < H; ++i) {
        const double c = cache.c[k][i];
        dpre[i] = dc[k][i] * (1.0 - c * c);
      }
      num::outer_add(g[l.w_x], dpre, cache.x[k]);
      num::outer_add(g[l.w_h], dpre, cache.r[k]);
      add_into(g[l.b].data(), dpre);
      if (ctx) num::outer_add(g[l.f], dpre, feature);

      if (k > 0) {
        num::matvec_t_add(params_[l.w_x], dpre, dc[k - 1]);
      } else {
        num::matvec_t_add(params_[l.w_x], dpre, g[emb_].row(static_cast<std::size_t>(seq.pois[t])));
      }

      Vector dr(H, 0.0);
      num::matvec_t_add(params_[l.w_h], dpre, dr);
      if (ctx) {
        const Vector& gate = cache.gate[k];
        Vector dgp(H);
        for (std::size_t i = 0; i < H; ++i) {
          dc_next[k][i] = dr[i] * gate[i];
          dgp[i] = dr[i] * cache.c_prev[k][i] * gate[i] * (1.0 - gate[i]);
        }
        num::outer_add(g[l.p_a], dgp, seq.attrs[t]);
        add_into(g[l.b_a].data(), dgp);
      } else {
        dc_next[k] = std::move(dr);
      }
    }
  }
  return loss;
}

RnnStep forward_step(const SequenceModel& model, const RecurrentState& state, int poi,
                     std::span<const double> attr, std::span<const double> feature) {
  RnnStep out;
  out.state = state;
  out.logits = model.step(out.state, poi, attr, feature);
  out.probs = num::softmax(out.logits);
  return out;
}

}  // namespace caps
