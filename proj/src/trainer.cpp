#include "caps/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "caps/error.hpp"

namespace caps {

std::unique_ptr<SequenceModel> make_model(const ModelConfig& config, std::uint64_t seed) {
  if (config.kind == ModelKind::caps_lstm) return std::make_unique<LstmModel>(config, seed);
  return std::make_unique<RnnModel>(config, seed);
}

TrainingSequence make_sequence(const AttributeTables& tables, std::span<const Visit> visits,
                               std::optional<FeatureVector> context) {
  TrainingSequence seq;
  seq.pois.reserve(visits.size());
  seq.attrs.reserve(visits.size());
  for (std::size_t t = 0; t < visits.size(); ++t) {
    const std::optional<int> prev = t > 0 ? std::optional<int>(visits[t - 1].poi) : std::nullopt;
    seq.pois.push_back(visits[t].poi);
    seq.attrs.push_back(
        tables.encode(tables.attribute_vector(visits[t].poi, visits[t].arrival_hour(), prev)));
  }
  seq.feature = tables.encode(context ? *context : tables.feature_vector(visits));
  return seq;
}

std::vector<TrainingSequence> build_training_sequences(const AttributeTables& tables,
                                                       std::span<const Session> sessions,
                                                       int max_len) {
  if (max_len < 2) throw std::invalid_argument("max_len must be >= 2");
  std::vector<TrainingSequence> out;
  for (const auto& s : sessions) {
    if (s.size() < 2) continue;
    const FeatureVector fv = tables.feature_vector(s.visits);
    const std::span<const Visit> all(s.visits);
    for (std::size_t begin = 0; begin < all.size(); begin += static_cast<std::size_t>(max_len)) {
      const std::size_t n = std::min(all.size() - begin, static_cast<std::size_t>(max_len));
      if (n < 2) break;
      out.push_back(make_sequence(tables, all.subspan(begin, n), fv));
    }
  }
  return out;
}

TrainResult train(SequenceModel& model, std::span<const TrainingSequence> data,
                  const num::SgdConfig& config, std::uint64_t seed,
                  const std::function<void(int, double)>& on_epoch) {
  config.validate();
  if (data.empty()) throw DataError("no training sequences (need sessions of length >= 2)");

  num::Rng rng(seed);
  num::ParamSet grads = model.params().zeros_like();
  num::Adam adam(model.params());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      const double scale = 1.0 / static_cast<double>(end - begin);
      grads.set_zero();
      for (std::size_t i = begin; i < end; ++i) {
        epoch_loss += model.sequence_nll(data[order[i]], &grads, scale);
      }
      if (!std::isfinite(epoch_loss)) {
        throw NumericalError("training loss diverged at epoch " + std::to_string(epoch));
      }
      if (config.optimizer == num::OptimizerKind::adam) {
        adam.step(model.params(), grads, config);
      } else {
        num::sgd_step(model.params(), grads, config);
      }
    }
    const double mean = epoch_loss / static_cast<double>(data.size());
    result.loss_curve.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  model.params().check_finite("parameters after training");
  return result;
}

void save_checkpoint(const SequenceModel& model, const std::filesystem::path& path,
                     const nlohmann::json& extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  num::save_params(out, model.params());

  const auto& c = model.config();
  nlohmann::json side = extra;
  side["kind"] = to_string(c.kind);
  side["num_pois"] = c.num_pois;
  side["embedding"] = c.embedding;
  side["hidden"] = c.hidden;
  side["layers"] = c.layers;
  side["attr_dim"] = c.attr_dim;
  side["feature_dim"] = c.feature_dim;
  std::ofstream meta(path.string() + ".json");
  if (!meta) throw DataError("cannot write " + path.string() + ".json");
  meta << side.dump(2) << '\n';
}

std::unique_ptr<SequenceModel> load_checkpoint(const std::filesystem::path& path,
                                               nlohmann::json* sidecar) {
  std::ifstream meta(path.string() + ".json");
  if (!meta) throw DataError("missing checkpoint sidecar " + path.string() + ".json");
  nlohmann::json side;
  ModelConfig c;
  try {
    side = nlohmann::json::parse(meta);
    c.kind = parse_model_kind(side.at("kind").get<std::string>());
    c.num_pois = side.at("num_pois").get<int>();
    c.embedding = side.at("embedding").get<int>();
    c.hidden = side.at("hidden").get<int>();
    c.layers = side.at("layers").get<int>();
    c.attr_dim = side.at("attr_dim").get<int>();
    c.feature_dim = side.at("feature_dim").get<int>();
  } catch (const std::exception& e) {
    throw DataError("malformed checkpoint sidecar: " + std::string(e.what()));
  }
  std::unique_ptr<SequenceModel> model;
  if (c.kind == ModelKind::caps_lstm) {
    model = std::make_unique<LstmModel>(c);
  } else {
    model = std::make_unique<RnnModel>(c);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  num::ParamSet loaded = num::load_params(in);
  if (!loaded.same_layout(model->params())) {
    throw DataError("checkpoint " + path.string() + " does not match its sidecar shape");
  }
  model->params() = std::move(loaded);
  if (sidecar) *sidecar = std::move(side);
  return model;
}

}  // namespace caps
