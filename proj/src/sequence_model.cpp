#include "caps/sequence_model.hpp"

#include <stdexcept>

namespace caps {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::plain_rnn: return "plain-rnn";
    case ModelKind::caps_rnn: return "caps-rnn";
    case ModelKind::caps_lstm: return "caps-lstm";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "plain-rnn") return ModelKind::plain_rnn;
  if (name == "caps-rnn") return ModelKind::caps_rnn;
  if (name == "caps-lstm") return ModelKind::caps_lstm;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

void ModelConfig::validate() const {
  if (num_pois < 1) throw std::invalid_argument("model needs at least one POI");
  if (embedding < 1 || hidden < 1) throw std::invalid_argument("embedding and hidden must be >= 1");
  if (kind != ModelKind::caps_lstm && layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (attr_dim < 0 || feature_dim < 0) throw std::invalid_argument("negative context width");
}

void SequenceModel::check_poi(int poi) const {
  if (poi < 0 || poi >= config_.num_pois) {
    throw std::out_of_range("poi index " + std::to_string(poi) + " outside [0," +
                            std::to_string(config_.num_pois) + ")");
  }
}

}  // namespace caps
