#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "caps/caps_lstm.hpp"
#include "caps/caps_rnn.hpp"
#include "caps/context_features.hpp"
#include "caps/numerics.hpp"
#include "caps/sequence_model.hpp"

namespace caps {

inline constexpr int kMaxSequenceLength = 25;

std::unique_ptr<SequenceModel> make_model(const ModelConfig& config, std::uint64_t seed);

// Attribute vectors follow each visit's arrival hour and predecessor. The
// feature vector describes `context` (defaults to the visits themselves).
TrainingSequence make_sequence(const AttributeTables& tables, std::span<const Visit> visits,
                               std::optional<FeatureVector> context = std::nullopt);

// Non-singleton sessions, cut into windows of at most max_len visits. Every
// window carries the feature vector of its whole session.
std::vector<TrainingSequence> build_training_sequences(const AttributeTables& tables,
                                                       std::span<const Session> sessions,
                                                       int max_len = kMaxSequenceLength);

struct TrainResult {
  std::vector<double> loss_curve;  // mean per-sequence NLL of each epoch
};

// Shuffled mini-batches; the batch loss is the mean of per-sequence NLL sums.
// Throws NumericalError naming the epoch when the loss stops being finite.
TrainResult train(SequenceModel& model, std::span<const TrainingSequence> data,
                  const num::SgdConfig& config, std::uint64_t seed,
                  const std::function<void(int epoch, double loss)>& on_epoch = {});

// Writes the parameter snapshot to `path` and a JSON sidecar to path + ".json"
// holding the model kind, shape and `extra`.
void save_checkpoint(const SequenceModel& model, const std::filesystem::path& path,
                     const nlohmann::json& extra = nlohmann::json::object());
std::unique_ptr<SequenceModel> load_checkpoint(const std::filesystem::path& path,
                                               nlohmann::json* sidecar = nullptr);

}  // namespace caps
