#include "caps/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "caps/trainer.hpp"

namespace caps {

namespace {

const std::vector<std::string> kAllModels = {"popularity", "markov", "apriori",  "hits",
                                             "plain-rnn",  "caps-rnn", "caps-lstm"};

}  // namespace

ModelConfig model_config(ModelKind kind, int num_pois, const PipelineConfig& config) {
  ModelConfig c;
  c.kind = kind;
  c.num_pois = num_pois;
  if (kind == ModelKind::caps_lstm) {
    c.embedding = config.lstm_embedding;
    c.hidden = config.lstm_hidden;
    c.layers = 1;
  } else {
    c.embedding = config.rnn_embedding;
    c.hidden = config.rnn_hidden;
    c.layers = config.rnn_layers;
  }
  return c;
}

std::vector<std::string> expand_model_names(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (n == "all") {
      for (const auto& m : kAllModels) {
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
      }
      continue;
    }
    if (std::find(kAllModels.begin(), kAllModels.end(), n) == kAllModels.end()) {
      throw std::invalid_argument("unknown model '" + n + "'");
    }
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  }
  return out;
}

std::vector<ModelSpec> make_model_specs(const std::vector<std::string>& names,
                                        const PipelineConfig& config) {
  std::vector<ModelSpec> specs;
  for (const auto& name : expand_model_names(names)) {
    ModelSpec spec;
    spec.name = name;
    if (name == "popularity") {
      spec.build = [config](const FoldContext& ctx) -> std::unique_ptr<Recommender> {
        return std::make_unique<PopularityRecommender>(PopularityModel(ctx.data, ctx.train),
                                                       config.popularity_radius_km,
                                                       config.popularity_growth);
      };
    } else if (name == "markov") {
      spec.build = [config](const FoldContext& ctx) -> std::unique_ptr<Recommender> {
        return std::make_unique<MarkovRecommender>(
            MarkovModel::fit(ctx.train, config.markov_smoothing));
      };
    } else if (name == "apriori") {
      spec.build = [config](const FoldContext& ctx) -> std::unique_ptr<Recommender> {
        return std::make_unique<AprioriRecommender>(AprioriModel(ctx.tables), config.apriori);
      };
    } else if (name == "hits") {
      spec.build = [config](const FoldContext& ctx) -> std::unique_ptr<Recommender> {
        return std::make_unique<HitsRecommender>(
            HitsModel::fit(ctx.data, ctx.train, config.hits_radius_km));
      };
    } else {
      const ModelKind kind = parse_model_kind(name);
      spec.build = [config, kind, name](const FoldContext& ctx) -> std::unique_ptr<Recommender> {
        const auto sequences = build_training_sequences(ctx.tables->attrs, ctx.train);
        const ModelConfig mc =
            model_config(kind, static_cast<int>(ctx.data.pois.size()), config);
        std::shared_ptr<SequenceModel> model = make_model(mc, ctx.seed);
        std::function<void(int, double)> cb;
        if (config.on_epoch) cb = [&](int e, double l) { config.on_epoch(name, e, l); };
        train(*model, sequences, config.sgd, num::mix_seed(ctx.seed, 1), cb);
        return std::make_unique<NeuralRecommender>(name, std::move(model), ctx.tables,
                                                   config.candidates, config.top_k);
      };
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace caps
