#include "caps/cli.hpp"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "caps/baselines.hpp"
#include "caps/checkin_data.hpp"
#include "caps/context_features.hpp"
#include "caps/error.hpp"
#include "caps/eval_metrics.hpp"
#include "caps/kernels.hpp"
#include "caps/pipeline.hpp"
#include "caps/seq_generation.hpp"
#include "caps/trainer.hpp"

namespace caps::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string default_data_dir() {
  const char* env = std::getenv("CAPS_DATA_DIR");
  return env && *env ? env : "data";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t encoding_hash(const Dataset& data) {
  std::uint64_t h = 1469598103934665603ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const auto& p : data.enc.pois()) feed(p);
  for (const auto& c : data.enc.categories()) feed(c);
  return h;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void write_manifest(const fs::path& dir, json manifest) {
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

struct Hyper {
  PipelineConfig pipe;
  std::string clip_mode = "global";
  std::string optimizer = "adam";

  void add_to(CLI::App& app, bool with_eval_options) {
    app.add_option("--rnn-embedding", pipe.rnn_embedding, "RNN embedding width")->capture_default_str();
    app.add_option("--rnn-hidden", pipe.rnn_hidden, "RNN units per layer")->capture_default_str();
    app.add_option("--rnn-layers", pipe.rnn_layers, "RNN layers")->capture_default_str();
    app.add_option("--lstm-embedding", pipe.lstm_embedding, "LSTM embedding width")->capture_default_str();
    app.add_option("--lstm-hidden", pipe.lstm_hidden, "LSTM hidden states")->capture_default_str();
    app.add_option("--lr", pipe.sgd.learning_rate, "learning rate")->capture_default_str();
    app.add_option("--clip", pipe.sgd.clip, "gradient clipping threshold")->capture_default_str();
    app.add_option("--clip-mode", clip_mode, "global | elementwise")
        ->check(CLI::IsMember({"global", "elementwise"}))
        ->capture_default_str();
    app.add_option("--optimizer", optimizer, "adam | sgd")
        ->check(CLI::IsMember({"adam", "sgd"}))
        ->capture_default_str();
    app.add_option("--batch", pipe.sgd.batch_size, "mini-batch size")->capture_default_str();
    app.add_option("--epochs", pipe.sgd.epochs, "training epochs")->capture_default_str();
    if (!with_eval_options) return;
    app.add_option("--candidates", pipe.candidates, "sampled sequences per query")->capture_default_str();
    app.add_option("--top-k", pipe.top_k, "sequences kept per query")->capture_default_str();
    app.add_option("--radius", pipe.popularity_radius_km, "popularity search radius (km)")->capture_default_str();
    app.add_option("--growth", pipe.popularity_growth, "popularity radius growth factor")->capture_default_str();
    app.add_option("--smoothing", pipe.markov_smoothing, "Markov Laplace pseudo-count")->capture_default_str();
    app.add_option("--epsilon", pipe.apriori.epsilon_km, "Apriori max hop distance (km)")->capture_default_str();
    app.add_option("--budget-hours", budget_hours, "Apriori time budget (hours)")->capture_default_str();
    app.add_option("--beam", pipe.apriori.beam, "Apriori beam width")->capture_default_str();
    app.add_option("--hits-radius", pipe.hits_radius_km, "HITS region radius (km)")->capture_default_str();
  }

  void finish() {
    pipe.sgd.clip_mode = clip_mode == "global" ? num::ClipMode::global_norm : num::ClipMode::elementwise;
    pipe.sgd.optimizer = optimizer == "adam" ? num::OptimizerKind::adam : num::OptimizerKind::sgd;
    pipe.apriori.budget_seconds = budget_hours * 3600.0;
    pipe.sgd.validate();
  }

  json to_json() const {
    return {{"rnn_embedding", pipe.rnn_embedding}, {"rnn_hidden", pipe.rnn_hidden},
            {"rnn_layers", pipe.rnn_layers},       {"lstm_embedding", pipe.lstm_embedding},
            {"lstm_hidden", pipe.lstm_hidden},     {"lr", pipe.sgd.learning_rate},
            {"clip", pipe.sgd.clip},               {"clip_mode", clip_mode},
            {"optimizer", optimizer},              {"batch", pipe.sgd.batch_size},
            {"epochs", pipe.sgd.epochs}};
  }

  double budget_hours = 8.0;
};


struct SynthArgs {
  SynthConfig config;
  std::string out = default_data_dir() + "/synth";
};

int do_synth(const SynthArgs& a, std::ostream& out) {
  const auto data = synth_dataset(a.config);
  const fs::path dir(a.out);
  {
    auto f = open_out(dir / "checkins.csv");
    write_checkins_csv(f, data.records);
  }
  {
    auto f = open_out(dir / "friends.csv");
    f << "userid1,userid2\n";
    for (const auto& [x, y] : data.friendships) f << x << ',' << y << '\n';
  }
  write_manifest(dir, {{"command", "synth"},
                       {"seed", a.config.seed},
                       {"users", a.config.users},
                       {"pois", a.config.pois},
                       {"days", a.config.days},
                       {"records", data.records.size()}});
  out << "wrote " << data.records.size() << " check-ins to " << (dir / "checkins.csv").string()
      << '\n';
  return kOk;
}

struct IngestArgs {
  std::string checkins;
  std::string friends;
  std::string format = "weeplaces";
  int min_checkins = 25;
  std::string travel = "walking";
  std::string out = default_data_dir();
};

int do_ingest(const IngestArgs& a, std::ostream& out) {
  const auto parsed = parse_checkins(a.checkins, parse_format(a.format));
  std::vector<std::pair<std::string, std::string>> friends;
  if (!a.friends.empty()) friends = parse_friendships(a.friends);
  BuildOptions opts;
  opts.min_checkins = a.min_checkins;
  opts.fit_lognormal_travel = a.travel == "lognormal";
  const Dataset data = build_dataset(parsed.records, friends, opts);
  save_dataset(data, a.out);
  write_manifest(a.out, {{"command", "ingest"},
                         {"checkins", a.checkins},
                         {"format", a.format},
                         {"rows", parsed.rows},
                         {"dropped", parsed.dropped},
                         {"min_checkins", a.min_checkins},
                         {"travel", a.travel},
                         {"sessions", data.sessions.size()},
                         {"users", data.num_active_users()},
                         {"pois", data.pois.size()}});
  out << "rows " << parsed.rows << ", dropped " << parsed.dropped << ", users "
      << data.num_active_users() << ", pois " << data.pois.size() << ", sessions "
      << data.sessions.size() << '\n';
  return kOk;
}

struct FeaturesArgs {
  std::string data = default_data_dir();
  std::string out;
};

int do_features(const FeaturesArgs& a, std::ostream& out) {
  const Dataset data = load_dataset(a.data);
  const FeatureTables tables = build_feature_tables(data, data.sessions);
  const fs::path path = a.out.empty() ? fs::path(a.data) / "features.json" : fs::path(a.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  tables.attrs.save(path);
  out << "wrote feature tables for " << data.pois.size() << " POIs to " << path.string() << '\n';
  return kOk;
}

struct TrainArgs {
  std::string data = default_data_dir();
  std::string model = "caps-lstm";
  std::uint64_t seed = 7;
  std::string out;
  std::string loss_csv;
  Hyper hyper;
};

int do_train(TrainArgs& a, std::ostream& out, std::ostream& err) {
  a.hyper.finish();
  const Dataset data = load_dataset(a.data);
  const ModelKind kind = parse_model_kind(a.model);
  const FeatureTables tables = build_feature_tables(data, data.sessions);
  const auto sequences = build_training_sequences(tables.attrs, data.sessions);
  auto model = make_model(model_config(kind, static_cast<int>(data.pois.size()), a.hyper.pipe),
                          a.seed);
  const auto result = train(*model, sequences, a.hyper.pipe.sgd, num::mix_seed(a.seed, 1),
                            [&](int epoch, double loss) {
                              err << "epoch " << epoch << " loss " << loss << '\n';
                            });
  const fs::path ckpt = a.out.empty() ? fs::path(a.data) / (a.model + ".ckpt") : fs::path(a.out);
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  json extra = a.hyper.to_json();
  extra["seed"] = a.seed;
  extra["encoding_hash"] = encoding_hash(data);
  extra["sequences"] = sequences.size();
  save_checkpoint(*model, ckpt, extra);

  const fs::path loss_path = a.loss_csv.empty() ? fs::path(ckpt.string() + ".loss.csv")
                                                : fs::path(a.loss_csv);
  auto f = open_out(loss_path);
  f << "# seed=" << a.seed << " model=" << a.model << '\n' << "epoch,loss\n";
  char buf[64];
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%.12g", result.loss_curve[e]);
    f << e << ',' << buf << '\n';
  }
  out << "trained " << a.model << " on " << sequences.size() << " sequences; checkpoint "
      << ckpt.string() << '\n';
  return kOk;
}

struct GenerateArgs {
  std::string data = default_data_dir();
  std::string checkpoint;
  std::string user;
  std::string start;
  int hour = 9;
  int length = 25;
  int candidates = 10;
  int k = 3;
  bool no_repeat = false;
  bool consolidated = false;
  std::uint64_t seed = 7;
  std::string out;
};

int do_generate(const GenerateArgs& a, std::ostream& out) {
  const Dataset data = load_dataset(a.data);
  json side;
  const auto model = load_checkpoint(a.checkpoint, &side);
  if (model->num_pois() != static_cast<int>(data.pois.size()) ||
      (side.contains("encoding_hash") &&
       side["encoding_hash"].get<std::uint64_t>() != encoding_hash(data))) {
    throw DataError("checkpoint was trained on a different dataset encoding");
  }
  const auto start = data.enc.poi(a.start);
  if (!start) throw DataError("unknown start POI '" + a.start + "'");
  int user = -1;
  if (!a.user.empty()) {
    if (auto u = data.enc.user(a.user)) user = *u;
  }
  const FeatureTables tables = build_feature_tables(data, data.sessions);
  GenRequest req;
  req.user = user;
  req.start_poi = *start;
  req.start_hour = a.hour;
  req.length = a.length;
  req.candidates = a.candidates;
  req.k = a.k;
  req.no_repeat = a.no_repeat;
  req.consolidated = a.consolidated;
  const auto seqs = generate(*model, req, tables, a.seed);

  std::ofstream file;
  std::ostream* sink = &out;
  if (!a.out.empty()) {
    file = open_out(a.out);
    sink = &file;
  }
  for (std::size_t r = 0; r < seqs.size(); ++r) {
    const auto& g = seqs[r];
    json line;
    line["seed"] = a.seed;
    line["user"] = a.user;
    line["rank"] = r + 1;
    line["score"] = g.score;
    json pois = json::array(), cats = json::array(), hours = json::array(), disp = json::array();
    for (std::size_t i = 0; i < g.pois.size(); ++i) {
      pois.push_back(data.enc.poi_id(g.pois[i]));
      cats.push_back(data.enc.category_id(data.poi(g.pois[i]).category));
      hours.push_back(g.hours[i]);
      disp.push_back(i == 0 ? 0.0 : data.distance_km(g.pois[i - 1], g.pois[i]));
    }
    line["pois"] = std::move(pois);
    line["categories"] = std::move(cats);
    line["hours"] = std::move(hours);
    line["displacement_km"] = std::move(disp);
    *sink << line.dump() << '\n';
  }
  return kOk;
}

struct EvaluateArgs {
  std::string data = default_data_dir();
  std::string models = "all";
  int folds = 5;
  std::uint64_t seed = 7;
  std::string out;
  bool diversity_raw = false;
  Hyper hyper;
};

void write_table(std::ostream& out, const std::vector<EvalReport>& rows, bool raw,
                 const std::string& title) {
  write_text_table(out, rows, title, raw);
}

int do_evaluate(EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  a.hyper.finish();
  const Dataset data = load_dataset(a.data);
  a.hyper.pipe.on_epoch = [&](const std::string& m, int e, double l) {
    err << m << " epoch " << e << " loss " << l << '\n';
  };
  const auto specs = make_model_specs(split_commas(a.models), a.hyper.pipe);
  CvConfig cv;
  cv.folds = a.folds;
  cv.seed = a.seed;
  cv.log = [&](const std::string& m) { err << m << '\n'; };
  const CvResult result = cross_validate(data, specs, cv);

  const fs::path dir = a.out.empty() ? fs::path(a.data) / "eval" : fs::path(a.out);
  fs::create_directories(dir);
  const std::string header = "# seed=" + std::to_string(a.seed) + " folds=" + std::to_string(a.folds) + "\n";
  {
    auto f = open_out(dir / "report.csv");
    f << header;
    write_report_csv(f, result.reports);
  }
  {
    auto f = open_out(dir / "queries.csv");
    f << header;
    write_query_csv(f, result.queries);
  }
  {
    auto f = open_out(dir / "timing.csv");
    f << header;
    write_timing_csv(f, result.reports);
  }
  std::vector<EvalReport> agg;
  for (const auto& r : result.reports) {
    if (r.fold < 0) agg.push_back(r);
  }
  const std::string title =
      std::to_string(a.folds) + "-fold cross-validation (seed " + std::to_string(a.seed) + ")";
  {
    auto f = open_out(dir / "table.txt");
    write_table(f, agg, a.diversity_raw, title);
  }
  write_table(out, agg, a.diversity_raw, title);
  json manifest = a.hyper.to_json();
  manifest["command"] = "evaluate";
  manifest["seed"] = a.seed;
  manifest["folds"] = a.folds;
  manifest["models"] = a.models;
  manifest["warnings"] = result.warnings;
  write_manifest(dir, manifest);
  return kOk;
}

struct ReportArgs {
  std::string in;
  std::string out;
  bool diversity_raw = false;
};

int do_report(const ReportArgs& a, std::ostream& out) {
  const fs::path in_dir(a.in);
  std::ifstream f(in_dir / "queries.csv");
  if (!f) throw DataError("cannot read " + (in_dir / "queries.csv").string());
  std::string header;
  std::stringstream body;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line[0] == '#') {
      header += line + '\n';
      continue;
    }
    body << line << '\n';
  }
  const auto queries = read_query_csv(body);
  const auto rows = summarize(queries);
  const fs::path dir = a.out.empty() ? in_dir : fs::path(a.out);
  fs::create_directories(dir);
  const std::string title = "Pair F-score, diversity and displacement per model";
  {
    auto t = open_out(dir / "summary.txt");
    write_table(t, rows, a.diversity_raw, title);
  }
  {
    auto s = open_out(dir / "length_sweep.csv");
    s << header;
    write_length_sweep_csv(s, queries);
  }
  write_table(out, rows, a.diversity_raw, title);
  return kOk;
}

}  // namespace

std::vector<std::string> config_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  std::string config_file;
  int threads = 0;
  try {
    // Pull out global options and expand --config before CLI11 sees the line.
    for (std::size_t i = 0; i < raw_args.size(); ++i) {
      const std::string& a = raw_args[i];
      if (a == "--config" || a == "--threads") {
        if (i + 1 >= raw_args.size()) throw std::invalid_argument(a + " needs a value");
        if (a == "--config") {
          config_file = raw_args[i + 1];
        } else {
          threads = std::stoi(raw_args[i + 1]);
        }
        ++i;
      } else if (a.rfind("--config=", 0) == 0) {
        config_file = a.substr(9);
      } else if (a.rfind("--threads=", 0) == 0) {
        threads = std::stoi(a.substr(10));
      } else {
        args.push_back(a);
      }
    }
    if (!config_file.empty()) {
      std::ifstream f(config_file);
      if (!f) throw std::invalid_argument("cannot read config file " + config_file);
      std::stringstream ss;
      ss << f.rdbuf();
      auto tokens = config_tokens(ss.str());
      const std::size_t at = args.empty() ? 0 : 1;
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), tokens.begin(), tokens.end());
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  kernels::set_num_threads(threads);

  CLI::App app{"CAPS: context-aware POI sequence recommendation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");
  app.footer("Global: --config FILE (key = value lines), --threads N. Default data directory: "
             "$CAPS_DATA_DIR or ./data.");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "write a synthetic check-in dataset");
  s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  s->add_option("--seed", synth.config.seed, "random seed")->capture_default_str();
  s->add_option("--users", synth.config.users)->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--pois", synth.config.pois)->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--days", synth.config.days)->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--out", synth.out, "output directory")->capture_default_str();

  IngestArgs ingest;
  auto* in = app.add_subcommand("ingest", "parse check-ins into the canonical session dataset");
  in->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  in->add_option("--checkins", ingest.checkins, "check-in CSV")->required();
  in->add_option("--friends", ingest.friends, "friendship CSV (userid1,userid2)");
  in->add_option("--format", ingest.format)->check(CLI::IsMember({"weeplaces", "gowalla"}))->capture_default_str();
  in->add_option("--min-checkins", ingest.min_checkins)->check(CLI::NonNegativeNumber)->capture_default_str();
  in->add_option("--travel", ingest.travel, "travel-time model")->check(CLI::IsMember({"walking", "lognormal"}))->capture_default_str();
  in->add_option("--out", ingest.out, "dataset directory")->capture_default_str();

  FeaturesArgs features;
  auto* fe = app.add_subcommand("features", "build and export the feature tables");
  fe->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  fe->add_option("--data", features.data, "dataset directory")->capture_default_str();
  fe->add_option("--out", features.out, "snapshot path (default DATA/features.json)");

  TrainArgs trainargs;
  auto* tr = app.add_subcommand("train", "train one sequence model");
  tr->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  tr->add_option("--data", trainargs.data, "dataset directory")->capture_default_str();
  tr->add_option("--model", trainargs.model)->check(CLI::IsMember({"plain-rnn", "caps-rnn", "caps-lstm"}))->capture_default_str();
  tr->add_option("--seed", trainargs.seed)->capture_default_str();
  tr->add_option("--out", trainargs.out, "checkpoint path (default DATA/MODEL.ckpt)");
  tr->add_option("--loss-csv", trainargs.loss_csv, "loss curve path (default CHECKPOINT.loss.csv)");
  trainargs.hyper.add_to(*tr, false);

  GenerateArgs gen;
  auto* ge = app.add_subcommand("generate", "sample POI sequences from a checkpoint");
  ge->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  ge->add_option("--data", gen.data, "dataset directory")->capture_default_str();
  ge->add_option("--checkpoint", gen.checkpoint)->required();
  ge->add_option("--user", gen.user, "user id (unknown users get generalized scores)");
  ge->add_option("--start", gen.start, "start POI id")->required();
  ge->add_option("--hour", gen.hour)->check(CLI::Range(0, 23))->capture_default_str();
  ge->add_option("--length", gen.length)->check(CLI::PositiveNumber)->capture_default_str();
  ge->add_option("--candidates", gen.candidates)->check(CLI::PositiveNumber)->capture_default_str();
  ge->add_option("--k", gen.k)->check(CLI::PositiveNumber)->capture_default_str();
  ge->add_flag("--no-repeat", gen.no_repeat, "never revisit a POI within a sequence");
  ge->add_flag("--consolidated", gen.consolidated, "rank by consolidated preference");
  ge->add_option("--seed", gen.seed)->capture_default_str();
  ge->add_option("--out", gen.out, "JSON-lines output (default stdout)");

  EvaluateArgs ev;
  auto* eva = app.add_subcommand("evaluate", "cross-validate models and write reports");
  eva->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  eva->add_option("--data", ev.data, "dataset directory")->capture_default_str();
  eva->add_option("--models", ev.models, "comma-separated model names or 'all'")->capture_default_str();
  eva->add_option("--folds", ev.folds)->check(CLI::Range(2, 1000))->capture_default_str();
  eva->add_option("--seed", ev.seed)->capture_default_str();
  eva->add_option("--out", ev.out, "report directory (default DATA/eval)");
  eva->add_flag("--diversity-raw", ev.diversity_raw, "also print unnormalized diversity");
  ev.hyper.add_to(*eva, true);

  ReportArgs rep;
  auto* re = app.add_subcommand("report", "summarize evaluation output into tables and sweeps");
  re->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  re->add_option("--in", rep.in, "evaluation directory")->required();
  re->add_option("--out", rep.out, "output directory (default: --in)");
  re->add_flag("--diversity-raw", rep.diversity_raw, "also print unnormalized diversity");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    err << app.help();
    return kUsage;
  }

  try {
    if (app.got_subcommand(s)) return do_synth(synth, out);
    if (app.got_subcommand(in)) return do_ingest(ingest, out);
    if (app.got_subcommand(fe)) return do_features(features, out);
    if (app.got_subcommand(tr)) return do_train(trainargs, out, err);
    if (app.got_subcommand(ge)) return do_generate(gen, out);
    if (app.got_subcommand(eva)) return do_evaluate(ev, out, err);
    if (app.got_subcommand(re)) return do_report(rep, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace caps::cli
