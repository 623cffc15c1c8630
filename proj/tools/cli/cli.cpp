#include "cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "tnl/consistency.hpp"
#include "tnl/digit_task.hpp"
#include "tnl/errors.hpp"
#include "tnl/parallel.hpp"
#include "tnl/random_losses.hpp"
#include "tnl/tagging_task.hpp"

namespace tnl::cli {

namespace {

using nlohmann::json;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("TNORM_LOGIC_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("TNORM_LOGIC_SEED is not an unsigned integer");
    }
  }
  return 20;
}

TNormFamily parse_family(const std::string& name) {
  const auto fam = family_from_name(name);
  if (!fam) throw std::invalid_argument("unknown t-norm family '" + name + "'");
  return *fam;
}

IntegrationMethod parse_method(const std::string& name) {
  const auto method = method_from_name(name);
  if (!method) throw std::invalid_argument("unknown integration method '" + name + "'");
  return *method;
}

Formula load_formula(const std::string& text) {
  Formula f = parse_formula(text);
  if (!is_grounded(f)) f = ground(f);
  return f;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

json estimate_to_json(const std::string& formula_text, TNormFamily fam,
                      const IntegrationConfig& cfg, const ConsistencyEstimate& est) {
  return json{{"formula", formula_text},
              {"tnorm", family_name(fam)},
              {"method", method_name(est.method)},
              {"samples", cfg.samples},
              {"seed", cfg.seed},
              {"value", est.value},
              {"std_error", est.std_error},
              {"n_evals", est.n_evals}};
}

json run_to_json(const RunMetrics& run) {
  json j{{"seed", run.seed},
         {"final_loss", run.final_loss},
         {"zero_gradient_step1", run.zero_gradient_step1}};
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v.has_value()) j[key] = *v;
  };
  put("digit_accuracy", run.digit_accuracy);
  put("operator_accuracy", run.operator_accuracy);
  put("coherence_fraction", run.coherence_fraction);
  put("commutativity", run.commutativity);
  put("associativity", run.associativity);
  put("distributivity", run.distributivity);
  put("f1", run.f1);
  put("violation_rate", run.violation_rate);
  return j;
}

json metrics_to_json(const Metrics& metrics) {
  json runs = json::array();
  for (const RunMetrics& run : metrics.runs) runs.push_back(run_to_json(run));
  json agg;
  auto put = [&](const char* key, const std::optional<Aggregate>& v) {
    if (v.has_value()) agg[key] = {{"mean", v->mean}, {"stddev", v->stddev}};
  };
  put("digit_accuracy", metrics.digit_accuracy);
  put("operator_accuracy", metrics.operator_accuracy);
  put("coherence_fraction", metrics.coherence_fraction);
  put("commutativity", metrics.commutativity);
  put("associativity", metrics.associativity);
  put("distributivity", metrics.distributivity);
  put("f1", metrics.f1);
  put("violation_rate", metrics.violation_rate);
  return json{{"runs", runs},
              {"aggregate", agg},
              {"zero_gradient_step1", metrics.any_zero_gradient_step1}};
}

std::string metrics_to_csv(const Metrics& metrics) {
  static const char* kHeader =
      "seed,digit_accuracy,operator_accuracy,coherence_fraction,commutativity,"
      "associativity,distributivity,f1,violation_rate,final_loss,zero_gradient_step1\n";
  std::string out = kHeader;
  char buf[40];
  auto cell = [&](const std::optional<double>& v) {
    out += ',';
    if (v.has_value()) {
      std::snprintf(buf, sizeof(buf), "%.6f", *v);
      out += buf;
    }
  };
  for (const RunMetrics& run : metrics.runs) {
    out += std::to_string(run.seed);
    cell(run.digit_accuracy);
    cell(run.operator_accuracy);
    cell(run.coherence_fraction);
    cell(run.commutativity);
    cell(run.associativity);
    cell(run.distributivity);
    cell(run.f1);
    cell(run.violation_rate);
    std::snprintf(buf, sizeof(buf), ",%.6f,%d\n", run.final_loss,
                  run.zero_gradient_step1 ? 1 : 0);
    out += buf;
  }
  auto agg_row = [&](const char* label, bool stddev) {
    out += label;
    auto acell = [&](const std::optional<Aggregate>& v) {
      out += ',';
      if (v.has_value()) {
        std::snprintf(buf, sizeof(buf), "%.6f", stddev ? v->stddev : v->mean);
        out += buf;
      }
    };
    acell(metrics.digit_accuracy);
    acell(metrics.operator_accuracy);
    acell(metrics.coherence_fraction);
    acell(metrics.commutativity);
    acell(metrics.associativity);
    acell(metrics.distributivity);
    acell(metrics.f1);
    acell(metrics.violation_rate);
    out += ",,\n";
  };
  agg_row("mean", false);
  agg_row("stddev", true);
  return out;
}

json mlp_to_json(const Mlp& model) {
  const MlpShape& shape = model.shape();
  return json{{"input_dim", shape.input_dim},
              {"hidden", shape.hidden},
              {"output_dim", shape.output_dim},
              {"params", std::vector<double>(model.parameters().begin(),
                                             model.parameters().end())}};
}

Mlp mlp_from_json(const std::string& name, const json& j) {
  MlpShape shape;
  shape.input_dim = j.at("input_dim").get<int>();
  shape.hidden = j.at("hidden").get<std::vector<int>>();
  shape.output_dim = j.at("output_dim").get<int>();
  Mlp model(name, shape, 0);
  const std::vector<double> params = j.at("params").get<std::vector<double>>();
  model.set_parameters(params);
  return model;
}

json digit_config_to_json(const DigitTaskConfig& cfg) {
  return json{{"data_seed", cfg.seed},
              {"n_labeled", cfg.n_labeled},
              {"n_pairs", cfg.n_pairs},
              {"feature_dim", cfg.feature_dim},
              {"sigma", cfg.noise_sigma},
              {"n_eval_digits", cfg.n_eval_digits},
              {"n_eval_pairs", cfg.n_eval_pairs}};
}

DigitTaskConfig digit_config_from_json(const json& j) {
  DigitTaskConfig cfg;
  cfg.seed = j.value("data_seed", cfg.seed);
  cfg.n_labeled = j.value("n_labeled", cfg.n_labeled);
  cfg.n_pairs = j.value("n_pairs", cfg.n_pairs);
  cfg.feature_dim = j.value("feature_dim", cfg.feature_dim);
  cfg.noise_sigma = j.value("sigma", cfg.noise_sigma);
  cfg.n_eval_digits = j.value("n_eval_digits", cfg.n_eval_digits);
  cfg.n_eval_pairs = j.value("n_eval_pairs", cfg.n_eval_pairs);
  return cfg;
}

TrainConfig train_config_from_json(const json& j, unsigned workers) {
  TrainConfig cfg;
  cfg.workers = workers;
  if (j.contains("model")) cfg.hidden = j["model"].value("hidden", cfg.hidden);
  if (j.contains("optimizer")) {
    const json& opt = j["optimizer"];
    cfg.optimizer.kind = opt.value("kind", cfg.optimizer.kind);
    cfg.optimizer.lr = opt.value("lr", cfg.optimizer.lr);
    cfg.optimizer.restart_t0 = opt.value("restart_t0", cfg.optimizer.restart_t0);
    cfg.optimizer.restart_tmult = opt.value("restart_tmult", cfg.optimizer.restart_tmult);
  }
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.seeds = j.value("seeds", cfg.seeds);
  if (j.contains("warm_start")) {
    const json& ws = j["warm_start"];
    cfg.godel.warm_start_epochs = ws.value("epochs", 0);
    cfg.godel.warm_start_family =
        parse_family(ws.value("family", std::string("r-product")));
    cfg.godel.freeze_after_warmup =
        ws.value("freeze", std::vector<std::string>{});
  }
  if (cfg.batch_size < 1 || cfg.epochs < 1) {
    throw std::invalid_argument("batch_size and epochs must be positive");
  }
  if (cfg.lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream stream(path, std::ios::binary);
  if (!stream) throw std::runtime_error("cannot write " + path.string());
  stream << content;
}

int cmd_train(const std::string& config_path, const std::string& out_dir, unsigned workers,
              std::ostream& out, std::ostream& err) {
  std::ifstream stream(config_path);
  if (!stream) throw std::invalid_argument("cannot read config " + config_path);
  json config = json::parse(stream);

  const std::string task = config.at("task").get<std::string>();
  const TNormFamily family = parse_family(config.at("tnorm").get<std::string>());
  const TrainConfig cfg = train_config_from_json(config, workers);

  json result{{"task", task}, {"tnorm", family_name(family)}, {"lambda", cfg.lambda}};
  json models_json;
  Metrics metrics;

  if (task == "digit-joint" || task == "digit-pipeline") {
    const DigitTaskConfig ds_cfg = digit_config_from_json(config);
    const SyntheticDigitDataset ds = generate_digit_task(ds_cfg);
    err << "training " << task << " under " << family_name(family) << " on "
        << ds_cfg.n_labeled << " labeled / " << ds_cfg.n_pairs << " pairs\n";
    const DigitTrainResult trained = task == "digit-joint"
                                         ? joint_train(ds, cfg, family)
                                         : pipeline_train(ds, cfg, family);
    metrics = trained.metrics;
    result["dataset"] = digit_config_to_json(ds_cfg);
    json runs = json::array();
    for (std::size_t i = 0; i < trained.models.size(); ++i) {
      runs.push_back(json{{"seed", cfg.seeds[i]},
                          {"digit", mlp_to_json(trained.models[i].digit)},
                          {"sum", mlp_to_json(trained.models[i].sum)},
                          {"prod", mlp_to_json(trained.models[i].prod)}});
    }
    models_json = json{{"task", task},
                       {"dataset", digit_config_to_json(ds_cfg)},
                       {"runs", runs}};
  } else if (task == "tagging") {
    TaggingConfig ds_cfg;
    ds_cfg.seed = config.value("data_seed", ds_cfg.seed);
    ds_cfg.n_train_sentences = config.value("n_train_sentences", ds_cfg.n_train_sentences);
    ds_cfg.train_fraction = config.value("train_fraction", ds_cfg.train_fraction);
    ds_cfg.n_eval_sentences = config.value("n_eval_sentences", ds_cfg.n_eval_sentences);
    ds_cfg.token_noise = config.value("token_noise", ds_cfg.token_noise);
    ds_cfg.min_len = config.value("min_len", ds_cfg.min_len);
    ds_cfg.max_len = config.value("max_len", ds_cfg.max_len);
    ds_cfg.tokens_per_group = config.value("tokens_per_group", ds_cfg.tokens_per_group);
    const bool use_constraints = config.value("use_constraints", true);
    const SequenceDataset ds = generate_sequence_task(ds_cfg);
    err << "training tagger under " << family_name(family) << " on "
        << ds.train_tokens.size() << " sentences (constraints "
        << (use_constraints ? "on" : "off") << ")\n";
    metrics = train_tagger(ds, cfg, family, use_constraints).metrics;
    result["use_constraints"] = use_constraints;
    result["dataset"] = json{{"data_seed", ds_cfg.seed},
                             {"n_train_sentences", ds_cfg.n_train_sentences},
                             {"train_fraction", ds_cfg.train_fraction},
                             {"n_eval_sentences", ds_cfg.n_eval_sentences},
                             {"token_noise", ds_cfg.token_noise}};
  } else {
    throw std::invalid_argument("unknown task '" + task + "'");
  }

  result["seeds"] = cfg.seeds;
  result.update(metrics_to_json(metrics));

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "results.json", result.dump(2) + "\n");
  write_file(dir / "results.csv", metrics_to_csv(metrics));
  if (!models_json.is_null()) write_file(dir / "models.json", models_json.dump() + "\n");
  err << "results written to " << (dir / "results.json").string() << "\n";
  emit(out, result);
  return 0;
}

int cmd_eval_properties(const std::string& models_path, std::uint64_t seed, int repeats,
                        std::ostream& out) {
  std::ifstream stream(models_path);
  if (!stream) throw std::invalid_argument("cannot read models file " + models_path);
  const json models = json::parse(stream);
  const SyntheticDigitDataset ds =
      generate_digit_task(digit_config_from_json(models.at("dataset")));

  json runs = json::array();
  std::vector<double> comm, assoc, dist;
  for (const json& run : models.at("runs")) {
    const Mlp sum = mlp_from_json("sum", run.at("sum"));
    const Mlp prod = mlp_from_json("prod", run.at("prod"));
    const PropertyScores scores =
        evaluate_properties(make_pair_head(sum), make_pair_head(prod), ds, seed, repeats);
    comm.push_back(scores.commutativity);
    assoc.push_back(scores.associativity);
    dist.push_back(scores.distributivity);
    runs.push_back(json{{"seed", run.at("seed").get<std::uint64_t>()},
                        {"commutativity", scores.commutativity},
                        {"associativity", scores.associativity},
                        {"distributivity", scores.distributivity}});
  }
  auto agg = [&](const std::vector<double>& v) {
    const Aggregate a = aggregate(v);
    return json{{"mean", a.mean}, {"stddev", a.stddev}};
  };
  emit(out, json{{"repeats", repeats},
                 {"seed", seed},
                 {"runs", runs},
                 {"aggregate", json{{"commutativity", agg(comm)},
                                    {"associativity", agg(assoc)},
                                    {"distributivity", agg(dist)}}}});
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"t-norm logic relaxations: consistency integrals and compiled losses"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned workers = default_workers();

  std::string formula_text, tnorm_name, method_name_ = "mc";
  std::uint64_t samples = 1'000'000;

  auto add_common = [&](CLI::App* cmd, bool with_method) {
    cmd->add_option("--seed", seed, "RNG seed (TNORM_LOGIC_SEED, then 20, when omitted)")
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--workers", workers, "worker threads (results do not depend on this)");
    if (with_method) {
      cmd->add_option("--samples", samples, "sample count (grid: points per dimension)");
      cmd->add_option("--method", method_name_, "mc | sobol | grid");
    }
  };

  CLI::App* consistency_cmd =
      app.add_subcommand("consistency", "integrate a relaxed formula over [0,1]^k");
  consistency_cmd->add_option("--formula", formula_text, "formula text")->required();
  consistency_cmd->add_option("--tnorm", tnorm_name, "relaxation family")->required();
  add_common(consistency_cmd, true);

  CLI::App* selfconsistency_cmd =
      app.add_subcommand("selfconsistency", "integrate f <-> f over [0,1]^k");
  selfconsistency_cmd->add_option("--formula", formula_text, "formula text")->required();
  selfconsistency_cmd->add_option("--tnorm", tnorm_name, "relaxation family")->required();
  add_common(selfconsistency_cmd, true);

  std::string suite_out = "table8.csv";
  CLI::App* suite_cmd =
      app.add_subcommand("suite", "consistency table of the built-in tautologies");
  suite_cmd->add_option("--out", suite_out, "CSV output path");
  samples = 1'000'000;
  add_common(suite_cmd, true);

  int checks = 50;
  double step = 1e-5;
  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference check of compiled losses");
  gradcheck_cmd->add_option("--tnorm", tnorm_name, "relaxation family")->required();
  gradcheck_cmd->add_option("--checks", checks, "number of random losses");
  gradcheck_cmd->add_option("--step", step, "finite-difference step");
  add_common(gradcheck_cmd, false);

  std::string config_path, train_out = "results";
  CLI::App* train_cmd = app.add_subcommand("train", "run a training experiment");
  train_cmd->add_option("--config", config_path, "experiment JSON")->required();
  train_cmd->add_option("--out", train_out, "output directory");
  add_common(train_cmd, false);

  std::string models_path;
  int repeats = 6;
  CLI::App* props_cmd =
      app.add_subcommand("eval-properties", "arithmetic properties of trained heads");
  props_cmd->add_option("--models", models_path, "models.json from `train`")->required();
  props_cmd->add_option("--repeats", repeats, "resampling repeats");
  add_common(props_cmd, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (!seed_given) seed = default_seed();
    if (workers < 1) workers = 1;

    if (consistency_cmd->parsed() || selfconsistency_cmd->parsed()) {
      const Formula f = load_formula(formula_text);
      const TNormFamily fam = parse_family(tnorm_name);
      const IntegrationConfig cfg{parse_method(method_name_), samples, seed, workers};
      const ConsistencyEstimate est = consistency_cmd->parsed()
                                          ? consistency(f, fam, cfg)
                                          : self_consistency(f, fam, cfg);
      emit(out, estimate_to_json(to_text(f), fam, cfg, est));
      return 0;
    }
    if (suite_cmd->parsed()) {
      if (!suite_cmd->count("--samples")) samples = 2'000'000;
      if (!suite_cmd->count("--method")) method_name_ = "sobol";
      const IntegrationConfig cfg{parse_method(method_name_), samples, seed, workers};
      const std::vector<TNormFamily> families = suite_default_families();
      const SuiteTable table = tautology_suite(families, cfg);
      write_file(suite_out, table.to_csv());
      err << "suite CSV written to " << suite_out << "\n";
      json rows = json::array();
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        json cells;
        for (std::size_t c = 0; c < families.size(); ++c) {
          cells[std::string(family_name(families[c]))] =
              json{{"value", table.cells[r][c].value},
                   {"std_error", table.cells[r][c].std_error}};
        }
        rows.push_back(json{{"name", table.rows[r].name},
                            {"formula", table.rows[r].text},
                            {"cells", cells}});
      }
      emit(out, json{{"out", suite_out},
                     {"method", method_name_},
                     {"samples", samples},
                     {"seed", seed},
                     {"rows", rows}});
      return 0;
    }
    if (gradcheck_cmd->parsed()) {
      const TNormFamily fam = parse_family(tnorm_name);
      const LossCheckReport report = check_random_losses(fam, seed, checks, step);
      emit(out, json{{"tnorm", family_name(fam)},
                     {"checks", report.n_checked},
                     {"resamples", report.resamples},
                     {"step", step},
                     {"max_rel_error", report.max_rel_error},
                     {"pass", report.max_rel_error < 1e-4}});
      return 0;
    }
    if (train_cmd->parsed()) return cmd_train(config_path, train_out, workers, out, err);
    if (props_cmd->parsed()) return cmd_eval_properties(models_path, seed, repeats, out);
    err << "error: no subcommand\n";
    return 1;
  } catch (const NumericError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace tnl::cli
