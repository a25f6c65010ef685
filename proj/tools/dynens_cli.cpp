// dynens: data generation, training, evaluation, experiments and theorem
// checks from the command line. Artifacts go under --out in datasets/,
// snapshots/ and reports/.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynens/data.hpp"
#include "dynens/ensemble.hpp"
#include "dynens/errors.hpp"
#include "dynens/experiment.hpp"
#include "dynens/metrics.hpp"
#include "dynens/prediction.hpp"
#include "dynens/theorems.hpp"

namespace fs = std::filesystem;
using namespace dynens;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string config;
  std::vector<std::string> overrides;
};

ExperimentConfig load_config(const Globals& g) {
  KeyValues kv;
  if (!g.config.empty()) kv = load_key_values(g.config);
  for (const auto& s : g.overrides) {
    auto [k, v] = parse_assignment(s);
    kv[k] = v;
  }
  if (g.seed) kv["seed"] = std::to_string(*g.seed);
  return ExperimentConfig::from_key_values(kv);
}

std::string dir(const Globals& g, const char* sub) { return (fs::path(g.out) / sub).string(); }

void print(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << '\n'; }

int emit_error(const char* kind, const std::string& message) {
  nlohmann::ordered_json j{{"error", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return 1;
}

std::size_t stage_index(std::size_t stage) {
  if (stage < 1 || stage > 3) throw std::invalid_argument("--stage must be 1, 2 or 3");
  return stage - 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic snapshot ensembles for consistent retraining"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--config", g.config, "key=value config file");
  app.add_option("--set", g.overrides, "Config override key=value (repeatable)");

  auto* gen = app.add_subcommand("gen-data", "Generate the stream datasets");

  auto* train = app.add_subcommand("train", "Train one method on one stream stage");
  std::string method_name = "DynSnap-cyc";
  std::size_t stage = 1;
  std::string combiner_name = "AVG";
  train->add_option("--method", method_name)->capture_default_str();
  train->add_option("--stage", stage, "1, 2 or 3")->capture_default_str();
  train->add_option("--combiner", combiner_name, "Recorded in the manifest")->capture_default_str();

  auto* eval = app.add_subcommand("evaluate", "Predict with a saved ensemble, or compare predictions");
  std::string ensemble_path, data_path, pred_a, pred_b, labels_path;
  std::vector<std::size_t> ks{2};
  eval->add_option("--ensemble", ensemble_path, "Ensemble manifest");
  eval->add_option("--data", data_path, "CSV dataset to predict on");
  eval->add_option("--combiner", combiner_name, "Overrides the manifest combiner");
  eval->add_option("--pred-a", pred_a, "Prediction matrix of the earlier learner");
  eval->add_option("--pred-b", pred_b, "Prediction matrix of the later learner");
  eval->add_option("--labels", labels_path, "Label file for --pred-a/--pred-b");
  eval->add_option("--k", ks, "Top-k sizes")->capture_default_str();

  auto* run = app.add_subcommand("run", "Run the full experiment grid");

  auto* sweep = app.add_subcommand("sweep", "Sensitivity sweep over one setting");
  std::string dimension = "m";
  std::vector<std::string> values;
  sweep->add_option("--dimension", dimension, "m, beta, n or window")->capture_default_str();
  sweep->add_option("--values", values, "Values to try")->required()->delimiter(',');

  auto* verify = app.add_subcommand("verify-theorems", "Monte Carlo check of the distance inequalities");
  SuiteConfig suite;
  verify->add_option("--trials", suite.trials)->capture_default_str();
  verify->add_option("--q", suite.q_list, "Minkowski orders")->delimiter(',');
  verify->add_option("--workers", suite.workers)->capture_default_str();
  verify->add_flag("--identical-copies", suite.identical_copies);

  auto* report = app.add_subcommand("report", "Convert a JSON report");
  std::string input, format = "csv", output;
  report->add_option("--input", input, "report.json")->required();
  report->add_option("--format", format, "csv or json")->capture_default_str();
  report->add_option("--output", output, "Defaults to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage", e.what());
  }

  try {
    if (gen->parsed()) {
      const auto config = load_config(g);
      const auto stream = build_stream(config);
      const auto manifest = save_stream(dir(g, "datasets"), stream);
      print({{"manifest", manifest},
             {"sizes",
              {stream.stages[0].size(), stream.stages[1].size(), stream.stages[2].size()}},
             {"validation", stream.validation.size()},
             {"test", stream.test.size()}});
    } else if (train->parsed()) {
      const auto config = load_config(g);
      const auto method = parse_method(method_name);
      const auto combiner = parse_combiner(combiner_name);
      const auto s = stage_index(stage);
      const auto stream = build_stream(config);
      const auto trained = train_method(config, method, stream.stages[s], stream.validation,
                                        cell_seed(config, 0, method, s));
      const auto target = (fs::path(dir(g, "snapshots")) /
                           (std::string(to_string(method)) + "_stage" + std::to_string(stage)))
                              .string();
      const auto manifest = save_ensemble(target, trained.ensemble, combiner);
      const auto acc = accuracy(trained.ensemble.predict(stream.test.features, combiner),
                                stream.test.label_vector());
      print({{"manifest", manifest},
             {"members", trained.ensemble.size()},
             {"cycles", trained.cycles.size()},
             {"samples_processed", trained.samples_processed},
             {"test_accuracy", acc}});
    } else if (eval->parsed()) {
      nlohmann::ordered_json j;
      if (!ensemble_path.empty()) {
        if (data_path.empty()) throw std::invalid_argument("--ensemble needs --data");
        auto [ensemble, combiner] = load_ensemble(ensemble_path);
        if (eval->count("--combiner")) combiner = parse_combiner(combiner_name);
        const auto data = load_csv(data_path);
        const auto pred = ensemble.predict(data.features, combiner);
        const auto pred_path = (fs::path(dir(g, "reports")) / "predictions.txt").string();
        fs::create_directories(dir(g, "reports"));
        save_prediction_matrix(pred_path, pred);
        j = {{"predictions", pred_path},
             {"combiner", std::string(to_string(combiner))},
             {"accuracy", accuracy(pred, data.label_vector())}};
      } else if (!pred_a.empty() && !pred_b.empty() && !labels_path.empty()) {
        const auto a = load_prediction_matrix(pred_a);
        const auto b = load_prediction_matrix(pred_b);
        const auto r = load_labels(labels_path);
        const auto rep = pair_report(a, b, r, ks);
        j = {{"con", rep.con},          {"acc_a", rep.acc_a},
             {"acc_b", rep.acc_b},      {"acc_con", rep.acc_con},
             {"pearson", rep.pearson},  {"cosine", rep.cosine},
             {"cto_c", rep.transitions.cto_c}, {"cto_i", rep.transitions.cto_i},
             {"ito_c", rep.transitions.ito_c}, {"ito_i", rep.transitions.ito_i},
             {"com", rep.transitions.com}};
        for (auto k : ks) {
          j["ccon_" + std::to_string(k)] = rep.ccon_k.at(k);
          j["cacc_" + std::to_string(k) + "_a"] = rep.cacc_k_a.at(k);
          j["cacc_" + std::to_string(k) + "_b"] = rep.cacc_k_b.at(k);
        }
      } else {
        throw std::invalid_argument(
            "evaluate needs --ensemble with --data, or --pred-a, --pred-b and --labels");
      }
      print(j);
    } else if (run->parsed()) {
      const auto config = load_config(g);
      const auto result = run_experiment(config);
      const auto reports = fs::path(dir(g, "reports"));
      write_text_file((reports / "report.json").string(), report_to_json(result.report));
      write_text_file((reports / "report.csv").string(), report_to_csv(result.report));
      write_text_file((reports / "timing.json").string(), timing_to_json(config, result));
      nlohmann::ordered_json summary;
      for (const auto& m : result.report.methods) {
        const auto& avg = m.combiners.front();
        summary[std::string(to_string(m.method))] = {
            {"combiner", std::string(to_string(avg.combiner))},
            {"acc", avg.get("acc").mean},
            {"con", avg.get("con").mean},
            {"acc_con", avg.get("acc_con").mean},
            {"relative_cost", m.relative_cost},
            {"failed_cells", m.failed_cells}};
      }
      print({{"report", (reports / "report.json").string()}, {"summary", summary}});
    } else if (sweep->parsed()) {
      const auto config = load_config(g);
      const auto dim = parse_sweep_dimension(dimension);
      const auto result = sensitivity_sweep(config, dim, values);
      const auto reports = fs::path(dir(g, "reports"));
      const auto base = "sweep_" + std::string(to_string(dim));
      write_text_file((reports / (base + ".json")).string(), sweep_to_json(result));
      write_text_file((reports / (base + ".csv")).string(), sweep_to_csv(result));
      print({{"report", (reports / (base + ".json")).string()},
             {"monotonicity_checks", result.monotonicity_checks},
             {"monotonicity_violations", result.monotonicity_violations}});
      if (result.monotonicity_violations != 0) return 2;
    } else if (verify->parsed()) {
      if (g.seed) suite.seed = *g.seed;
      const auto result = monte_carlo_suite(suite);
      const auto path = (fs::path(dir(g, "reports")) / "theorems.json").string();
      write_text_file(path, suite_report_to_json(result));
      print({{"report", path}, {"total_violations", result.total_violations()}});
      if (result.total_violations() != 0) return 2;
    } else if (report->parsed()) {
      const auto rep = report_from_json(read_text_file(input));
      std::string text;
      if (format == "csv") text = report_to_csv(rep);
      else if (format == "json") text = report_to_json(rep);
      else throw std::invalid_argument("--format must be csv or json");
      if (output.empty()) std::cout << text;
      else write_text_file(output, text);
    }
  } catch (const ParseError& e) {
    return emit_error("parse_error", e.what());
  } catch (const TrainingDiverged& e) {
    return emit_error("training_diverged", e.what());
  } catch (const CannotFillEnsemble& e) {
    return emit_error("cannot_fill_ensemble", e.what());
  } catch (const InvalidConfiguration& e) {
    return emit_error("invalid_configuration", e.what());
  } catch (const std::invalid_argument& e) {
    return emit_error("invalid_argument", e.what());
  } catch (const std::exception& e) {
    return emit_error("error", e.what());
  }
  return 0;
}
