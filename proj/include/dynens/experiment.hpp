#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynens/config.hpp"
#include "dynens/data.hpp"
#include "dynens/ensemble.hpp"
#include "dynens/theorems.hpp"

namespace dynens {

enum class Method { kSingleBase, kExtBagging, kMCDropout, kSnapshot, kDynSnapCyc, kDynSnapStep };

inline constexpr Method kAllMethods[] = {Method::kSingleBase, Method::kExtBagging,
                                         Method::kMCDropout,  Method::kSnapshot,
                                         Method::kDynSnapCyc, Method::kDynSnapStep};

std::string_view to_string(Method m) noexcept;
/// "SingleBase", "ExtBagging", "MCDropout", "Snapshot", "DynSnap-cyc",
/// "DynSnap-step".
Method parse_method(std::string_view s);

struct ExperimentConfig {
  // Data. Ignored when stream_path is set.
  std::size_t classes = 5;
  std::size_t dims = 10;
  std::size_t per_class = 400;
  double separation = 3.0;
  std::vector<double> keep_fractions{1.0, 0.9, 0.8, 0.7, 0.6};
  /// Class absent from D1 and D2; nullopt keeps every class in every stage.
  std::optional<std::size_t> held_out_class = 4;
  std::array<double, 3> growth{0.8, 1.0, 1.0};
  std::size_t eval_per_class = 100;
  std::string stream_path;

  // Methods.
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<Combiner> combiners{std::begin(kAllCombiners), std::end(kAllCombiners)};
  std::size_t m = 10;
  std::size_t n = 5;
  PruneFactor beta = PruneFactor::ideal_factor();
  std::size_t epochs = 50;
  double alpha0 = 0.01;
  double momentum = 0.9;
  std::vector<std::size_t> hidden{32};
  std::size_t batch_size = 32;
  double weight_init_scale = 0.5;
  double mc_dropout_prob = 0.1;
  double valid_fraction = 1.0 / 6.0;

  // Protocol.
  std::size_t replicates = 5;
  std::uint64_t seed = 20240601;
  std::vector<std::size_t> ks{2};
  /// Reuse one training seed for all three stages of a replicate.
  bool same_seed_across_stages = false;
  std::size_t workers = 1;

  static ExperimentConfig from_key_values(const KeyValues& kv);
  static ExperimentConfig load(const std::string& path);
  /// Every key with its value, in a fixed order; from_key_values inverts it.
  KeyValues to_key_values() const;
  void validate() const;

  NetConfig net_config(std::size_t input_dim, std::size_t num_classes) const;
  DynSnapConfig dynsnap_config(SnapVariant variant, std::size_t input_dim,
                               std::size_t num_classes) const;
  BaseTrainingConfig base_config(std::size_t input_dim, std::size_t num_classes) const;
};

/// The stream the config describes: loaded from stream_path or generated
/// from derive_seed(seed, ...).
StreamDataset build_stream(const ExperimentConfig& config);

/// Training seed for one grid cell.
std::uint64_t cell_seed(const ExperimentConfig& config, std::size_t replicate, Method method,
                        std::size_t stage);

struct Stat {
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation; 0 for a single value
  std::size_t count = 0;

  friend bool operator==(const Stat&, const Stat&) = default;
};

Stat summarize(const std::vector<double>& values);

struct MetricStat {
  std::string name;
  Stat stat;

  friend bool operator==(const MetricStat&, const MetricStat&) = default;
};

struct CombinerSummary {
  Combiner combiner = Combiner::kAVG;
  /// acc, con, acc_con, ccon_<k>, cacc_<k>, pearson, cosine, then
  /// <pair>_<transition> for the pairs 1->2, 2->3, 1->3.
  std::vector<MetricStat> metrics;

  /// Throws std::out_of_range for an unknown name.
  const Stat& get(std::string_view name) const;

  friend bool operator==(const CombinerSummary&, const CombinerSummary&) = default;
};

struct MethodSummary {
  Method method = Method::kSingleBase;
  /// Training rows processed across the three stages, averaged over
  /// replicates, divided by the cost of one conventional training per stage.
  double relative_cost = 0.0;
  double mean_cycles = 0.0;  ///< training cycles per stage, averaged
  std::size_t replicates_ok = 0;
  std::size_t failed_cells = 0;
  std::vector<std::string> failures;
  std::vector<CombinerSummary> combiners;

  const CombinerSummary& get(Combiner c) const;

  friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

struct ExperimentReport {
  KeyValues config;
  /// sum over stages of epochs * |D_s|; the unit of relative_cost.
  double cost_unit = 0.0;
  std::vector<MethodSummary> methods;
  /// Pairwise ACC-CON values outside [max(a+b-1,0), min(a,b)].
  std::size_t envelope_violations = 0;
  /// DynSnap members admitted below their cycle's mean accuracy; only
  /// counted for runs with the ideal prune factor.
  std::size_t admission_violations = 0;

  const MethodSummary& get(Method m) const;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Result of training one (replicate, method, stage) cell.
struct CellResult {
  std::size_t replicate = 0;
  Method method = Method::kSingleBase;
  std::size_t stage = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  /// predictions[c] for config.combiners[c], on the shared test set.
  std::vector<PredictionMatrix> predictions;
  std::vector<CycleDiagnostics> cycles;
  std::uint64_t samples_processed = 0;
  double seconds = 0.0;
};

struct ExperimentRun {
  ExperimentReport report;
  std::vector<CellResult> cells;
  /// Wall-clock seconds per method summed over cells, aligned with
  /// config.methods. Kept out of the report so reports stay reproducible.
  std::vector<double> method_seconds;
  double total_seconds = 0.0;
};

/// Trains every cell of the replicate x method x stage grid, evaluates on
/// the shared test set and aggregates. Diverged cells are recorded and
/// excluded rather than aborting the run.
ExperimentRun run_experiment(const ExperimentConfig& config);
ExperimentRun run_experiment(const ExperimentConfig& config, const StreamDataset& stream);

/// Trains one method on one dataset as a cell would.
TrainedEnsemble train_method(const ExperimentConfig& config, Method method,
                             const LabeledDataset& train, const LabeledDataset& valid,
                             std::uint64_t seed);

enum class SweepDimension { kM, kBeta, kN, kWindow };

std::string_view to_string(SweepDimension d) noexcept;
SweepDimension parse_sweep_dimension(std::string_view s);

struct SweepReport {
  SweepDimension dimension = SweepDimension::kM;
  std::vector<std::string> values;
  std::vector<ExperimentReport> reports;
  /// Beta sweeps only: cycles compared, and cycles where a larger beta kept
  /// fewer snapshots or saw different accuracies.
  std::size_t monotonicity_checks = 0;
  std::size_t monotonicity_violations = 0;
};

/// One experiment per value. For kN the window ceil(T/N) is held fixed and T
/// follows; for kWindow T = value * N.
SweepReport sensitivity_sweep(const ExperimentConfig& config, SweepDimension dimension,
                              const std::vector<std::string>& values);

// Output.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(std::string_view json);
/// Columns method,combiner,metric,mean,sd,count, plus method-level rows
/// (combiner "-") for relative_cost.
std::string report_to_csv(const ExperimentReport& report);
std::string sweep_to_json(const SweepReport& sweep);
/// Columns dimension,value,method,combiner,metric,mean,sd.
std::string sweep_to_csv(const SweepReport& sweep);
std::string timing_to_json(const ExperimentConfig& config, const ExperimentRun& run);
std::string suite_report_to_json(const SuiteReport& report);

/// Writes text to path, creating parent directories. Throws
/// std::runtime_error on I/O failure.
void write_text_file(const std::string& path, std::string_view text);
std::string read_text_file(const std::string& path);

}  // namespace dynens
