#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynens/data.hpp"
#include "dynens/prediction.hpp"
#include "dynens/tiny_net.hpp"

namespace dynens {

enum class Combiner { kMV, kWMV, kAVG, kWAVG };

inline constexpr Combiner kAllCombiners[] = {Combiner::kMV, Combiner::kWMV, Combiner::kAVG,
                                             Combiner::kWAVG};

std::string_view to_string(Combiner c) noexcept;
/// Accepts "MV", "WMV", "AVG", "WAVG". Throws std::invalid_argument.
Combiner parse_combiner(std::string_view s);

/// Merges member predictions row by row. MV and WMV emit one-hot rows of the
/// (weighted) modal argmax, lowest index on ties; AVG and WAVG emit
/// (weighted) centroids. WAVG with all-zero weights falls back to AVG.
/// Throws InvalidState for an empty member list.
PredictionMatrix combine(std::span<const PredictionMatrix> members, std::span<const double> weights,
                         Combiner combiner);

struct Provenance {
  std::size_t cycle = 0;     ///< training cycle, 0-based
  std::size_t snapshot = 0;  ///< rank within its cycle after sorting, 0-based
  std::size_t epoch = 0;     ///< epoch the parameters were taken from, 1-based

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SnapshotLearner {
  NetParams params;
  double weight = 0.0;  ///< validation accuracy, in [0, 1]
  Provenance provenance;

  friend bool operator==(const SnapshotLearner&, const SnapshotLearner&) = default;
};

class EnsembleLearner {
 public:
  EnsembleLearner() = default;
  /// With mc_passes > 0 the (single) member is evaluated that many times with
  /// dropout active, and each pass counts as one ensemble member.
  explicit EnsembleLearner(std::vector<SnapshotLearner> members, std::size_t mc_passes = 0,
                           std::uint64_t mc_seed = 0);

  const std::vector<SnapshotLearner>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  std::size_t mc_passes() const noexcept { return mc_passes_; }
  std::uint64_t mc_seed() const noexcept { return mc_seed_; }

  /// One prediction matrix per effective member, and the matching weights.
  std::vector<PredictionMatrix> member_predictions(const Matrix& inputs) const;
  std::vector<double> member_weights() const;

  PredictionMatrix predict(const Matrix& inputs, Combiner combiner) const;

  friend bool operator==(const EnsembleLearner&, const EnsembleLearner&) = default;

 private:
  std::vector<SnapshotLearner> members_;
  std::size_t mc_passes_ = 0;
  std::uint64_t mc_seed_ = 0;
};

/// Either a fixed beta in [0, 1] or the per-cycle ideal value.
struct PruneFactor {
  bool ideal = false;
  double value = 1.0;

  static PruneFactor fixed(double beta);
  static PruneFactor ideal_factor() { return {true, 0.0}; }
  std::string to_string() const;
  /// "ideal" or a number in [0, 1].
  static PruneFactor parse(std::string_view s);

  friend bool operator==(const PruneFactor&, const PruneFactor&) = default;
};

/// Accuracy comparisons against the threshold allow this much rounding
/// slack. Accuracies on a finite set differ by at least 1/n, far above it.
inline constexpr double kPruneTolerance = 1e-12;

/// tau = max(w) - beta * (max(w) - min(w)). Throws std::invalid_argument for
/// beta outside [0, 1] or empty w.
double prune_threshold(std::span<const double> w, double beta);
/// (max - mean) / (max - min); 0 when all values are equal.
double ideal_beta(std::span<const double> w);
/// Indices of w kept at beta, best first (stable on ties).
std::vector<std::size_t> pruned_set(std::span<const double> w, double beta);

enum class SnapVariant { kCyclic, kStep };

struct DynSnapConfig {
  SnapVariant variant = SnapVariant::kCyclic;
  std::size_t m = 10;
  std::size_t n = 5;                  ///< snapshots per cycle
  PruneFactor beta = PruneFactor::ideal_factor();
  std::size_t epochs = 50;            ///< T per training cycle
  double alpha0 = 0.01;
  NetConfig net;
  double valid_fraction = 1.0 / 6.0;
  /// 0 means 10 * ceil(m / n).
  std::size_t max_cycles = 0;

  std::size_t cycle_limit() const;
  void validate() const;
};

struct CycleDiagnostics {
  std::size_t cycle = 0;
  std::vector<double> w;            ///< selected snapshots' accuracies, best first
  std::vector<std::size_t> epochs;  ///< matching epochs
  double mean = 0.0;
  double beta = 0.0;                ///< beta actually used
  double tau = 0.0;
  std::size_t kept = 0;             ///< members at or above tau
  std::size_t admitted = 0;         ///< after truncation at m
};

struct TrainedEnsemble {
  EnsembleLearner ensemble;
  std::vector<CycleDiagnostics> cycles;
  std::uint64_t samples_processed = 0;
};

/// Dynamic snapshot ensemble: cycles of resample, snapshot training,
/// selection, pruning and admission until m members are collected. Cycle i
/// draws every random choice from derive_seed(master_seed, i). Throws
/// TrainingDiverged tagged with the cycle index, or CannotFillEnsemble.
TrainedEnsemble dynsnap_train(const DynSnapConfig& config, const LabeledDataset& data,
                              std::uint64_t master_seed);

/// One cosine run of ceil(T * m / N) epochs with N = m windows, no pruning,
/// one cycle.
TrainedEnsemble snapshot_baseline_train(const DynSnapConfig& config, const LabeledDataset& data,
                                        std::uint64_t master_seed);

/// The conventional training procedure: step-decay schedule over the full
/// training set, keeping the epoch with the best validation accuracy.
struct BaseTrainingConfig {
  NetConfig net;
  std::size_t epochs = 50;
  double alpha0 = 0.01;
};

TrainedEnsemble single_base_train(const BaseTrainingConfig& config, const LabeledDataset& train,
                                  const LabeledDataset& valid, std::uint64_t seed);

/// m independent single_base_train runs with disjoint seeds, weighted by
/// validation accuracy.
TrainedEnsemble ext_bagging_train(const BaseTrainingConfig& config, const LabeledDataset& train,
                                  const LabeledDataset& valid, std::size_t m, std::uint64_t seed);

/// A single learner with dropout `dropout_prob` (default 0.1), evaluated
/// with m stochastic passes.
TrainedEnsemble mc_dropout_train(const BaseTrainingConfig& config, const LabeledDataset& train,
                                 const LabeledDataset& valid, std::size_t m, std::uint64_t seed,
                                 double dropout_prob = 0.1);

/// Manifest "ENSEMBLE v1" plus one TINYNET file per member, written into
/// `dir`. Returns the manifest path.
std::string save_ensemble(const std::string& dir, const EnsembleLearner& ensemble,
                          Combiner combiner);
std::pair<EnsembleLearner, Combiner> load_ensemble(const std::string& manifest_path);

}  // namespace dynens
