#include "dynens/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dynens/errors.hpp"
#include "dynens/rng.hpp"
#include "dynens/schedules.hpp"
#include "dynens/training.hpp"
#include "text_util.hpp"

namespace dynens {

std::string_view to_string(Combiner c) noexcept {
  switch (c) {
    case Combiner::kMV: return "MV";
    case Combiner::kWMV: return "WMV";
    case Combiner::kAVG: return "AVG";
    case Combiner::kWAVG: return "WAVG";
  }
  return "?";
}

Combiner parse_combiner(std::string_view s) {
  for (auto c : kAllCombiners) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown combiner '" + std::string(s) + "'");
}

PredictionMatrix combine(std::span<const PredictionMatrix> members, std::span<const double> weights,
                         Combiner combiner) {
  if (members.empty()) throw InvalidState("cannot combine an empty ensemble");
  if (weights.size() != members.size()) {
    throw std::invalid_argument("weights do not align with ensemble members");
  }
  const auto n = members.front().rows();
  const auto p = members.front().classes();
  for (const auto& m : members) {
    if (m.rows() != n || m.classes() != p) {
      throw std::invalid_argument("member predictions differ in shape");
    }
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be non-negative");
  }

  std::vector<double> uniform(members.size(), 1.0);
  const bool weighted = combiner == Combiner::kWMV || combiner == Combiner::kWAVG;
  std::span<const double> ws = weights;
  if (!weighted || std::accumulate(weights.begin(), weights.end(), 0.0) == 0.0) ws = uniform;

  std::vector<double> out(n * p, 0.0);
  std::vector<double> score(p);
  if (combiner == Combiner::kMV || combiner == Combiner::kWMV) {
    for (std::size_t t = 0; t < n; ++t) {
      std::fill(score.begin(), score.end(), 0.0);
      for (std::size_t j = 0; j < members.size(); ++j) score[members[j].argmax(t)] += ws[j];
      const auto best = static_cast<std::size_t>(
          std::max_element(score.begin(), score.end()) - score.begin());
      out[t * p + best] = 1.0;
    }
  } else {
    const double total = std::accumulate(ws.begin(), ws.end(), 0.0);
    for (std::size_t j = 0; j < members.size(); ++j) {
      const auto& v = members[j].values();
      const double f = ws[j] / total;
      for (std::size_t k = 0; k < v.size(); ++k) out[k] += f * v[k];
    }
  }
  return PredictionMatrix(n, p, std::move(out));
}

EnsembleLearner::EnsembleLearner(std::vector<SnapshotLearner> members, std::size_t mc_passes,
                                 std::uint64_t mc_seed)
    : members_(std::move(members)), mc_passes_(mc_passes), mc_seed_(mc_seed) {
  for (const auto& m : members_) {
    if (!(m.weight >= 0.0 && m.weight <= 1.0)) {
      throw std::invalid_argument("member weight must lie in [0, 1]");
    }
  }
  if (mc_passes_ > 0) {
    if (members_.size() != 1) throw std::invalid_argument("MC dropout wraps exactly one learner");
    if (!(members_.front().params.dropout_prob > 0.0)) {
      throw InvalidConfiguration("MC dropout needs a network with dropout_prob > 0");
    }
  }
}

std::vector<PredictionMatrix> EnsembleLearner::member_predictions(const Matrix& inputs) const {
  if (members_.empty()) throw InvalidState("ensemble has no members");
  std::vector<PredictionMatrix> out;
  if (mc_passes_ > 0) {
    Rng rng(mc_seed_);
    out.reserve(mc_passes_);
    for (std::size_t k = 0; k < mc_passes_; ++k) {
      out.push_back(forward(members_.front().params, inputs, ForwardMode::kMcDropout, &rng));
    }
    return out;
  }
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(forward(m.params, inputs));
  return out;
}

std::vector<double> EnsembleLearner::member_weights() const {
  if (mc_passes_ > 0) return std::vector<double>(mc_passes_, members_.front().weight);
  std::vector<double> w;
  for (const auto& m : members_) w.push_back(m.weight);
  return w;
}

PredictionMatrix EnsembleLearner::predict(const Matrix& inputs, Combiner combiner) const {
  if (members_.empty()) throw InvalidState("ensemble has no members");
  const auto preds = member_predictions(inputs);
  const auto w = member_weights();
  return combine(preds, w, combiner);
}

PruneFactor PruneFactor::fixed(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  return {false, beta};
}

std::string PruneFactor::to_string() const { return ideal ? "ideal" : format_exact(value); }

PruneFactor PruneFactor::parse(std::string_view s) {
  s = detail::trim(s);
  if (s == "ideal") return ideal_factor();
  try {
    return fixed(detail::parse_double(s, 0));
  } catch (const ParseError&) {
    throw std::invalid_argument("beta must be 'ideal' or a number in [0, 1], got '" +
                                std::string(s) + "'");
  }
}

namespace {

void require_nonempty(std::span<const double> w) {
  if (w.empty()) throw std::invalid_argument("accuracy list is empty");
}

}  // namespace

double prune_threshold(std::span<const double> w, double beta) {
  require_nonempty(w);
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  if (beta == 1.0) return *lo;
  return *hi - beta * (*hi - *lo);
}

double ideal_beta(std::span<const double> w) {
  require_nonempty(w);
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  if (*hi == *lo) return 0.0;
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  return std::clamp((*hi - mean) / (*hi - *lo), 0.0, 1.0);
}

std::vector<std::size_t> pruned_set(std::span<const double> w, double beta) {
  const double tau = prune_threshold(w, beta);
  std::vector<std::size_t> idx(w.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return w[a] > w[b]; });
  std::erase_if(idx, [&](auto k) { return w[k] < tau - kPruneTolerance; });
  return idx;
}

std::size_t DynSnapConfig::cycle_limit() const {
  return max_cycles != 0 ? max_cycles : 10 * ((m + n - 1) / n);
}

void DynSnapConfig::validate() const {
  if (m == 0) throw InvalidConfiguration("ensemble size m must be at least 1");
  if (n == 0) throw InvalidConfiguration("snapshots per cycle N must be at least 1");
  if (epochs < n) throw InvalidConfiguration("epochs T must be at least N");
  if (!beta.ideal && !(beta.value >= 0.0 && beta.value <= 1.0)) {
    throw InvalidConfiguration("beta must lie in [0, 1]");
  }
  if (!(alpha0 > 0.0)) throw InvalidConfiguration("alpha0 must be positive");
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw InvalidConfiguration("valid_fraction must lie in (0, 1)");
  }
  net.validate();
}

TrainedEnsemble dynsnap_train(const DynSnapConfig& config, const LabeledDataset& data,
                              std::uint64_t master_seed) {
  config.validate();
  TrainedEnsemble out;
  std::vector<SnapshotLearner> members;
  const CyclicCosineSchedule cosine{config.alpha0, config.epochs, config.n};
  const auto staircase = StepDecaySchedule::staircase(config.alpha0, config.epochs);
  LrSchedule lr;
  if (config.variant == SnapVariant::kCyclic) {
    lr = [&](std::size_t t) { return cyclic_cosine_lr(t, cosine); };
  } else {
    lr = [&](std::size_t t) { return step_decay_lr(t, staircase); };
  }

  for (std::size_t cycle = 0; members.size() < config.m; ++cycle) {
    if (cycle == config.cycle_limit()) {
      throw CannotFillEnsemble("collected " + std::to_string(members.size()) + " of " +
                               std::to_string(config.m) + " members in " +
                               std::to_string(cycle) + " cycles");
    }
    const auto seed = derive_seed({master_seed, cycle});
    auto [train, valid] = resample_train_valid(data, config.valid_fraction, derive_seed({seed, 1}));
    NetConfig net = config.net;
    net.seed = derive_seed({seed, 2});
    TrainingRun run;
    try {
      run = train_with_snapshots(net, train, valid, config.epochs, lr, derive_seed({seed, 3}));
    } catch (const TrainingDiverged& e) {
      throw TrainingDiverged(std::string(e.what()) + " in cycle " + std::to_string(cycle),
                             static_cast<std::ptrdiff_t>(cycle));
    }
    out.samples_processed += run.samples_processed;

    auto picked = config.variant == SnapVariant::kCyclic
                      ? cyclic_snapshot_select(run.history, config.epochs, config.n)
                      : topn_snapshot_select(run.history, config.n);
    std::stable_sort(picked.begin(), picked.end(),
                     [](const EpochRecord& a, const EpochRecord& b) { return a.val_acc > b.val_acc; });

    CycleDiagnostics diag;
    diag.cycle = cycle;
    for (const auto& r : picked) {
      diag.w.push_back(r.val_acc);
      diag.epochs.push_back(r.epoch);
    }
    diag.mean = std::accumulate(diag.w.begin(), diag.w.end(), 0.0) / static_cast<double>(diag.w.size());
    diag.beta = config.beta.ideal ? ideal_beta(diag.w) : config.beta.value;
    diag.tau = prune_threshold(diag.w, diag.beta);
    const auto kept = pruned_set(diag.w, diag.beta);
    diag.kept = kept.size();
    for (auto k : kept) {
      if (members.size() == config.m) break;
      members.push_back({std::move(run.snapshots[picked[k].handle]), picked[k].val_acc,
                         {cycle, k, picked[k].epoch}});
      ++diag.admitted;
    }
    out.cycles.push_back(std::move(diag));
  }
  out.ensemble = EnsembleLearner(std::move(members));
  return out;
}

TrainedEnsemble snapshot_baseline_train(const DynSnapConfig& config, const LabeledDataset& data,
                                        std::uint64_t master_seed) {
  config.validate();
  DynSnapConfig one = config;
  one.variant = SnapVariant::kCyclic;
  one.epochs = (config.epochs * config.m + config.n - 1) / config.n;
  one.n = config.m;
  one.beta = PruneFactor::fixed(1.0);
  one.max_cycles = 1;
  return dynsnap_train(one, data, master_seed);
}

namespace {

struct BestEpoch {
  SnapshotLearner learner;
  std::uint64_t samples = 0;
};

BestEpoch train_best_epoch(const BaseTrainingConfig& config, const LabeledDataset& train,
                           const LabeledDataset& valid, std::uint64_t seed) {
  NetConfig net = config.net;
  net.seed = derive_seed({seed, 2});
  const auto sched = StepDecaySchedule::staircase(config.alpha0, config.epochs);
  auto run = train_with_snapshots(
      net, train, valid, config.epochs, [&](std::size_t t) { return step_decay_lr(t, sched); },
      derive_seed({seed, 3}));
  const auto best = topn_snapshot_select(run.history, 1).front();
  return {{std::move(run.snapshots[best.handle]), best.val_acc, {0, 0, best.epoch}},
          run.samples_processed};
}

}  // namespace

TrainedEnsemble single_base_train(const BaseTrainingConfig& config, const LabeledDataset& train,
                                  const LabeledDataset& valid, std::uint64_t seed) {
  auto best = train_best_epoch(config, train, valid, seed);
  TrainedEnsemble out;
  out.samples_processed = best.samples;
  out.ensemble = EnsembleLearner({std::move(best.learner)});
  return out;
}

TrainedEnsemble ext_bagging_train(const BaseTrainingConfig& config, const LabeledDataset& train,
                                  const LabeledDataset& valid, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw InvalidConfiguration("ensemble size m must be at least 1");
  TrainedEnsemble out;
  std::vector<SnapshotLearner> members;
  for (std::size_t j = 0; j < m; ++j) {
    auto best = train_best_epoch(config, train, valid, derive_seed({seed, j}));
    best.learner.provenance.cycle = j;
    out.samples_processed += best.samples;
    members.push_back(std::move(best.learner));
  }
  out.ensemble = EnsembleLearner(std::move(members));
  return out;
}

TrainedEnsemble mc_dropout_train(const BaseTrainingConfig& config, const LabeledDataset& train,
                                 const LabeledDataset& valid, std::size_t m, std::uint64_t seed,
                                 double dropout_prob) {
  if (m == 0) throw InvalidConfiguration("MC dropout needs at least one pass");
  BaseTrainingConfig with_dropout = config;
  with_dropout.net.dropout_prob = dropout_prob;
  auto best = train_best_epoch(with_dropout, train, valid, seed);
  TrainedEnsemble out;
  out.samples_processed = best.samples;
  out.ensemble = EnsembleLearner({std::move(best.learner)}, m, derive_seed({seed, 4}));
  return out;
}

std::string save_ensemble(const std::string& dir, const EnsembleLearner& ensemble,
                          Combiner combiner) {
  if (ensemble.empty()) throw InvalidState("cannot save an empty ensemble");
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto manifest = (fs::path(dir) / "ensemble.manifest").string();
  std::ofstream out(manifest);
  if (!out) throw std::runtime_error("cannot open " + manifest + " for writing");
  out << "ENSEMBLE v1\n";
  out << "combiner " << to_string(combiner) << '\n';
  out << "m " << ensemble.size() << '\n';
  out << "mc_passes " << ensemble.mc_passes() << '\n';
  out << "mc_seed " << ensemble.mc_seed() << '\n';
  for (std::size_t j = 0; j < ensemble.size(); ++j) {
    const auto& m = ensemble.members()[j];
    std::ostringstream name;
    name << "member_" << j << ".tinynet";
    save_net((fs::path(dir) / name.str()).string(), m.params);
    out << "member " << format_exact(m.weight) << ' ' << m.provenance.cycle << ' '
        << m.provenance.snapshot << ' ' << m.provenance.epoch << ' ' << name.str() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + manifest);
  return manifest;
}

std::pair<EnsembleLearner, Combiner> load_ensemble(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open " + manifest_path);
  const auto base = fs::path(manifest_path).parent_path();
  std::string line;
  std::size_t line_no = 0;
  auto need = [&](std::string_view key, std::size_t fields) {
    if (!detail::next_content_line(in, line, line_no)) {
      throw ParseError("unexpected end of manifest, expected '" + std::string(key) + "'", line_no);
    }
    auto f = detail::split_ws(line);
    if (f.empty() || f[0] != key || f.size() != fields) {
      throw ParseError("expected '" + std::string(key) + "' with " + std::to_string(fields - 1) +
                           " values",
                       line_no);
    }
    return f;
  };
  if (!detail::next_content_line(in, line, line_no) || detail::trim(line) != "ENSEMBLE v1") {
    throw ParseError("expected 'ENSEMBLE v1'", line_no);
  }
  Combiner combiner;
  try {
    combiner = parse_combiner(need("combiner", 2)[1]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line_no);
  }
  const auto m = detail::parse_size(need("m", 2)[1], line_no);
  const auto passes = detail::parse_size(need("mc_passes", 2)[1], line_no);
  std::uint64_t mc_seed = 0;
  {
    auto f = need("mc_seed", 2);
    mc_seed = detail::parse_size(f[1], line_no);
  }
  std::vector<SnapshotLearner> members;
  for (std::size_t j = 0; j < m; ++j) {
    auto f = need("member", 6);
    SnapshotLearner s;
    s.weight = detail::parse_double(f[1], line_no);
    s.provenance = {detail::parse_size(f[2], line_no), detail::parse_size(f[3], line_no),
                    detail::parse_size(f[4], line_no)};
    s.params = load_net((base / std::string(f[5])).string());
    members.push_back(std::move(s));
  }
  if (detail::next_content_line(in, line, line_no)) throw ParseError("unexpected trailing data", line_no);
  try {
    return {EnsembleLearner(std::move(members), passes, mc_seed), combiner};
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 0);
  }
}

}  // namespace dynens
