#include "dynens/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "dynens/errors.hpp"
#include "dynens/metrics.hpp"
#include "dynens/rng.hpp"

namespace dynens {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::kSingleBase: return "SingleBase";
    case Method::kExtBagging: return "ExtBagging";
    case Method::kMCDropout: return "MCDropout";
    case Method::kSnapshot: return "Snapshot";
    case Method::kDynSnapCyc: return "DynSnap-cyc";
    case Method::kDynSnapStep: return "DynSnap-step";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (auto m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

namespace {

std::size_t method_index(Method m) {
  return static_cast<std::size_t>(std::find(std::begin(kAllMethods), std::end(kAllMethods), m) -
                                  std::begin(kAllMethods));
}

template <class T>
std::string join_numbers(const std::vector<T>& v) {
  std::vector<std::string> parts;
  for (const auto& x : v) {
    if constexpr (std::is_floating_point_v<T>) {
      parts.push_back(format_exact(x));
    } else {
      parts.push_back(std::to_string(x));
    }
  }
  return join(parts);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_key_values(const KeyValues& kv) {
  ExperimentConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "classes") c.classes = parse_count(key, value);
    else if (key == "dims") c.dims = parse_count(key, value);
    else if (key == "per_class") c.per_class = parse_count(key, value);
    else if (key == "separation") c.separation = parse_real(key, value);
    else if (key == "keep_fractions") c.keep_fractions = parse_real_list(key, value);
    else if (key == "held_out_class") {
      c.held_out_class = value == "none" ? std::nullopt
                                         : std::optional<std::size_t>(parse_count(key, value));
    } else if (key == "growth") {
      const auto g = parse_real_list(key, value);
      if (g.size() != 3) throw std::invalid_argument("config key 'growth': expected three values");
      std::copy(g.begin(), g.end(), c.growth.begin());
    } else if (key == "eval_per_class") c.eval_per_class = parse_count(key, value);
    else if (key == "stream") c.stream_path = value;
    else if (key == "methods") {
      c.methods.clear();
      for (const auto& s : parse_list(value)) c.methods.push_back(parse_method(s));
    } else if (key == "combiners") {
      c.combiners.clear();
      for (const auto& s : parse_list(value)) c.combiners.push_back(parse_combiner(s));
    } else if (key == "m") c.m = parse_count(key, value);
    else if (key == "n") c.n = parse_count(key, value);
    else if (key == "beta") c.beta = PruneFactor::parse(value);
    else if (key == "epochs") c.epochs = parse_count(key, value);
    else if (key == "alpha0") c.alpha0 = parse_real(key, value);
    else if (key == "momentum") c.momentum = parse_real(key, value);
    else if (key == "hidden") c.hidden = parse_count_list(key, value);
    else if (key == "batch_size") c.batch_size = parse_count(key, value);
    else if (key == "weight_init_scale") c.weight_init_scale = parse_real(key, value);
    else if (key == "mc_dropout_prob") c.mc_dropout_prob = parse_real(key, value);
    else if (key == "valid_fraction") c.valid_fraction = parse_real(key, value);
    else if (key == "replicates") c.replicates = parse_count(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "ks") c.ks = parse_count_list(key, value);
    else if (key == "same_seed_across_stages") c.same_seed_across_stages = parse_bool(key, value);
    else if (key == "workers") c.workers = parse_count(key, value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_key_values(load_key_values(path));
}

KeyValues ExperimentConfig::to_key_values() const {
  KeyValues kv;
  kv["classes"] = std::to_string(classes);
  kv["dims"] = std::to_string(dims);
  kv["per_class"] = std::to_string(per_class);
  kv["separation"] = format_exact(separation);
  kv["keep_fractions"] = join_numbers(keep_fractions);
  kv["held_out_class"] = held_out_class ? std::to_string(*held_out_class) : "none";
  kv["growth"] = join_numbers(std::vector<double>(growth.begin(), growth.end()));
  kv["eval_per_class"] = std::to_string(eval_per_class);
  kv["stream"] = stream_path;
  std::vector<std::string> names;
  for (auto m : methods) names.emplace_back(to_string(m));
  kv["methods"] = join(names);
  names.clear();
  for (auto c : combiners) names.emplace_back(to_string(c));
  kv["combiners"] = join(names);
  kv["m"] = std::to_string(m);
  kv["n"] = std::to_string(n);
  kv["beta"] = beta.to_string();
  kv["epochs"] = std::to_string(epochs);
  kv["alpha0"] = format_exact(alpha0);
  kv["momentum"] = format_exact(momentum);
  kv["hidden"] = join_numbers(hidden);
  kv["batch_size"] = std::to_string(batch_size);
  kv["weight_init_scale"] = format_exact(weight_init_scale);
  kv["mc_dropout_prob"] = format_exact(mc_dropout_prob);
  kv["valid_fraction"] = format_exact(valid_fraction);
  kv["replicates"] = std::to_string(replicates);
  kv["seed"] = std::to_string(seed);
  kv["ks"] = join_numbers(ks);
  kv["same_seed_across_stages"] = same_seed_across_stages ? "true" : "false";
  kv["workers"] = std::to_string(workers);
  return kv;
}

void ExperimentConfig::validate() const {
  if (stream_path.empty()) {
    if (classes < 2) throw InvalidConfiguration("classes must be at least 2");
    if (keep_fractions.size() != classes) {
      throw InvalidConfiguration("keep_fractions needs one value per class");
    }
    if (held_out_class && *held_out_class >= classes) {
      throw InvalidConfiguration("held_out_class out of range");
    }
  }
  if (methods.empty()) throw InvalidConfiguration("methods must not be empty");
  if (combiners.empty()) throw InvalidConfiguration("combiners must not be empty");
  if (replicates == 0) throw InvalidConfiguration("replicates must be at least 1");
  if (workers == 0) throw InvalidConfiguration("workers must be at least 1");
  if (m == 0 || n == 0) throw InvalidConfiguration("m and n must be at least 1");
  if (epochs < n) throw InvalidConfiguration("epochs must be at least n");
  if (!(alpha0 > 0.0)) throw InvalidConfiguration("alpha0 must be positive");
  if (!(mc_dropout_prob > 0.0 && mc_dropout_prob < 1.0)) {
    throw InvalidConfiguration("mc_dropout_prob must lie in (0, 1)");
  }
  for (auto k : ks) {
    if (k == 0) throw InvalidConfiguration("ks entries must be at least 1");
  }
  net_config(1, 2).validate();
}

NetConfig ExperimentConfig::net_config(std::size_t input_dim, std::size_t num_classes) const {
  NetConfig net;
  net.input_dim = input_dim;
  net.hidden_dims = hidden;
  net.num_classes = num_classes;
  net.weight_init_scale = weight_init_scale;
  net.batch_size = batch_size;
  net.momentum = momentum;
  return net;
}

DynSnapConfig ExperimentConfig::dynsnap_config(SnapVariant variant, std::size_t input_dim,
                                               std::size_t num_classes) const {
  DynSnapConfig d;
  d.variant = variant;
  d.m = m;
  d.n = n;
  d.beta = beta;
  d.epochs = epochs;
  d.alpha0 = alpha0;
  d.net = net_config(input_dim, num_classes);
  d.valid_fraction = valid_fraction;
  return d;
}

BaseTrainingConfig ExperimentConfig::base_config(std::size_t input_dim,
                                                 std::size_t num_classes) const {
  return {net_config(input_dim, num_classes), epochs, alpha0};
}

StreamDataset build_stream(const ExperimentConfig& config) {
  config.validate();
  if (!config.stream_path.empty()) return load_stream(config.stream_path);
  const auto full = make_synthetic(config.classes, config.dims, config.per_class,
                                   config.separation, derive_seed({config.seed, 0xda7aULL}));
  ImbalanceSpec spec;
  if (config.held_out_class) {
    spec = ImbalanceSpec::held_out_class(config.keep_fractions, *config.held_out_class,
                                         config.eval_per_class);
  } else {
    spec.keep_fractions = config.keep_fractions;
    for (auto& s : spec.stage_classes) {
      for (std::size_t c = 0; c < config.classes; ++c) s.push_back(c);
    }
    spec.eval_per_class = config.eval_per_class;
  }
  spec.growth = config.growth;
  return make_stream(full, spec, derive_seed({config.seed, 0x57eaULL}));
}

std::uint64_t cell_seed(const ExperimentConfig& config, std::size_t replicate, Method method,
                        std::size_t stage) {
  const std::uint64_t s = config.same_seed_across_stages ? 0 : stage + 1;
  return derive_seed({config.seed, 0xce11ULL, replicate, method_index(method), s});
}

Stat summarize(const std::vector<double>& values) {
  Stat s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

const Stat& CombinerSummary::get(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m.stat;
  }
  throw std::out_of_range("no metric '" + std::string(name) + "'");
}

const CombinerSummary& MethodSummary::get(Combiner c) const {
  for (const auto& s : combiners) {
    if (s.combiner == c) return s;
  }
  throw std::out_of_range("no combiner '" + std::string(to_string(c)) + "'");
}

const MethodSummary& ExperimentReport::get(Method m) const {
  for (const auto& s : methods) {
    if (s.method == m) return s;
  }
  throw std::out_of_range("no method '" + std::string(to_string(m)) + "'");
}

TrainedEnsemble train_method(const ExperimentConfig& config, Method method,
                             const LabeledDataset& train, const LabeledDataset& valid,
                             std::uint64_t seed) {
  const auto d = train.dims();
  const auto k = train.class_count;
  switch (method) {
    case Method::kSingleBase:
      return single_base_train(config.base_config(d, k), train, valid, seed);
    case Method::kExtBagging:
      return ext_bagging_train(config.base_config(d, k), train, valid, config.m, seed);
    case Method::kMCDropout:
      return mc_dropout_train(config.base_config(d, k), train, valid, config.m, seed,
                              config.mc_dropout_prob);
    case Method::kSnapshot:
      return snapshot_baseline_train(config.dynsnap_config(SnapVariant::kCyclic, d, k), train, seed);
    case Method::kDynSnapCyc:
      return dynsnap_train(config.dynsnap_config(SnapVariant::kCyclic, d, k), train, seed);
    case Method::kDynSnapStep:
      return dynsnap_train(config.dynsnap_config(SnapVariant::kStep, d, k), train, seed);
  }
  throw std::invalid_argument("unknown method");
}

namespace {

constexpr const char* kPairNames[] = {"1to2", "2to3", "1to3"};

void add_metric(CombinerSummary& s, std::string name, const std::vector<double>& values) {
  s.metrics.push_back({std::move(name), summarize(values)});
}

bool is_dynsnap(Method m) { return m == Method::kDynSnapCyc || m == Method::kDynSnapStep; }

ExperimentReport aggregate(const ExperimentConfig& config, const StreamDataset& stream,
                           const std::vector<CellResult>& cells) {
  ExperimentReport rep;
  rep.config = config.to_key_values();
  rep.config.erase("workers");
  for (const auto& d : stream.stages) {
    rep.cost_unit += static_cast<double>(config.epochs) * static_cast<double>(d.size());
  }
  const auto labels = stream.test.label_vector();
  const auto n_methods = config.methods.size();
  auto cell = [&](std::size_t r, std::size_t mi, std::size_t s) -> const CellResult& {
    return cells[(r * n_methods + mi) * 3 + s];
  };

  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    MethodSummary ms;
    ms.method = config.methods[mi];
    std::vector<std::size_t> ok_reps;
    std::vector<double> costs;
    double cycles = 0.0;
    std::size_t ok_cells = 0;
    for (std::size_t r = 0; r < config.replicates; ++r) {
      bool all_ok = true;
      double samples = 0.0;
      for (std::size_t s = 0; s < 3; ++s) {
        const auto& c = cell(r, mi, s);
        if (!c.ok) {
          ++ms.failed_cells;
          ms.failures.push_back("replicate " + std::to_string(r) + " stage " +
                                std::to_string(s + 1) + ": " + c.error);
          all_ok = false;
          continue;
        }
        ++ok_cells;
        cycles += static_cast<double>(std::max<std::size_t>(c.cycles.size(), 1));
        samples += static_cast<double>(c.samples_processed);
        if (is_dynsnap(ms.method) && config.beta.ideal) {
          for (const auto& d : c.cycles) {
            for (std::size_t j = 0; j < d.admitted; ++j) {
              rep.admission_violations += d.w[j] < d.mean - kPruneTolerance;
            }
          }
        }
      }
      if (all_ok) {
        ok_reps.push_back(r);
        costs.push_back(samples / rep.cost_unit);
      }
    }
    ms.replicates_ok = ok_reps.size();
    ms.relative_cost = summarize(costs).mean;
    ms.mean_cycles = ok_cells ? cycles / static_cast<double>(ok_cells) : 0.0;

    for (std::size_t ci = 0; ci < config.combiners.size(); ++ci) {
      std::vector<AveragedReport> reps;
      for (auto r : ok_reps) {
        const PredictionMatrix preds[3] = {cell(r, mi, 0).predictions[ci],
                                           cell(r, mi, 1).predictions[ci],
                                           cell(r, mi, 2).predictions[ci]};
        auto avg = pairwise_average_report(preds, labels, config.ks);
        for (std::size_t p = 0; p < kStagePairs.size(); ++p) {
          const auto a = avg.acc_each[kStagePairs[p][0]];
          const auto b = avg.acc_each[kStagePairs[p][1]];
          const auto bounds = theorem5_bounds(a, b);
          const auto ac = correct_consistency(preds[kStagePairs[p][0]], preds[kStagePairs[p][1]], labels);
          rep.envelope_violations += ac < bounds.lower - 1e-12 || ac > bounds.upper + 1e-12;
        }
        reps.push_back(std::move(avg));
      }
      CombinerSummary cs;
      cs.combiner = config.combiners[ci];
      auto collect = [&](auto fn) {
        std::vector<double> v;
        for (const auto& a : reps) v.push_back(fn(a));
        return v;
      };
      add_metric(cs, "acc", collect([](const AveragedReport& a) { return a.acc; }));
      add_metric(cs, "con", collect([](const AveragedReport& a) { return a.con; }));
      add_metric(cs, "acc_con", collect([](const AveragedReport& a) { return a.acc_con; }));
      for (auto k : config.ks) {
        add_metric(cs, "ccon_" + std::to_string(k),
                   collect([k](const AveragedReport& a) { return a.ccon_k.at(k); }));
      }
      for (auto k : config.ks) {
        add_metric(cs, "cacc_" + std::to_string(k),
                   collect([k](const AveragedReport& a) { return a.cacc_k.at(k); }));
      }
      add_metric(cs, "pearson", collect([](const AveragedReport& a) { return a.pearson; }));
      add_metric(cs, "cosine", collect([](const AveragedReport& a) { return a.cosine; }));
      for (std::size_t p = 0; p < 3; ++p) {
        const std::string pre = std::string(kPairNames[p]) + "_";
        add_metric(cs, pre + "cto_c", collect([p](const AveragedReport& a) { return a.transitions[p].cto_c; }));
        add_metric(cs, pre + "cto_i", collect([p](const AveragedReport& a) { return a.transitions[p].cto_i; }));
        add_metric(cs, pre + "ito_c", collect([p](const AveragedReport& a) { return a.transitions[p].ito_c; }));
        add_metric(cs, pre + "ito_i", collect([p](const AveragedReport& a) { return a.transitions[p].ito_i; }));
        add_metric(cs, pre + "com", collect([p](const AveragedReport& a) { return a.transitions[p].com; }));
      }
      ms.combiners.push_back(std::move(cs));
    }
    rep.methods.push_back(std::move(ms));
  }
  return rep;
}

}  // namespace

ExperimentRun run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, build_stream(config));
}

ExperimentRun run_experiment(const ExperimentConfig& config, const StreamDataset& stream) {
  config.validate();
  if (stream.test.size() == 0) throw std::invalid_argument("stream has an empty test set");
  for (auto k : config.ks) {
    if (k > stream.test.class_count) throw InvalidConfiguration("ks entry exceeds class count");
  }
  const auto n_methods = config.methods.size();
  const auto total = config.replicates * n_methods * 3;
  std::vector<CellResult> cells(total);
  for (std::size_t r = 0; r < config.replicates; ++r) {
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      for (std::size_t s = 0; s < 3; ++s) {
        auto& c = cells[(r * n_methods + mi) * 3 + s];
        c.replicate = r;
        c.method = config.methods[mi];
        c.stage = s;
        c.seed = cell_seed(config, r, c.method, s);
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&] {
    for (;;) {
      const auto idx = next.fetch_add(1);
      if (idx >= total) return;
      auto& c = cells[idx];
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto trained =
            train_method(config, c.method, stream.stages[c.stage], stream.validation, c.seed);
        const auto preds = trained.ensemble.member_predictions(stream.test.features);
        const auto weights = trained.ensemble.member_weights();
        for (auto comb : config.combiners) c.predictions.push_back(combine(preds, weights, comb));
        c.cycles = trained.cycles;
        c.samples_processed = trained.samples_processed;
        c.ok = true;
      } catch (const TrainingDiverged& e) {
        c.error = e.what();
      } catch (const CannotFillEnsemble& e) {
        c.error = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(total);
      }
      c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  const auto n_workers = std::min(config.workers, total);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  ExperimentRun run;
  run.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.method_seconds.assign(n_methods, 0.0);
  for (std::size_t i = 0; i < total; ++i) run.method_seconds[(i / 3) % n_methods] += cells[i].seconds;
  run.report = aggregate(config, stream, cells);
  run.cells = std::move(cells);
  return run;
}

std::string_view to_string(SweepDimension d) noexcept {
  switch (d) {
    case SweepDimension::kM: return "m";
    case SweepDimension::kBeta: return "beta";
    case SweepDimension::kN: return "n";
    case SweepDimension::kWindow: return "window";
  }
  return "?";
}

SweepDimension parse_sweep_dimension(std::string_view s) {
  for (auto d : {SweepDimension::kM, SweepDimension::kBeta, SweepDimension::kN,
                 SweepDimension::kWindow}) {
    if (to_string(d) == s) return d;
  }
  throw std::invalid_argument("unknown sweep dimension '" + std::string(s) +
                              "' (expected m, beta, n or window)");
}

SweepReport sensitivity_sweep(const ExperimentConfig& config, SweepDimension dimension,
                              const std::vector<std::string>& values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  config.validate();
  const auto stream = build_stream(config);
  SweepReport out;
  out.dimension = dimension;
  out.values = values;

  using CellKey = std::tuple<std::size_t, Method, std::size_t>;
  std::vector<std::pair<double, std::map<CellKey, std::vector<CycleDiagnostics>>>> beta_runs;
  const auto window = (config.epochs + config.n - 1) / config.n;
  for (const auto& v : values) {
    ExperimentConfig c = config;
    switch (dimension) {
      case SweepDimension::kM: c.m = parse_count("m", v); break;
      case SweepDimension::kBeta: c.beta = PruneFactor::parse(v); break;
      case SweepDimension::kN:
        c.n = parse_count("n", v);
        c.epochs = window * c.n;
        break;
      case SweepDimension::kWindow: c.epochs = parse_count("window", v) * c.n; break;
    }
    c.validate();
    auto run = run_experiment(c, stream);
    if (dimension == SweepDimension::kBeta && !c.beta.ideal) {
      std::map<CellKey, std::vector<CycleDiagnostics>> diags;
      for (auto& cell : run.cells) {
        if (cell.ok && is_dynsnap(cell.method)) {
          diags[{cell.replicate, cell.method, cell.stage}] = std::move(cell.cycles);
        }
      }
      beta_runs.emplace_back(c.beta.value, std::move(diags));
    }
    out.reports.push_back(std::move(run.report));
  }

  std::stable_sort(beta_runs.begin(), beta_runs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < beta_runs.size(); ++i) {
    const auto& lo = beta_runs[i - 1].second;
    const auto& hi = beta_runs[i].second;
    for (const auto& [key, cycles_lo] : lo) {
      const auto it = hi.find(key);
      if (it == hi.end()) continue;
      const auto common = std::min(cycles_lo.size(), it->second.size());
      for (std::size_t k = 0; k < common; ++k) {
        const auto& a = cycles_lo[k];
        const auto& b = it->second[k];
        ++out.monotonicity_checks;
        const auto kept_a = pruned_set(a.w, a.beta);
        const auto kept_b = pruned_set(b.w, b.beta);
        const bool subset = std::all_of(kept_a.begin(), kept_a.end(), [&](std::size_t j) {
          return std::find(kept_b.begin(), kept_b.end(), j) != kept_b.end();
        });
        if (a.w != b.w || a.kept != kept_a.size() || b.kept != kept_b.size() || !subset) {
          ++out.monotonicity_violations;
        }
      }
    }
  }
  return out;
}

namespace {

ojson report_json(const ExperimentReport& r) {
  ojson j;
  j["format"] = "dynens-report v1";
  ojson cfg = ojson::object();
  for (const auto& [k, v] : r.config) cfg[k] = v;
  j["config"] = cfg;
  j["cost_unit"] = r.cost_unit;
  j["envelope_violations"] = r.envelope_violations;
  j["admission_violations"] = r.admission_violations;
  ojson methods = ojson::array();
  for (const auto& m : r.methods) {
    ojson jm;
    jm["method"] = std::string(to_string(m.method));
    jm["relative_cost"] = m.relative_cost;
    jm["mean_cycles"] = m.mean_cycles;
    jm["replicates_ok"] = m.replicates_ok;
    jm["failed_cells"] = m.failed_cells;
    jm["failures"] = m.failures;
    ojson combs = ojson::array();
    for (const auto& c : m.combiners) {
      ojson jc;
      jc["combiner"] = std::string(to_string(c.combiner));
      ojson metrics = ojson::object();
      for (const auto& s : c.metrics) {
        metrics[s.name] = {{"mean", s.stat.mean}, {"sd", s.stat.sd}, {"count", s.stat.count}};
      }
      jc["metrics"] = metrics;
      combs.push_back(jc);
    }
    jm["combiners"] = combs;
    methods.push_back(jm);
  }
  j["methods"] = methods;
  return j;
}

ExperimentReport report_from(const ojson& j) {
  if (j.value("format", "") != "dynens-report v1") {
    throw std::invalid_argument("not a dynens report");
  }
  ExperimentReport r;
  for (const auto& [k, v] : j.at("config").items()) r.config[k] = v.get<std::string>();
  r.cost_unit = j.at("cost_unit").get<double>();
  r.envelope_violations = j.at("envelope_violations").get<std::size_t>();
  r.admission_violations = j.at("admission_violations").get<std::size_t>();
  for (const auto& jm : j.at("methods")) {
    MethodSummary m;
    m.method = parse_method(jm.at("method").get<std::string>());
    m.relative_cost = jm.at("relative_cost").get<double>();
    m.mean_cycles = jm.at("mean_cycles").get<double>();
    m.replicates_ok = jm.at("replicates_ok").get<std::size_t>();
    m.failed_cells = jm.at("failed_cells").get<std::size_t>();
    m.failures = jm.at("failures").get<std::vector<std::string>>();
    for (const auto& jc : jm.at("combiners")) {
      CombinerSummary c;
      c.combiner = parse_combiner(jc.at("combiner").get<std::string>());
      for (const auto& [name, s] : jc.at("metrics").items()) {
        c.metrics.push_back({name, {s.at("mean").get<double>(), s.at("sd").get<double>(),
                                    s.at("count").get<std::size_t>()}});
      }
      m.combiners.push_back(std::move(c));
    }
    r.methods.push_back(std::move(m));
  }
  return r;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  return report_json(report).dump(2) + "\n";
}

ExperimentReport report_from_json(std::string_view json) {
  try {
    return report_from(ojson::parse(json));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "method,combiner,metric,mean,sd,count\n";
  for (const auto& m : report.methods) {
    out << to_string(m.method) << ",-,relative_cost," << format_exact(m.relative_cost) << ",0,"
        << m.replicates_ok << '\n';
    for (const auto& c : m.combiners) {
      for (const auto& s : c.metrics) {
        out << to_string(m.method) << ',' << to_string(c.combiner) << ',' << s.name << ','
            << format_exact(s.stat.mean) << ',' << format_exact(s.stat.sd) << ',' << s.stat.count
            << '\n';
      }
    }
  }
  return out.str();
}

std::string sweep_to_json(const SweepReport& sweep) {
  ojson j;
  j["format"] = "dynens-sweep v1";
  j["dimension"] = std::string(to_string(sweep.dimension));
  j["values"] = sweep.values;
  j["monotonicity_checks"] = sweep.monotonicity_checks;
  j["monotonicity_violations"] = sweep.monotonicity_violations;
  ojson reps = ojson::array();
  for (const auto& r : sweep.reports) reps.push_back(report_json(r));
  j["reports"] = reps;
  return j.dump(2) + "\n";
}

std::string sweep_to_csv(const SweepReport& sweep) {
  std::ostringstream out;
  out << "dimension,value,method,combiner,metric,mean,sd\n";
  for (std::size_t i = 0; i < sweep.reports.size(); ++i) {
    for (const auto& m : sweep.reports[i].methods) {
      out << to_string(sweep.dimension) << ',' << sweep.values[i] << ',' << to_string(m.method)
          << ",-,relative_cost," << format_exact(m.relative_cost) << ",0\n";
      for (const auto& c : m.combiners) {
        for (const auto& s : c.metrics) {
          out << to_string(sweep.dimension) << ',' << sweep.values[i] << ','
              << to_string(m.method) << ',' << to_string(c.combiner) << ',' << s.name << ','
              << format_exact(s.stat.mean) << ',' << format_exact(s.stat.sd) << '\n';
        }
      }
    }
  }
  return out.str();
}

std::string timing_to_json(const ExperimentConfig& config, const ExperimentRun& run) {
  ojson j;
  j["total_seconds"] = run.total_seconds;
  double base = 0.0;
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    if (config.methods[i] == Method::kSingleBase) base = run.method_seconds[i];
  }
  ojson secs = ojson::object();
  ojson rel = ojson::object();
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    const std::string name(to_string(config.methods[i]));
    secs[name] = run.method_seconds[i];
    if (base > 0.0) rel[name] = run.method_seconds[i] / base;
  }
  j["method_seconds"] = secs;
  if (base > 0.0) j["relative_to_single_base"] = rel;
  return j.dump(2) + "\n";
}

std::string suite_report_to_json(const SuiteReport& report) {
  ojson j;
  const auto& c = report.config;
  j["config"] = {{"trials", c.trials},          {"m_min", c.m_min},
                 {"m_max", c.m_max},            {"p_min", c.p_min},
                 {"p_max", c.p_max},            {"concentrations", c.concentrations},
                 {"q_list", c.q_list},          {"seed", c.seed},
                 {"identical_copies", c.identical_copies}, {"tolerance", c.tolerance}};
  ojson per_q = ojson::array();
  for (std::size_t qi = 0; qi < report.stats.size(); ++qi) {
    ojson jq;
    jq["q"] = c.q_list[qi];
    ojson th = ojson::array();
    for (std::size_t t = 0; t < 4; ++t) {
      const auto& s = report.stats[qi][t];
      th.push_back({{"theorem", t + 1},
                    {"checks", s.checks},
                    {"violations", s.violations},
                    {"min_slack", s.min_slack},
                    {"slack_histogram", s.histogram}});
    }
    jq["theorems"] = th;
    per_q.push_back(jq);
  }
  j["results"] = per_q;
  j["total_violations"] = report.total_violations();
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, std::string_view text) {
  namespace fs = std::filesystem;
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace dynens
