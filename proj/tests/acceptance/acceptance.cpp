// Acceptance gate: one PASS/FAIL line per criterion, exit code 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dynens/ensemble.hpp"
#include "dynens/experiment.hpp"
#include "dynens/metrics.hpp"
#include "dynens/schedules.hpp"
#include "dynens/theorems.hpp"
#include "dynens/tiny_net.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace dynens;
using dynens::testing::Gen;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

// The default experiment is shared by criteria 6, 7 and 8.
struct DefaultRuns {
  std::optional<ExperimentRun> first;
  std::string first_json;
  double first_seconds = 0.0;
  std::string second_json;
};

DefaultRuns& default_runs() {
  static DefaultRuns runs;
  if (!runs.first) {
    ExperimentConfig c;
    c.workers = 1;
    const auto t0 = Clock::now();
    runs.first = run_experiment(c);
    runs.first_seconds = seconds_since(t0);
    runs.first_json = report_to_json(runs.first->report);
    runs.second_json = report_to_json(run_experiment(c).report);
  }
  return runs;
}

Outcome theorem_suite() {
  Outcome o;
  const auto t0 = Clock::now();
  SuiteConfig big;
  big.trials = 100000;
  big.seed = 1;
  big.workers = worker_count();
  const auto a = monte_carlo_suite(big);
  SuiteConfig minkowski = big;
  minkowski.trials = 10000;
  minkowski.seed = 2;
  minkowski.q_list = {1.5, 2.0, 3.0, 4.0};
  const auto b = monte_carlo_suite(minkowski);
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "violations " << a.total_violations() + b.total_violations() << ", " << elapsed << " s";
  o.require(a.total_violations() == 0 && b.total_violations() == 0, d.str());
  o.require(elapsed < 60.0, d.str());
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome correct_consistency_envelope() {
  Outcome o;
  std::uint64_t pairs = 0;
  for (std::size_t n = 1; n <= 12; ++n) {
    const auto e = enumerate_theorem5(n, 1e-12);
    pairs += e.pairs_checked;
    o.require(e.violations == 0, "enumeration violation at n=" + std::to_string(n));
  }
  Gen g(2);
  for (int i = 0; i < 10000; ++i) {
    const auto p = g.range(2, 10);
    const auto a = g.prediction_matrix(100, p), b = g.prediction_matrix(100, p);
    const auto r = g.labels(100, p);
    const auto bounds = theorem5_bounds(accuracy(a, r), accuracy(b, r));
    const double ac = correct_consistency(a, b, r);
    o.require(ac >= bounds.lower - 1e-12 && ac <= bounds.upper + 1e-12, "random set outside envelope");
  }
  if (o.pass) o.detail = std::to_string(pairs) + " enumerated pairs, 10000 random sets";
  return o;
}

PredictionMatrix soft(const std::vector<std::size_t>& argmax) {
  std::vector<double> v;
  for (auto c : argmax) {
    v.push_back(c == 0 ? 0.9 : 0.1);
    v.push_back(c == 0 ? 0.1 : 0.9);
  }
  return PredictionMatrix(argmax.size(), 2, v);
}

Outcome metric_fixture() {
  Outcome o;
  const auto a = soft({0, 0, 1, 1}), b = soft({0, 1, 1, 0});
  const LabelVector r({0, 0, 1, 0});
  const auto t = transition_stats(a, b, r);
  o.require(consistency(a, b) == 0.5 && accuracy(a, r) == 0.75 && accuracy(b, r) == 0.75 &&
                correct_consistency(a, b, r) == 0.5,
            "fixture agreement values");
  o.require(t.cto_c == 0.5 && t.cto_i == 0.25 && t.ito_c == 0.25 && t.ito_i == 0.0 && t.com == 0.5,
            "fixture transitions");
  Gen g(3);
  for (int i = 0; i < 100; ++i) {
    const auto n = g.range(1, 200), p = g.range(2, 10);
    const auto x = g.prediction_matrix(n, p), y = g.prediction_matrix(n, p);
    const auto lab = g.labels(n, p);
    o.require(coarse_consistency(x, y, 1) == consistency(x, y), "CCON-1 != CON");
    o.require(coarse_accuracy(x, lab, 1) == accuracy(x, lab), "CACC-1 != ACC");
    o.require(consistency(x, x) == 1.0, "CON(A,A) != 1");
    o.require(consistency(x, y) == dynens::testing::oracle_consistency(x, y), "CON oracle mismatch");
    o.require(std::abs(pearson_similarity(x, x) - 1.0) <= 1e-12, "Pearson(A,A) != 1");
    o.require(std::abs(cosine_similarity(x, x) - 1.0) <= 1e-12, "Cosine(A,A) != 1");
  }
  return o;
}

Outcome gradient_check() {
  Outcome o;
  NetConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_dims = {3};
  cfg.num_classes = 2;
  cfg.weight_init_scale = 0.5;
  cfg.seed = 0;
  const auto params = init_params(cfg);
  Gen g(0);
  Matrix x(8, 2);
  for (auto& v : x.data()) v = g.uniform(-2, 2);
  std::vector<std::size_t> y(8);
  for (auto& v : y) v = g.index(2);
  const auto analytic = loss_and_grad(params, x, y).grads;

  const double h = 1e-5;
  double worst = 0.0;
  std::size_t flat = 0;
  auto probe = params;
  std::vector<double> grads;
  auto copy = analytic;
  copy.for_each_value([&](double& v) { grads.push_back(v); });
  probe.for_each_value([&](double& v) {
    const double keep = v;
    v = keep + h;
    const double up = dynens::testing::oracle_loss(probe, x, y);
    v = keep - h;
    const double down = dynens::testing::oracle_loss(probe, x, y);
    v = keep;
    const double fd = (up - down) / (2 * h);
    const double an = grads[flat++];
    const double scale = std::max({std::abs(fd), std::abs(an), 1e-8});
    worst = std::max(worst, std::abs(fd - an) / scale);
  });
  o.require(worst <= 1e-4, "relative error " + std::to_string(worst));

  Matrix inputs(10000, 2);
  for (auto& v : inputs.data()) v = g.uniform(-50, 50);
  const auto pred = forward(params, inputs);
  double worst_sum = 0.0;
  for (std::size_t t = 0; t < pred.rows(); ++t) {
    double s = 0;
    for (double v : pred.row(t)) s += v;
    worst_sum = std::max(worst_sum, std::abs(s - 1.0));
  }
  o.require(worst_sum <= 1e-9, "softmax row sum off by " + std::to_string(worst_sum));
  if (o.pass) {
    std::ostringstream d;
    d << "max rel err " << worst << ", max row-sum err " << worst_sum;
    o.detail = d.str();
  }
  return o;
}

Outcome schedule_values() {
  Outcome o;
  const CyclicCosineSchedule c{1e-3, 200, 10};
  o.require(std::abs(cyclic_cosine_lr(1, c) - 1e-3) <= 1e-15, "cosine t=1");
  o.require(std::abs(cyclic_cosine_lr(11, c) - 5e-4) <= 1e-15, "cosine t=11");
  o.require(std::abs(cyclic_cosine_lr(21, c) - 1e-3) <= 1e-15, "cosine t=21");
  const auto s = StepDecaySchedule::staircase(1e-3, 200);
  o.require(step_decay_lr(50, s) == 1e-3, "step t=50");
  o.require(step_decay_lr(100, s) == 1e-4, "step t=100");
  o.require(step_decay_lr(130, s) == 1e-5, "step t=130");
  o.require(step_decay_lr(170, s) == 1e-6, "step t=170");
  return o;
}

Outcome pruning_algebra() {
  Outcome o;
  const std::vector<double> w{0.9, 0.8, 0.7};
  o.require(prune_threshold(w, 0.0) == 0.9 && prune_threshold(w, 1.0) == 0.7, "threshold endpoints");
  o.require(std::abs(prune_threshold(w, 0.5) - 0.8) <= 1e-15, "threshold at 0.5");
  o.require(pruned_set(w, 0.5) == std::vector<std::size_t>{0, 1}, "kept set at 0.5");
  o.require(std::abs(ideal_beta(w) - 0.5) <= 1e-15, "ideal beta example");
  const std::vector<double> same{0.6, 0.6}, ends{1.0, 0.0};
  o.require(ideal_beta(same) == 0.0 && pruned_set(same, 0.0).size() == 2, "equal accuracies");
  o.require(ideal_beta(ends) == 0.5 && prune_threshold(ends, 0.5) == 0.5, "ideal beta {1, 0}");

  Gen g(6);
  for (int i = 0; i < 1000; ++i) {
    const auto list = g.accuracy_list(g.range(1, 20));
    std::size_t prev = 0;
    for (int k = 0; k <= 10; ++k) {
      const auto kept = pruned_set(list, k / 10.0).size();
      o.require(kept >= prev, "pruned set shrank as beta grew");
      prev = kept;
    }
  }

  const auto& report = default_runs().first->report;
  o.require(report.admission_violations == 0,
            std::to_string(report.admission_violations) + " members admitted below cycle mean");
  std::size_t members = 0;
  for (const auto& cell : default_runs().first->cells) {
    for (const auto& cyc : cell.cycles) {
      if (cell.method != Method::kDynSnapCyc && cell.method != Method::kDynSnapStep) continue;
      for (std::size_t j = 0; j < cyc.admitted; ++j) {
        o.require(cyc.w[j] >= cyc.mean - 1e-12, "admitted member below its cycle mean");
        ++members;
      }
    }
  }
  if (o.pass) o.detail = std::to_string(members) + " admitted members checked";
  return o;
}

Outcome direction_of_effect() {
  Outcome o;
  const auto& runs = default_runs();
  const auto& report = runs.first->report;
  const auto& base = report.get(Method::kSingleBase).get(Combiner::kAVG);
  std::ostringstream d;
  d.precision(4);
  d << "SingleBase con " << base.get("con").mean << " acc_con " << base.get("acc_con").mean;
  for (auto m : {Method::kExtBagging, Method::kDynSnapCyc, Method::kDynSnapStep}) {
    const auto& s = report.get(m).get(Combiner::kAVG);
    d << "; " << to_string(m) << ' ' << s.get("con").mean << ' ' << s.get("acc_con").mean;
    o.require(s.get("con").mean > base.get("con").mean, std::string(to_string(m)) + " CON not above SingleBase");
    o.require(s.get("acc_con").mean > base.get("acc_con").mean,
              std::string(to_string(m)) + " ACC-CON not above SingleBase");
    o.require(report.get(m).failed_cells == 0, std::string(to_string(m)) + " has failed cells");
  }
  const double ratio = report.get(Method::kDynSnapCyc).relative_cost / report.get(Method::kExtBagging).relative_cost;
  d << "; cost ratio " << ratio << "; " << runs.first_seconds << " s";
  o.require(ratio < 0.6, "cost ratio " + std::to_string(ratio));
  o.require(runs.first_seconds < 600.0, "runtime " + std::to_string(runs.first_seconds) + " s");
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto& runs = default_runs();
  o.require(!runs.first_json.empty() && runs.first_json == runs.second_json, "reports differ");
  if (o.pass) o.detail = std::to_string(runs.first_json.size()) + " identical bytes";
  return o;
}

Outcome corollary_checks() {
  Outcome o;
  Gen g(9);
  for (int i = 0; i < 10000; ++i) {
    const auto n = g.range(1, 6), p = g.range(2, 6);
    const auto c = g.prediction_matrix(n, p), cc = g.prediction_matrix(n, p);
    const auto lab = g.labels(n, p);
    CorollaryInputs in;
    in.acc_ensemble = g.uniform();
    in.acc_copy = g.uniform();
    in.acc_subset = g.uniform();
    in.acc_subset_copy = g.uniform();
    in.a = g.uniform();
    in.a_plus = g.uniform(in.a, 1.0);
    const double rho = corollary_rho(c, cc, lab, in).rho;
    o.require(rho >= 0.0 && rho <= 1.0, "rho outside [0, 1]");
    const double b = g.uniform(), bp = g.uniform(b, 1.0), cl = g.uniform(0.0, bp), cp = g.uniform(cl, 1.0);
    o.require(upsilon_term(b, bp, cl, cp) == 0.5, "upsilon != 1/2 with c <= b+");
  }
  const PredictionMatrix one(1, 2, {0.7, 0.3});
  o.require(std::abs(eta(one, LabelVector({0})) - 0.7) <= 1e-12, "eta single row");
  const PredictionMatrix three(3, 3, {0.5, 0.3, 0.2, 0.1, 0.8, 0.1, 0.25, 0.25, 0.5});
  o.require(std::abs(eta(three, LabelVector({0, 1, 2})) - 0.5 * 0.8 * 0.5) <= 1e-12, "eta three rows");
  o.require(std::abs(eta(three, LabelVector({2, 0, 1})) - 0.2 * 0.1 * 0.25) <= 1e-12, "eta permuted labels");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"theorem suite", theorem_suite},
      {"correct-consistency envelope", correct_consistency_envelope},
      {"metric fixture and identities", metric_fixture},
      {"gradient and softmax checks", gradient_check},
      {"schedule values", schedule_values},
      {"pruning algebra and admission", pruning_algebra},
      {"direction of effect", direction_of_effect},
      {"report determinism", determinism},
      {"probability bound pieces", corollary_checks},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += !out.pass;
    std::printf("%s criterion %zu: %s%s%s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                out.detail.empty() ? "" : " -- ", out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
