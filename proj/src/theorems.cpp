#include "dynens/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "dynens/metrics.hpp"
#include "dynens/rng.hpp"

namespace dynens {
namespace {

TheoremCheckResult make_result(double lhs, double rhs, double tolerance) {
  TheoremCheckResult r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.holds = r.slack >= -tolerance;
  return r;
}

void require_valid(const EnsemblePairSample& s) {
  if (s.members.empty() || s.members.size() != s.copies.size()) {
    throw std::invalid_argument("ensemble pair sample needs equal, non-empty member lists");
  }
}

void check_accuracy(double acc) {
  if (!(acc >= 0.0 && acc <= 1.0)) throw std::invalid_argument("accuracy must lie in [0, 1]");
}

void require_aligned(const PredictionMatrix& o, const LabelVector& labels) {
  if (o.rows() != labels.size()) throw std::invalid_argument("centroid rows do not match labels");
  for (auto l : labels.values()) {
    if (l >= o.classes()) throw std::invalid_argument("label out of range");
  }
}

}  // namespace

SimplexVector sample_dirichlet(std::size_t p, double concentration, Rng& rng) {
  if (!(concentration > 0.0)) throw std::invalid_argument("Dirichlet concentration must be positive");
  std::vector<double> logs(p);
  for (auto& l : logs) l = rng.log_gamma_variate(concentration);
  const double mx = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (auto& l : logs) {
    l = std::exp(l - mx);
    sum += l;
  }
  for (auto& l : logs) l /= sum;
  return SimplexVector(std::move(logs));
}

EnsemblePairSample sample_ensemble_pair(std::size_t m, std::size_t p, double concentration,
                                        std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample needs m >= 1");
  if (p < 2) throw std::invalid_argument("sample needs p >= 2");
  Rng rng(seed);
  Rng member_rng = rng.split(1);
  Rng copy_rng = rng.split(2);
  Rng truth_rng = rng.split(3);
  EnsemblePairSample s{{}, {}, SimplexVector::one_hot(p, truth_rng.uniform_index(p))};
  s.members.reserve(m);
  s.copies.reserve(m);
  for (std::size_t j = 0; j < m; ++j) s.members.push_back(sample_dirichlet(p, concentration, member_rng));
  for (std::size_t j = 0; j < m; ++j) s.copies.push_back(sample_dirichlet(p, concentration, copy_rng));
  return s;
}

std::vector<SimplexVector> leave_one_out_centroids(std::span<const SimplexVector> vectors) {
  if (vectors.size() < 2) throw std::invalid_argument("leave-one-out needs m >= 2");
  std::vector<SimplexVector> out;
  out.reserve(vectors.size());
  std::vector<SimplexVector> subset;
  subset.reserve(vectors.size() - 1);
  for (std::size_t l = 0; l < vectors.size(); ++l) {
    subset.clear();
    for (std::size_t j = 0; j < vectors.size(); ++j) {
      if (j != l) subset.push_back(vectors[j]);
    }
    out.push_back(centroid(subset));
  }
  return out;
}

TheoremCheckResult check_theorem_1(const EnsemblePairSample& s, MinkowskiOrder q, double tol) {
  require_valid(s);
  const double lhs = minkowski_distance(centroid(s.members), centroid(s.copies), q);
  double rhs = 0.0;
  for (std::size_t j = 0; j < s.members.size(); ++j) rhs += minkowski_distance(s.members[j], s.copies[j], q);
  rhs /= static_cast<double>(s.members.size());
  return make_result(lhs, rhs, tol);
}

TheoremCheckResult check_theorem_2(const EnsemblePairSample& s, MinkowskiOrder q, double tol) {
  require_valid(s);
  const auto loo = leave_one_out_centroids(s.members);
  const auto loo_copy = leave_one_out_centroids(s.copies);
  const double lhs = minkowski_distance(centroid(s.members), centroid(s.copies), q);
  double rhs = 0.0;
  for (std::size_t l = 0; l < loo.size(); ++l) rhs += minkowski_distance(loo[l], loo_copy[l], q);
  rhs /= static_cast<double>(loo.size());
  return make_result(lhs, rhs, tol);
}

TheoremCheckResult check_theorem_3(const EnsemblePairSample& s, MinkowskiOrder q, double tol) {
  require_valid(s);
  const double lhs = triple_distance(centroid(s.members), centroid(s.copies), s.truth, q);
  double rhs = 0.0;
  for (std::size_t j = 0; j < s.members.size(); ++j) {
    rhs += triple_distance(s.members[j], s.copies[j], s.truth, q);
  }
  rhs /= static_cast<double>(s.members.size());
  return make_result(lhs, rhs, tol);
}

TheoremCheckResult check_theorem_4(const EnsemblePairSample& s, MinkowskiOrder q, double tol) {
  require_valid(s);
  const auto loo = leave_one_out_centroids(s.members);
  const auto loo_copy = leave_one_out_centroids(s.copies);
  const double lhs = triple_distance(centroid(s.members), centroid(s.copies), s.truth, q);
  double rhs = 0.0;
  for (std::size_t l = 0; l < loo.size(); ++l) rhs += triple_distance(loo[l], loo_copy[l], s.truth, q);
  rhs /= static_cast<double>(loo.size());
  return make_result(lhs, rhs, tol);
}

CorrectConsistencyBounds theorem5_bounds(double acc_a, double acc_b) {
  check_accuracy(acc_a);
  check_accuracy(acc_b);
  return {std::max(acc_a + acc_b - 1.0, 0.0), std::min(acc_a, acc_b)};
}

Theorem5Enumeration enumerate_theorem5(std::size_t n, double tolerance) {
  if (n == 0 || n > 16) throw std::invalid_argument("enumeration supports 1 <= n <= 16");
  // Labels alternate between the two classes so both argmax directions are used.
  std::vector<std::size_t> label_values(n);
  for (std::size_t t = 0; t < n; ++t) label_values[t] = t % 2;
  const LabelVector labels(label_values);

  const std::uint64_t patterns = std::uint64_t{1} << n;
  std::vector<PredictionMatrix> matrices;
  std::vector<double> accs;
  matrices.reserve(patterns);
  accs.reserve(patterns);
  std::vector<std::size_t> predicted(n);
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    for (std::size_t t = 0; t < n; ++t) {
      const bool correct = (mask >> t) & 1U;
      predicted[t] = correct ? label_values[t] : 1 - label_values[t];
    }
    // Non-one-hot rows so argmax goes through real comparisons.
    std::vector<double> values(n * 2);
    for (std::size_t t = 0; t < n; ++t) {
      values[t * 2 + predicted[t]] = 0.75;
      values[t * 2 + 1 - predicted[t]] = 0.25;
    }
    matrices.emplace_back(n, 2, std::move(values));
    accs.push_back(accuracy(matrices.back(), labels));
  }

  Theorem5Enumeration out;
  out.n = n;
  out.worst_slack = std::numeric_limits<double>::infinity();
  for (std::uint64_t a = 0; a < patterns; ++a) {
    for (std::uint64_t b = 0; b < patterns; ++b) {
      const double ccon = correct_consistency(matrices[a], matrices[b], labels);
      const auto bounds = theorem5_bounds(accs[a], accs[b]);
      const double slack = std::min(ccon - bounds.lower, bounds.upper - ccon);
      out.worst_slack = std::min(out.worst_slack, slack);
      if (slack < -tolerance) ++out.violations;
      ++out.pairs_checked;
    }
  }
  return out;
}

double eta(const PredictionMatrix& o, const LabelVector& labels) {
  require_aligned(o, labels);
  double prod = 1.0;
  for (std::size_t t = 0; t < o.rows(); ++t) prod *= o.row(t)[labels[t]];
  return prod;
}

double eta_bar(const PredictionMatrix& o, const LabelVector& labels) {
  require_aligned(o, labels);
  double prod = 1.0;
  for (std::size_t t = 0; t < o.rows(); ++t) prod *= 1.0 - o.row(t)[labels[t]];
  return prod;
}

double epsilon_term(double a, double a_plus) {
  check_accuracy(a);
  check_accuracy(a_plus);
  if (a >= 1.0) return 1.0;
  const double e = (a_plus - a) / (1.0 - a) + 0.5 * (1.0 - a_plus) / (1.0 - a);
  return std::clamp(e, 0.0, 1.0);
}

double upsilon_term(double b, double b_plus, double c, double c_plus) {
  if (c <= b_plus || c <= b || c_plus <= b_plus) return 0.5;
  const double u = 0.5 + 0.5 * ((b_plus - b) / (c - b) + (c_plus - c) / (c_plus - b_plus)) +
                   0.25 * ((c - b_plus) / (c - b) * (c - b_plus) / (c_plus - b_plus));
  return std::clamp(u, 0.0, 1.0);
}

CorollaryTerms corollary_rho(const PredictionMatrix& centroids,
                             const PredictionMatrix& copy_centroids, const LabelVector& labels,
                             const CorollaryInputs& in) {
  const auto full = theorem5_bounds(in.acc_ensemble, in.acc_copy);
  const auto subset = theorem5_bounds(in.acc_subset, in.acc_subset_copy);
  CorollaryTerms t;
  t.eta = eta(centroids, labels);
  t.eta_copy = eta(copy_centroids, labels);
  t.epsilon = epsilon_term(in.a, in.a_plus);
  t.epsilon_copy = epsilon_term(in.a_copy.value_or(in.a), in.a_plus_copy.value_or(in.a_plus));
  t.upsilon = upsilon_term(subset.lower, full.lower, subset.upper, full.upper);
  t.rho = std::clamp(t.eta * t.eta_copy * t.epsilon * t.epsilon_copy * t.upsilon, 0.0, 1.0);
  return t;
}

std::size_t slack_bin(double slack, double tolerance) {
  if (slack < -tolerance) return 0;
  if (slack < 0.0) return 1;
  if (slack == 0.0) return 2;
  if (slack < 1e-12) return 3;
  static constexpr std::array<double, 7> edges{1e-9, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (slack < edges[i]) return 4 + i;
  }
  return kSlackBins - 1;
}

std::uint64_t SuiteReport::total_violations() const {
  std::uint64_t v = 0;
  for (const auto& per_q : stats) {
    for (const auto& s : per_q) v += s.violations;
  }
  return v;
}

SuiteReport monte_carlo_suite(const SuiteConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("suite needs at least one trial");
  if (cfg.m_min < 2 || cfg.m_max < cfg.m_min) throw std::invalid_argument("invalid m range");
  if (cfg.p_min < 2 || cfg.p_max < cfg.p_min) throw std::invalid_argument("invalid p range");
  if (cfg.concentrations.empty() || cfg.q_list.empty()) {
    throw std::invalid_argument("suite needs concentrations and Minkowski orders");
  }
  std::vector<MinkowskiOrder> orders;
  for (double q : cfg.q_list) orders.emplace_back(q);

  using PerQ = std::array<TheoremStats, 4>;
  auto empty_stats = [&] {
    std::vector<PerQ> s(orders.size());
    for (auto& per_q : s) {
      for (auto& st : per_q) st.min_slack = std::numeric_limits<double>::infinity();
    }
    return s;
  };

  auto run_range = [&](std::size_t begin, std::size_t end, std::vector<PerQ>& stats) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng trial(derive_seed({cfg.seed, i}));
      const std::size_t m = cfg.m_min + trial.uniform_index(cfg.m_max - cfg.m_min + 1);
      const std::size_t p = cfg.p_min + trial.uniform_index(cfg.p_max - cfg.p_min + 1);
      const double conc = cfg.concentrations[i % cfg.concentrations.size()];
      auto sample = sample_ensemble_pair(m, p, conc, trial.next_u64());
      if (cfg.identical_copies) sample.copies = sample.members;
      for (std::size_t qi = 0; qi < orders.size(); ++qi) {
        const std::array<TheoremCheckResult, 4> results{
            check_theorem_1(sample, orders[qi], cfg.tolerance),
            check_theorem_2(sample, orders[qi], cfg.tolerance),
            check_theorem_3(sample, orders[qi], cfg.tolerance),
            check_theorem_4(sample, orders[qi], cfg.tolerance)};
        for (std::size_t th = 0; th < 4; ++th) {
          auto& st = stats[qi][th];
          ++st.checks;
          st.violations += !results[th].holds;
          st.min_slack = std::min(st.min_slack, results[th].slack);
          ++st.histogram[slack_bin(results[th].slack, cfg.tolerance)];
        }
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, cfg.trials);
  std::vector<std::vector<PerQ>> partial(workers, empty_stats());
  if (workers == 1) {
    run_range(0, cfg.trials, partial[0]);
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (cfg.trials + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = std::min(cfg.trials, w * chunk);
      const std::size_t e = std::min(cfg.trials, b + chunk);
      threads.emplace_back([&, w, b, e] { run_range(b, e, partial[w]); });
    }
    for (auto& t : threads) t.join();
  }

  SuiteReport report;
  report.config = cfg;
  report.stats = empty_stats();
  for (const auto& part : partial) {
    for (std::size_t qi = 0; qi < orders.size(); ++qi) {
      for (std::size_t th = 0; th < 4; ++th) {
        auto& dst = report.stats[qi][th];
        const auto& src = part[qi][th];
        dst.checks += src.checks;
        dst.violations += src.violations;
        dst.min_slack = std::min(dst.min_slack, src.min_slack);
        for (std::size_t b = 0; b < kSlackBins; ++b) dst.histogram[b] += src.histogram[b];
      }
    }
  }
  return report;
}

}  // namespace dynens
