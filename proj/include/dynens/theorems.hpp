#pragma once

// Monte Carlo verification of the ensemble distance inequalities and the
// correct-consistency bounds, plus the probability lower bound for adding an
// above-average member.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dynens/prediction.hpp"
#include "dynens/rng.hpp"
#include "dynens/simplex.hpp"

namespace dynens {

inline constexpr double kTheoremTolerance = 1e-9;

/// m member predictions, their retrained copies, and the one-hot truth for a
/// single test input.
struct EnsemblePairSample {
  std::vector<SimplexVector> members;
  std::vector<SimplexVector> copies;
  SimplexVector truth;
};

/// Members and copies drawn independently from a symmetric Dirichlet with the
/// given concentration; truth is a uniformly random vertex.
EnsemblePairSample sample_ensemble_pair(std::size_t m, std::size_t p, double concentration,
                                        std::uint64_t seed);

/// Symmetric Dirichlet draw via normalized log-Gamma variates.
SimplexVector sample_dirichlet(std::size_t p, double concentration, Rng& rng);

struct TheoremCheckResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< rhs - lhs
  bool holds = true;   ///< slack >= -tolerance
};

/// d(o, o~) <= mean_j d(s_j, s~_j), with d the order-q Minkowski distance.
TheoremCheckResult check_theorem_1(const EnsemblePairSample& sample,
                                   MinkowskiOrder q = MinkowskiOrder::euclidean(),
                                   double tolerance = kTheoremTolerance);
/// d(o, o~) <= mean_l d(o_l, o~_l) over the m leave-one-out centroids.
TheoremCheckResult check_theorem_2(const EnsemblePairSample& sample,
                                   MinkowskiOrder q = MinkowskiOrder::euclidean(),
                                   double tolerance = kTheoremTolerance);
/// Triple distance including the truth: D(o, o~, r) <= mean_j D(s_j, s~_j, r).
TheoremCheckResult check_theorem_3(const EnsemblePairSample& sample,
                                   MinkowskiOrder q = MinkowskiOrder::euclidean(),
                                   double tolerance = kTheoremTolerance);
/// Leave-one-out version of check_theorem_3.
TheoremCheckResult check_theorem_4(const EnsemblePairSample& sample,
                                   MinkowskiOrder q = MinkowskiOrder::euclidean(),
                                   double tolerance = kTheoremTolerance);

/// Centroids of the m subsets that each drop one member. Requires m >= 2.
std::vector<SimplexVector> leave_one_out_centroids(std::span<const SimplexVector> vectors);

struct CorrectConsistencyBounds {
  double lower = 0.0;  ///< max(acc_a + acc_b - 1, 0)
  double upper = 0.0;  ///< min(acc_a, acc_b)
};

CorrectConsistencyBounds theorem5_bounds(double acc_a, double acc_b);

/// Result of checking the correct-consistency envelope on every pair of
/// correctness patterns over n test rows.
struct Theorem5Enumeration {
  std::size_t n = 0;
  std::uint64_t pairs_checked = 0;
  std::uint64_t violations = 0;
  double worst_slack = 0.0;  ///< most negative distance to either bound
};

/// Exhaustive check over all 2^n x 2^n correctness patterns, evaluated
/// through the metric functions. Practical for n <= 12.
Theorem5Enumeration enumerate_theorem5(std::size_t n, double tolerance = 1e-12);

// Probability lower bound pieces.

/// Product over rows of the probability assigned to the true class.
double eta(const PredictionMatrix& centroids, const LabelVector& labels);
/// Product over rows of one minus the true-class probability.
double eta_bar(const PredictionMatrix& centroids, const LabelVector& labels);
/// (a+ - a)/(1 - a) + (1 - a+)/(2 (1 - a)); 1 when a = 1. Clamped to [0, 1].
double epsilon_term(double a, double a_plus);
/// 1/2 when c <= b+ (or an interval collapses); otherwise the summed
/// expression over the interval overlaps, clamped to [0, 1].
double upsilon_term(double b, double b_plus, double c, double c_plus);

struct CorollaryInputs {
  double acc_ensemble = 0.0;         ///< acc of the full ensemble
  double acc_copy = 0.0;             ///< acc of the retrained full ensemble
  double acc_subset = 0.0;           ///< acc of the ensemble without member l
  double acc_subset_copy = 0.0;      ///< same for the retrained copy
  double a = 0.0;                    ///< mean member accuracy over the subset
  double a_plus = 0.0;               ///< mean member accuracy over all members
  std::optional<double> a_copy;      ///< copy-side a; defaults to a
  std::optional<double> a_plus_copy; ///< copy-side a+; defaults to a_plus
};

struct CorollaryTerms {
  double eta = 0.0;
  double eta_copy = 0.0;
  double epsilon = 0.0;
  double epsilon_copy = 0.0;
  double upsilon = 0.0;
  double rho = 0.0;
};

CorollaryTerms corollary_rho(const PredictionMatrix& centroids,
                             const PredictionMatrix& copy_centroids, const LabelVector& labels,
                             const CorollaryInputs& inputs);

// Suite.

struct SuiteConfig {
  std::size_t trials = 1000;
  std::size_t m_min = 2, m_max = 8;
  std::size_t p_min = 2, p_max = 10;
  std::vector<double> concentrations{0.1, 1.0, 10.0};
  std::vector<double> q_list{2.0};
  std::uint64_t seed = 0;
  /// Copies equal to members; every Theorem-1 slack is then exactly zero.
  bool identical_copies = false;
  double tolerance = kTheoremTolerance;
  std::size_t workers = 1;
};

/// Slack histogram bins: below -tolerance, [-tol, 0), exactly 0, (0, 1e-12),
/// [1e-12, 1e-9), [1e-9, 1e-6), [1e-6, 1e-4), then decades up to 1, and [1, inf).
inline constexpr std::size_t kSlackBins = 12;

struct TheoremStats {
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
  double min_slack = 0.0;
  std::array<std::uint64_t, kSlackBins> histogram{};
};

struct SuiteReport {
  SuiteConfig config;
  /// stats[q_index][theorem - 1]
  std::vector<std::array<TheoremStats, 4>> stats;
  std::uint64_t total_violations() const;
};

/// Runs all four inequality checks for every q on independently seeded
/// samples. Trial i uses its own stream derived from (seed, i), so the report
/// does not depend on the worker count.
SuiteReport monte_carlo_suite(const SuiteConfig& config);

std::size_t slack_bin(double slack, double tolerance);

}  // namespace dynens
