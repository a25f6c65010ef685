#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "dynens/prediction.hpp"

namespace dynens {

// Agreement metrics between two trained learners' predictions on a shared
// test set. Every function compares rows by argmax (lowest index on ties) or
// by top-k index sets, and throws std::invalid_argument on shape mismatch.

/// Fraction of rows with the same predicted class.
double consistency(const PredictionMatrix& a, const PredictionMatrix& b);
/// Fraction of rows whose predicted class equals the label.
double accuracy(const PredictionMatrix& a, const LabelVector& r);
/// Fraction of rows where both learners predict the label.
double correct_consistency(const PredictionMatrix& a, const PredictionMatrix& b,
                           const LabelVector& r);
/// Fraction of rows whose top-k class sets intersect. k = 1 is consistency().
double coarse_consistency(const PredictionMatrix& a, const PredictionMatrix& b, std::size_t k);
/// Fraction of rows whose label is among the top-k classes. k = 1 is accuracy().
double coarse_accuracy(const PredictionMatrix& a, const LabelVector& r, std::size_t k);

/// Mean over rows of the Pearson correlation of the two probability vectors.
/// A constant row contributes 1 if the other row is identical to it, else 0.
double pearson_similarity(const PredictionMatrix& a, const PredictionMatrix& b);
/// Mean over rows of the cosine of the angle between the two vectors.
double cosine_similarity(const PredictionMatrix& a, const PredictionMatrix& b);

/// Correctness transitions from learner a (earlier) to learner b (later).
struct TransitionStats {
  double cto_c = 0.0;
  double cto_i = 0.0;
  double ito_c = 0.0;
  double ito_i = 0.0;
  double com = 0.0;  ///< cto_c + ito_c - cto_i
};

TransitionStats transition_stats(const PredictionMatrix& a, const PredictionMatrix& b,
                                 const LabelVector& r);

/// All pairwise metrics for one ordered pair of learners.
struct PairReport {
  double con = 0.0;
  double acc_a = 0.0;
  double acc_b = 0.0;
  double acc_con = 0.0;
  std::map<std::size_t, double> ccon_k;
  std::map<std::size_t, double> cacc_k_a;
  std::map<std::size_t, double> cacc_k_b;
  double pearson = 0.0;
  double cosine = 0.0;
  TransitionStats transitions;
};

PairReport pair_report(const PredictionMatrix& a, const PredictionMatrix& b, const LabelVector& r,
                       std::span<const std::size_t> ks);

/// Three-generation averages: ACC over the three learners, agreement metrics
/// over the unordered pairs (1,2), (2,3), (1,3), transitions per ordered pair.
struct AveragedReport {
  std::array<double, 3> acc_each{};
  double acc = 0.0;
  double con = 0.0;
  double acc_con = 0.0;
  std::map<std::size_t, double> ccon_k;
  std::map<std::size_t, double> cacc_k;
  double pearson = 0.0;
  double cosine = 0.0;
  /// Ordered pairs 1->2, 2->3, 1->3.
  std::array<TransitionStats, 3> transitions{};
};

inline constexpr std::array<std::array<std::size_t, 2>, 3> kStagePairs{{{0, 1}, {1, 2}, {0, 2}}};

AveragedReport pairwise_average_report(std::span<const PredictionMatrix> matrices,
                                       const LabelVector& r, std::span<const std::size_t> ks);

/// Sum with a fixed pairwise reduction tree; bit-stable for a given length.
double pairwise_sum(std::span<const double> values);

}  // namespace dynens
