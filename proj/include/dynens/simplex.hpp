#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dynens {

/// Absolute tolerance for the sum-to-one check and for one-hot detection.
inline constexpr double kSimplexTolerance = 1e-9;

/// A point on the (p-1)-simplex: p >= 2 non-negative entries summing to 1.
/// Validated once at construction; operations assume the invariant.
class SimplexVector {
 public:
  explicit SimplexVector(std::vector<double> values);

  static SimplexVector one_hot(std::size_t p, std::size_t index);
  static SimplexVector uniform(std::size_t p);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  std::span<const double> values() const noexcept { return values_; }

  /// True when one entry is within kSimplexTolerance of 1.
  bool is_one_hot() const noexcept;
  /// Index of the largest entry; lowest index wins ties.
  std::size_t argmax() const noexcept;

  friend bool operator==(const SimplexVector&, const SimplexVector&) = default;

 private:
  std::vector<double> values_;
};

/// Order q >= 1 of a Minkowski distance. q = 2 is Euclidean.
class MinkowskiOrder {
 public:
  explicit MinkowskiOrder(double q);
  static MinkowskiOrder euclidean() { return MinkowskiOrder(2.0); }
  double value() const noexcept { return q_; }

 private:
  double q_;
};

double euclidean_distance(const SimplexVector& a, const SimplexVector& b);
double minkowski_distance(const SimplexVector& a, const SimplexVector& b, MinkowskiOrder q);

/// d(s, s_copy) + d(s, truth) + d(s_copy, truth). truth must be one-hot.
double triple_distance(const SimplexVector& s, const SimplexVector& s_copy,
                       const SimplexVector& truth,
                       MinkowskiOrder q = MinkowskiOrder::euclidean());

/// Componentwise mean.
SimplexVector centroid(std::span<const SimplexVector> vectors);

/// sum(w_j * s_j) / sum(w_j). Weights must be non-negative with a positive sum.
SimplexVector weighted_centroid(std::span<const SimplexVector> vectors,
                                std::span<const double> weights);

/// (sqrt(2) - d(s, truth)) / sqrt(2): 1 at the truth, 0 at the far vertex.
double correctness_sim(const SimplexVector& s, const SimplexVector& truth);

}  // namespace dynens
