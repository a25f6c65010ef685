#include "dynens/simplex.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dynens {
namespace {

void require_same_size(const SimplexVector& a, const SimplexVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("simplex dimension mismatch: " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  }
}

void require_one_hot(const SimplexVector& r) {
  if (!r.is_one_hot()) throw std::invalid_argument("ground truth vector is not one-hot");
}

}  // namespace

SimplexVector::SimplexVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw std::invalid_argument("simplex vector needs p >= 2 entries");
  double sum = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < -kSimplexTolerance || v > 1.0 + kSimplexTolerance) {
      throw std::invalid_argument("simplex entry outside [0, 1]: " + std::to_string(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("simplex entries sum to " + std::to_string(sum));
  }
}

SimplexVector SimplexVector::one_hot(std::size_t p, std::size_t index) {
  if (index >= p) throw std::invalid_argument("one-hot index out of range");
  std::vector<double> v(p, 0.0);
  v[index] = 1.0;
  return SimplexVector(std::move(v));
}

SimplexVector SimplexVector::uniform(std::size_t p) {
  return SimplexVector(std::vector<double>(p, 1.0 / static_cast<double>(p)));
}

bool SimplexVector::is_one_hot() const noexcept {
  for (double v : values_) {
    if (std::abs(v - 1.0) <= kSimplexTolerance) return true;
  }
  return false;
}

std::size_t SimplexVector::argmax() const noexcept {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values_.size(); ++k) {
    if (values_[k] > values_[best]) best = k;
  }
  return best;
}

MinkowskiOrder::MinkowskiOrder(double q) : q_(q) {
  if (!(q >= 1.0) || !std::isfinite(q)) {
    throw std::invalid_argument("Minkowski order must be a finite q >= 1");
  }
}

double euclidean_distance(const SimplexVector& a, const SimplexVector& b) {
  require_same_size(a, b);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double minkowski_distance(const SimplexVector& a, const SimplexVector& b, MinkowskiOrder order) {
  const double q = order.value();
  if (q == 2.0) return euclidean_distance(a, b);
  require_same_size(a, b);
  double sum = 0.0;
  if (q == 1.0) {
    for (std::size_t k = 0; k < a.size(); ++k) sum += std::abs(a[k] - b[k]);
    return sum;
  }
  for (std::size_t k = 0; k < a.size(); ++k) sum += std::pow(std::abs(a[k] - b[k]), q);
  return std::pow(sum, 1.0 / q);
}

double triple_distance(const SimplexVector& s, const SimplexVector& s_copy,
                       const SimplexVector& truth, MinkowskiOrder q) {
  require_same_size(s, s_copy);
  require_same_size(s, truth);
  require_one_hot(truth);
  return minkowski_distance(s, s_copy, q) + minkowski_distance(s, truth, q) +
         minkowski_distance(s_copy, truth, q);
}

SimplexVector centroid(std::span<const SimplexVector> vectors) {
  if (vectors.empty()) throw std::invalid_argument("centroid of an empty set");
  const std::size_t p = vectors.front().size();
  std::vector<double> sum(p, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != p) throw std::invalid_argument("centroid: dimension mismatch");
    for (std::size_t k = 0; k < p; ++k) sum[k] += v[k];
  }
  const double m = static_cast<double>(vectors.size());
  for (double& x : sum) x /= m;
  return SimplexVector(std::move(sum));
}

SimplexVector weighted_centroid(std::span<const SimplexVector> vectors,
                                std::span<const double> weights) {
  if (vectors.empty()) throw std::invalid_argument("weighted centroid of an empty set");
  if (vectors.size() != weights.size()) {
    throw std::invalid_argument("weighted centroid: weight count does not match vector count");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weights must be non-negative");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("weights sum to zero");

  const std::size_t p = vectors.front().size();
  std::vector<double> sum(p, 0.0);
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != p) throw std::invalid_argument("weighted centroid: dimension mismatch");
    for (std::size_t k = 0; k < p; ++k) sum[k] += weights[j] * vectors[j][k];
  }
  for (double& x : sum) x /= total;
  return SimplexVector(std::move(sum));
}

double correctness_sim(const SimplexVector& s, const SimplexVector& truth) {
  require_one_hot(truth);
  return (std::numbers::sqrt2 - euclidean_distance(s, truth)) / std::numbers::sqrt2;
}

}  // namespace dynens
