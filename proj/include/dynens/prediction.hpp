#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dynens/simplex.hpp"

namespace dynens {

/// n x p matrix whose rows are simplex vectors: one trained learner's
/// predictions over a test set. Rows are validated at construction.
class PredictionMatrix {
 public:
  PredictionMatrix(std::size_t n, std::size_t p, std::vector<double> values);

  static PredictionMatrix from_rows(std::span<const SimplexVector> rows);
  /// One-hot rows for the given class indices.
  static PredictionMatrix one_hot(std::span<const std::size_t> classes, std::size_t p);

  std::size_t rows() const noexcept { return n_; }
  std::size_t classes() const noexcept { return p_; }
  std::span<const double> row(std::size_t t) const noexcept { return {values_.data() + t * p_, p_}; }
  SimplexVector row_vector(std::size_t t) const;
  const std::vector<double>& values() const noexcept { return values_; }

  /// Argmax of row t; lowest index wins ties.
  std::size_t argmax(std::size_t t) const noexcept;

  friend bool operator==(const PredictionMatrix&, const PredictionMatrix&) = default;

 private:
  std::size_t n_;
  std::size_t p_;
  std::vector<double> values_;
};

/// Ground-truth class indices, one per test row.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::vector<std::size_t> labels) : labels_(std::move(labels)) {}

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t operator[](std::size_t t) const noexcept { return labels_[t]; }
  std::span<const std::size_t> values() const noexcept { return labels_; }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<std::size_t> labels_;
};

/// Indices of the k largest entries of a row. Larger value first; equal values
/// are ordered by lower index, consistent with argmax tie-breaking.
std::vector<std::size_t> top_k_indices(std::span<const double> row, std::size_t k);

// Text formats. Prediction file: header "n p" then n lines of p decimals.
// Label file: one integer per line.
void write_prediction_matrix(std::ostream& out, const PredictionMatrix& m);
PredictionMatrix read_prediction_matrix(std::istream& in);
void save_prediction_matrix(const std::string& path, const PredictionMatrix& m);
PredictionMatrix load_prediction_matrix(const std::string& path);

void write_labels(std::ostream& out, const LabelVector& labels);
LabelVector read_labels(std::istream& in);
void save_labels(const std::string& path, const LabelVector& labels);
LabelVector load_labels(const std::string& path);

/// "%.17g" formatting; parses back to the identical double.
std::string format_exact(double v);

}  // namespace dynens
