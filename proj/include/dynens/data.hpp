#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dynens/matrix.hpp"
#include "dynens/prediction.hpp"

namespace dynens {

/// Features, labels, and a stable id per row. Ids identify rows across
/// subsets so nesting can be checked by identity rather than by value.
struct LabeledDataset {
  Matrix features;
  std::vector<std::size_t> labels;
  std::vector<std::uint64_t> row_ids;
  std::size_t class_count = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dims() const noexcept { return features.cols(); }
  LabelVector label_vector() const { return LabelVector(labels); }
  std::vector<std::size_t> class_counts() const;

  /// Rows at the given positions, in that order.
  LabeledDataset subset(const std::vector<std::size_t>& positions) const;
  /// Throws std::invalid_argument if shapes or labels are inconsistent.
  void validate() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// Gaussian clusters with unit variance. For dims >= classes the class means
/// sit on scaled coordinate axes, pairwise exactly `separation` apart;
/// otherwise they are random directions of norm separation / sqrt(2).
LabeledDataset make_synthetic(std::size_t classes, std::size_t dims, std::size_t per_class,
                              double separation, std::uint64_t seed);

/// Class-imbalance recipe for three nested training stages.
struct ImbalanceSpec {
  /// Keep fraction per class, each in (0, 1].
  std::vector<double> keep_fractions;
  /// Classes present in each stage; stage sets must be nested.
  std::array<std::vector<std::size_t>, 3> stage_classes;
  /// Growth multiplier per stage; non-decreasing.
  std::array<double, 3> growth{0.8, 1.0, 1.0};
  /// Rows per class reserved for validation and, separately, for test. Only
  /// classes present in the first stage get evaluation rows.
  std::size_t eval_per_class = 0;

  /// All classes but `held_out` in stages 1 and 2, all classes in stage 3,
  /// growth (0.8, 1.0, 1.0).
  static ImbalanceSpec held_out_class(std::vector<double> keep_fractions, std::size_t held_out,
                                      std::size_t eval_per_class);
  void validate(std::size_t class_count) const;
};

/// D1 subset-of D2 subset-of D3 plus validation and test splits disjoint from
/// every stage.
struct StreamDataset {
  std::array<LabeledDataset, 3> stages;
  LabeledDataset validation;
  LabeledDataset test;
};

/// Builds the nested stages. Per class, evaluation rows are reserved first;
/// stage s then takes the first round_half_up(g_s * P_c * pool_c) rows of the
/// remaining shuffled pool, so later stages extend earlier ones.
StreamDataset make_stream(const LabeledDataset& full, const ImbalanceSpec& spec, std::uint64_t seed);

/// Stratified split into (train, valid). Each class contributes
/// round_half_up(fraction * n_c) validation rows, clamped to [1, n_c - 1].
/// The train part is shuffled.
std::pair<LabeledDataset, LabeledDataset> resample_train_valid(const LabeledDataset& data,
                                                               double valid_fraction,
                                                               std::uint64_t seed);

std::size_t round_half_up(double x);

// CSV: first line "d k", then rows "f1,...,fd,label".
void write_csv(std::ostream& out, const LabeledDataset& data);
LabeledDataset read_csv(std::istream& in);
void save_csv(const std::string& path, const LabeledDataset& data);
LabeledDataset load_csv(const std::string& path);

/// Writes d1.csv, d2.csv, d3.csv, validation.csv, test.csv and a manifest
/// (stream.manifest) naming them into `dir`. Returns the manifest path.
std::string save_stream(const std::string& dir, const StreamDataset& stream);
StreamDataset load_stream(const std::string& manifest_path);

}  // namespace dynens
