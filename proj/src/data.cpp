#include "dynens/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "dynens/errors.hpp"
#include "dynens/rng.hpp"
#include "text_util.hpp"

namespace dynens {

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(class_count, 0);
  for (auto l : labels) ++counts.at(l);
  return counts;
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& positions) const {
  LabeledDataset out;
  out.class_count = class_count;
  out.features = Matrix(positions.size(), dims());
  out.labels.reserve(positions.size());
  out.row_ids.reserve(positions.size());
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const auto src = features.row(positions.at(k));
    std::copy(src.begin(), src.end(), out.features.row(k).begin());
    out.labels.push_back(labels[positions[k]]);
    out.row_ids.push_back(row_ids[positions[k]]);
  }
  return out;
}

void LabeledDataset::validate() const {
  if (class_count < 2) throw std::invalid_argument("dataset needs at least two classes");
  if (features.rows() != labels.size() || row_ids.size() != labels.size()) {
    throw std::invalid_argument("dataset features, labels and ids differ in length");
  }
  for (auto l : labels) {
    if (l >= class_count) throw std::invalid_argument("label out of range");
  }
}

std::size_t round_half_up(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("count must be non-negative");
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

LabeledDataset make_synthetic(std::size_t classes, std::size_t dims, std::size_t per_class,
                              double separation, std::uint64_t seed) {
  if (classes < 2) throw std::invalid_argument("synthetic data needs at least two classes");
  if (dims == 0) throw std::invalid_argument("synthetic data needs dims >= 1");
  if (per_class == 0) throw std::invalid_argument("synthetic data needs per_class >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw std::invalid_argument("separation must be non-negative");
  }
  Rng rng(derive_seed({seed, 0x5e7ULL}));
  const double radius = separation / std::sqrt(2.0);
  Matrix means(classes, dims);
  for (std::size_t c = 0; c < classes; ++c) {
    if (dims >= classes) {
      means(c, c) = radius;
      continue;
    }
    double norm = 0.0;
    while (norm == 0.0) {
      for (std::size_t i = 0; i < dims; ++i) {
        means(c, i) = rng.normal();
        norm += means(c, i) * means(c, i);
      }
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dims; ++i) means(c, i) *= radius / norm;
  }

  const auto n = classes * per_class;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());

  LabeledDataset out;
  out.class_count = classes;
  out.features = Matrix(n, dims);
  out.labels.resize(n);
  out.row_ids.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto c = order[k] / per_class;
    out.labels[k] = c;
    out.row_ids[k] = k;
    for (std::size_t i = 0; i < dims; ++i) out.features(k, i) = means(c, i) + rng.normal();
  }
  return out;
}

ImbalanceSpec ImbalanceSpec::held_out_class(std::vector<double> keep_fractions,
                                            std::size_t held_out, std::size_t eval_per_class) {
  ImbalanceSpec s;
  const auto k = keep_fractions.size();
  if (held_out >= k) throw std::invalid_argument("held-out class out of range");
  s.keep_fractions = std::move(keep_fractions);
  for (std::size_t c = 0; c < k; ++c) {
    if (c != held_out) {
      s.stage_classes[0].push_back(c);
      s.stage_classes[1].push_back(c);
    }
    s.stage_classes[2].push_back(c);
  }
  s.eval_per_class = eval_per_class;
  return s;
}

void ImbalanceSpec::validate(std::size_t class_count) const {
  if (keep_fractions.size() != class_count) {
    throw std::invalid_argument("need one keep fraction per class (" +
                                std::to_string(class_count) + "), got " +
                                std::to_string(keep_fractions.size()));
  }
  for (double p : keep_fractions) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("keep fractions must lie in (0, 1]");
  }
  for (std::size_t s = 0; s < 3; ++s) {
    if (stage_classes[s].empty()) throw std::invalid_argument("every stage needs a class");
    for (auto c : stage_classes[s]) {
      if (c >= class_count) throw std::invalid_argument("stage class out of range");
    }
    if (!(growth[s] > 0.0) || !std::isfinite(growth[s])) {
      throw std::invalid_argument("growth fractions must be positive");
    }
    if (s > 0) {
      if (growth[s] < growth[s - 1]) throw std::invalid_argument("growth must be non-decreasing");
      for (auto c : stage_classes[s - 1]) {
        if (std::find(stage_classes[s].begin(), stage_classes[s].end(), c) ==
            stage_classes[s].end()) {
          throw std::invalid_argument("stage class sets must be nested");
        }
      }
    }
  }
}

StreamDataset make_stream(const LabeledDataset& full, const ImbalanceSpec& spec, std::uint64_t seed) {
  full.validate();
  spec.validate(full.class_count);
  const auto k = full.class_count;
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t r = 0; r < full.size(); ++r) by_class[full.labels[r]].push_back(r);

  auto in_stage = [&](std::size_t s, std::size_t c) {
    const auto& v = spec.stage_classes[s];
    return std::find(v.begin(), v.end(), c) != v.end();
  };

  std::array<std::vector<std::size_t>, 3> stage_rows;
  std::vector<std::size_t> valid_rows, test_rows;
  for (std::size_t c = 0; c < k; ++c) {
    auto rows = by_class[c];
    Rng rng(derive_seed({seed, c}));
    rng.shuffle(rows.begin(), rows.end());
    std::size_t offset = 0;
    if (in_stage(0, c)) {
      const auto e = spec.eval_per_class;
      if (rows.size() < 2 * e) {
        throw std::invalid_argument("class " + std::to_string(c) + " has " +
                                    std::to_string(rows.size()) +
                                    " rows, fewer than the evaluation reserve");
      }
      valid_rows.insert(valid_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(e));
      test_rows.insert(test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(e),
                       rows.begin() + static_cast<std::ptrdiff_t>(2 * e));
      offset = 2 * e;
    }
    const auto pool = rows.size() - offset;
    for (std::size_t s = 0; s < 3; ++s) {
      if (!in_stage(s, c)) continue;
      const auto count =
          round_half_up(spec.growth[s] * spec.keep_fractions[c] * static_cast<double>(pool));
      if (count > pool) {
        throw std::invalid_argument("class " + std::to_string(c) + " needs " +
                                    std::to_string(count) + " rows in stage " +
                                    std::to_string(s + 1) + " but only " + std::to_string(pool) +
                                    " remain");
      }
      stage_rows[s].insert(stage_rows[s].end(), rows.begin() + static_cast<std::ptrdiff_t>(offset),
                           rows.begin() + static_cast<std::ptrdiff_t>(offset + count));
    }
  }

  auto by_id = [&](std::vector<std::size_t>& v) {
    std::sort(v.begin(), v.end(), [&](auto a, auto b) { return full.row_ids[a] < full.row_ids[b]; });
  };
  StreamDataset out;
  for (std::size_t s = 0; s < 3; ++s) {
    if (stage_rows[s].empty()) throw std::invalid_argument("stage " + std::to_string(s + 1) + " is empty");
    by_id(stage_rows[s]);
    out.stages[s] = full.subset(stage_rows[s]);
  }
  by_id(valid_rows);
  by_id(test_rows);
  out.validation = full.subset(valid_rows);
  out.test = full.subset(test_rows);
  return out;
}

std::pair<LabeledDataset, LabeledDataset> resample_train_valid(const LabeledDataset& data,
                                                               double valid_fraction,
                                                               std::uint64_t seed) {
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw std::invalid_argument("valid_fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(data.class_count);
  for (std::size_t r = 0; r < data.size(); ++r) by_class.at(data.labels[r]).push_back(r);
  Rng rng(seed);
  std::vector<std::size_t> train, valid;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    if (rows.size() < 2) {
      throw std::invalid_argument("class " + std::to_string(c) +
                                  " has a single row; a stratified split needs two");
    }
    rng.shuffle(rows.begin(), rows.end());
    const auto nv = std::clamp<std::size_t>(
        round_half_up(valid_fraction * static_cast<double>(rows.size())), 1, rows.size() - 1);
    valid.insert(valid.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(nv));
    train.insert(train.end(), rows.begin() + static_cast<std::ptrdiff_t>(nv), rows.end());
  }
  if (train.empty()) throw std::invalid_argument("cannot split an empty dataset");
  rng.shuffle(train.begin(), train.end());
  return {data.subset(train), data.subset(valid)};
}

void write_csv(std::ostream& out, const LabeledDataset& data) {
  out << data.dims() << ' ' << data.class_count << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (double v : data.features.row(r)) out << format_exact(v) << ',';
    out << data.labels[r] << '\n';
  }
}

LabeledDataset read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_content_line(in, line, line_no)) throw ParseError("empty dataset file", 0);
  const auto header = detail::split_ws(line);
  if (header.size() != 2) throw ParseError("expected header 'd k'", line_no);
  const auto d = detail::parse_size(header[0], line_no);
  const auto k = detail::parse_size(header[1], line_no);
  if (d == 0) throw ParseError("feature dimension must be positive", line_no);
  if (k < 2) throw ParseError("class count must be at least 2", line_no);
  std::vector<double> values;
  LabeledDataset out;
  out.class_count = k;
  while (detail::next_content_line(in, line, line_no)) {
    const auto fields = detail::split(line, ',');
    if (fields.size() != d + 1) {
      throw ParseError("expected " + std::to_string(d) + " features and a label, found " +
                           std::to_string(fields.size()) + " fields",
                       line_no);
    }
    for (std::size_t i = 0; i < d; ++i) values.push_back(detail::parse_double(fields[i], line_no));
    const auto label = detail::parse_size(fields[d], line_no);
    if (label >= k) {
      throw ParseError("label " + std::to_string(label) + " out of range for " +
                           std::to_string(k) + " classes",
                       line_no);
    }
    out.labels.push_back(label);
  }
  if (out.labels.empty()) throw ParseError("dataset has no rows", line_no);
  out.features = Matrix(out.labels.size(), d, std::move(values));
  out.row_ids.resize(out.labels.size());
  std::iota(out.row_ids.begin(), out.row_ids.end(), 0);
  return out;
}

void save_csv(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(out, data);
  if (!out) throw std::runtime_error("write failed: " + path);
}

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

namespace {

constexpr const char* kStreamParts[] = {"d1", "d2", "d3", "validation", "test"};

}  // namespace

std::string save_stream(const std::string& dir, const StreamDataset& stream) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const LabeledDataset* parts[] = {&stream.stages[0], &stream.stages[1], &stream.stages[2],
                                   &stream.validation, &stream.test};
  const auto manifest = (fs::path(dir) / "stream.manifest").string();
  std::ofstream out(manifest);
  if (!out) throw std::runtime_error("cannot open " + manifest + " for writing");
  out << "STREAM v1\n";
  for (std::size_t k = 0; k < 5; ++k) {
    const std::string name = std::string(kStreamParts[k]) + ".csv";
    save_csv((fs::path(dir) / name).string(), *parts[k]);
    out << kStreamParts[k] << ' ' << name << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + manifest);
  return manifest;
}

StreamDataset load_stream(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open " + manifest_path);
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_content_line(in, line, line_no) || detail::trim(line) != "STREAM v1") {
    throw ParseError("expected 'STREAM v1'", line_no);
  }
  StreamDataset out;
  LabeledDataset* parts[] = {&out.stages[0], &out.stages[1], &out.stages[2], &out.validation,
                             &out.test};
  const auto base = fs::path(manifest_path).parent_path();
  for (std::size_t k = 0; k < 5; ++k) {
    if (!detail::next_content_line(in, line, line_no)) {
      throw ParseError("missing entry '" + std::string(kStreamParts[k]) + "'", line_no);
    }
    const auto f = detail::split_ws(line);
    if (f.size() != 2 || f[0] != kStreamParts[k]) {
      throw ParseError("expected '" + std::string(kStreamParts[k]) + " <file>'", line_no);
    }
    *parts[k] = load_csv((base / std::string(f[1])).string());
  }
  return out;
}

}  // namespace dynens
