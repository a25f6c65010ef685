#include "dynens/prediction.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dynens/errors.hpp"
#include "text_util.hpp"

namespace dynens {

PredictionMatrix::PredictionMatrix(std::size_t n, std::size_t p, std::vector<double> values)
    : n_(n), p_(p), values_(std::move(values)) {
  if (n_ == 0) throw std::invalid_argument("prediction matrix needs at least one row");
  if (p_ < 2) throw std::invalid_argument("prediction matrix needs p >= 2 classes");
  if (values_.size() != n_ * p_) throw std::invalid_argument("prediction matrix size mismatch");
  for (std::size_t t = 0; t < n_; ++t) {
    double sum = 0.0;
    for (double v : row(t)) {
      if (!std::isfinite(v) || v < -kSimplexTolerance || v > 1.0 + kSimplexTolerance) {
        throw std::invalid_argument("prediction row " + std::to_string(t) +
                                    " has an entry outside [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw std::invalid_argument("prediction row " + std::to_string(t) + " sums to " +
                                  std::to_string(sum));
    }
  }
}

PredictionMatrix PredictionMatrix::from_rows(std::span<const SimplexVector> rows) {
  if (rows.empty()) throw std::invalid_argument("prediction matrix needs at least one row");
  const std::size_t p = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * p);
  for (const auto& r : rows) {
    if (r.size() != p) throw std::invalid_argument("prediction rows differ in dimension");
    values.insert(values.end(), r.values().begin(), r.values().end());
  }
  return PredictionMatrix(rows.size(), p, std::move(values));
}

PredictionMatrix PredictionMatrix::one_hot(std::span<const std::size_t> classes, std::size_t p) {
  std::vector<double> values(classes.size() * p, 0.0);
  for (std::size_t t = 0; t < classes.size(); ++t) {
    if (classes[t] >= p) throw std::invalid_argument("one-hot class index out of range");
    values[t * p + classes[t]] = 1.0;
  }
  return PredictionMatrix(classes.size(), p, std::move(values));
}

SimplexVector PredictionMatrix::row_vector(std::size_t t) const {
  auto r = row(t);
  return SimplexVector(std::vector<double>(r.begin(), r.end()));
}

std::size_t PredictionMatrix::argmax(std::size_t t) const noexcept {
  auto r = row(t);
  std::size_t best = 0;
  for (std::size_t k = 1; k < r.size(); ++k) {
    if (r[k] > r[best]) best = k;
  }
  return best;
}

std::vector<std::size_t> top_k_indices(std::span<const double> row, std::size_t k) {
  if (k == 0 || k > row.size()) throw std::invalid_argument("top-k: k out of range");
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return row[a] > row[b] || (row[a] == row[b] && a < b);
                    });
  idx.resize(k);
  return idx;
}

std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_prediction_matrix(std::ostream& out, const PredictionMatrix& m) {
  out << m.rows() << ' ' << m.classes() << '\n';
  for (std::size_t t = 0; t < m.rows(); ++t) {
    auto r = m.row(t);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) out << ' ';
      out << format_exact(r[k]);
    }
    out << '\n';
  }
}

PredictionMatrix read_prediction_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_content_line(in, line, line_no)) throw ParseError("empty prediction file", 0);
  auto header = detail::split_ws(line);
  if (header.size() != 2) throw ParseError("expected header 'n p'", line_no);
  const auto n = detail::parse_size(header[0], line_no);
  const auto p = detail::parse_size(header[1], line_no);
  std::vector<double> values;
  values.reserve(n * p);
  for (std::size_t t = 0; t < n; ++t) {
    if (!detail::next_content_line(in, line, line_no)) {
      throw ParseError("expected " + std::to_string(n) + " rows, found " + std::to_string(t),
                       line_no);
    }
    auto fields = detail::split_ws(line);
    if (fields.size() != p) {
      throw ParseError("expected " + std::to_string(p) + " values, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (auto f : fields) values.push_back(detail::parse_double(f, line_no));
  }
  if (detail::next_content_line(in, line, line_no)) {
    throw ParseError("unexpected trailing row", line_no);
  }
  try {
    return PredictionMatrix(n, p, std::move(values));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 0);
  }
}

void save_prediction_matrix(const std::string& path, const PredictionMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_prediction_matrix(out, m);
  if (!out) throw std::runtime_error("write failed: " + path);
}

PredictionMatrix load_prediction_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_prediction_matrix(in);
}

void write_labels(std::ostream& out, const LabelVector& labels) {
  for (auto l : labels.values()) out << l << '\n';
}

LabelVector read_labels(std::istream& in) {
  std::vector<std::size_t> labels;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_content_line(in, line, line_no)) {
    auto fields = detail::split_ws(line);
    if (fields.size() != 1) throw ParseError("expected one label per line", line_no);
    labels.push_back(detail::parse_size(fields[0], line_no));
  }
  if (labels.empty()) throw ParseError("empty label file", 0);
  return LabelVector(std::move(labels));
}

void save_labels(const std::string& path, const LabelVector& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_labels(out, labels);
}

LabelVector load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_labels(in);
}

}  // namespace dynens
