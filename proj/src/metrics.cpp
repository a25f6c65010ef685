#include "dynens/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dynens {
namespace {

void require_same_shape(const PredictionMatrix& a, const PredictionMatrix& b) {
  if (a.rows() != b.rows() || a.classes() != b.classes()) {
    throw std::invalid_argument("prediction matrices differ in shape");
  }
}

void require_labels(const PredictionMatrix& a, const LabelVector& r) {
  if (a.rows() != r.size()) {
    throw std::invalid_argument("label count " + std::to_string(r.size()) +
                                " does not match prediction rows " + std::to_string(a.rows()));
  }
  for (auto l : r.values()) {
    if (l >= a.classes()) throw std::invalid_argument("label out of range");
  }
}

void require_k(const PredictionMatrix& a, std::size_t k) {
  if (k == 0 || k > a.classes()) {
    throw std::invalid_argument("k must lie in [1, " + std::to_string(a.classes()) + "]");
  }
}

double fraction(std::size_t count, std::size_t n) {
  return static_cast<double>(count) / static_cast<double>(n);
}

double row_pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    return std::equal(x.begin(), x.end(), y.begin()) ? 1.0 : 0.0;
  }
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

double row_cosine(std::span<const double> x, std::span<const double> y) {
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    xy += x[k] * y[k];
    xx += x[k] * x[k];
    yy += y[k] * y[k];
  }
  return std::clamp(xy / (std::sqrt(xx) * std::sqrt(yy)), -1.0, 1.0);
}

double mean_of(std::vector<double>& per_row) {
  return pairwise_sum(per_row) / static_cast<double>(per_row.size());
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const auto half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double consistency(const PredictionMatrix& a, const PredictionMatrix& b) {
  require_same_shape(a, b);
  std::size_t agree = 0;
  for (std::size_t t = 0; t < a.rows(); ++t) agree += a.argmax(t) == b.argmax(t);
  return fraction(agree, a.rows());
}

double accuracy(const PredictionMatrix& a, const LabelVector& r) {
  require_labels(a, r);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < a.rows(); ++t) hits += a.argmax(t) == r[t];
  return fraction(hits, a.rows());
}

double correct_consistency(const PredictionMatrix& a, const PredictionMatrix& b,
                           const LabelVector& r) {
  require_same_shape(a, b);
  require_labels(a, r);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < a.rows(); ++t) hits += a.argmax(t) == r[t] && b.argmax(t) == r[t];
  return fraction(hits, a.rows());
}

double coarse_consistency(const PredictionMatrix& a, const PredictionMatrix& b, std::size_t k) {
  require_same_shape(a, b);
  require_k(a, k);
  std::size_t hits = 0;
  std::vector<char> in_a(a.classes());
  for (std::size_t t = 0; t < a.rows(); ++t) {
    std::fill(in_a.begin(), in_a.end(), 0);
    for (auto c : top_k_indices(a.row(t), k)) in_a[c] = 1;
    const auto top_b = top_k_indices(b.row(t), k);
    hits += std::any_of(top_b.begin(), top_b.end(), [&](std::size_t c) { return in_a[c] != 0; });
  }
  return fraction(hits, a.rows());
}

double coarse_accuracy(const PredictionMatrix& a, const LabelVector& r, std::size_t k) {
  require_labels(a, r);
  require_k(a, k);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < a.rows(); ++t) {
    const auto top = top_k_indices(a.row(t), k);
    hits += std::find(top.begin(), top.end(), r[t]) != top.end();
  }
  return fraction(hits, a.rows());
}

double pearson_similarity(const PredictionMatrix& a, const PredictionMatrix& b) {
  require_same_shape(a, b);
  std::vector<double> per_row(a.rows());
  for (std::size_t t = 0; t < a.rows(); ++t) per_row[t] = row_pearson(a.row(t), b.row(t));
  return mean_of(per_row);
}

double cosine_similarity(const PredictionMatrix& a, const PredictionMatrix& b) {
  require_same_shape(a, b);
  std::vector<double> per_row(a.rows());
  for (std::size_t t = 0; t < a.rows(); ++t) per_row[t] = row_cosine(a.row(t), b.row(t));
  return mean_of(per_row);
}

TransitionStats transition_stats(const PredictionMatrix& a, const PredictionMatrix& b,
                                 const LabelVector& r) {
  require_same_shape(a, b);
  require_labels(a, r);
  std::size_t cc = 0, ci = 0, ic = 0, ii = 0;
  for (std::size_t t = 0; t < a.rows(); ++t) {
    const bool ok_a = a.argmax(t) == r[t];
    const bool ok_b = b.argmax(t) == r[t];
    if (ok_a && ok_b) ++cc;
    else if (ok_a) ++ci;
    else if (ok_b) ++ic;
    else ++ii;
  }
  const auto n = a.rows();
  TransitionStats s;
  s.cto_c = fraction(cc, n);
  s.cto_i = fraction(ci, n);
  s.ito_c = fraction(ic, n);
  s.ito_i = fraction(ii, n);
  s.com = s.cto_c + s.ito_c - s.cto_i;
  return s;
}

PairReport pair_report(const PredictionMatrix& a, const PredictionMatrix& b, const LabelVector& r,
                       std::span<const std::size_t> ks) {
  PairReport rep;
  rep.con = consistency(a, b);
  rep.acc_a = accuracy(a, r);
  rep.acc_b = accuracy(b, r);
  rep.acc_con = correct_consistency(a, b, r);
  for (auto k : ks) {
    rep.ccon_k[k] = coarse_consistency(a, b, k);
    rep.cacc_k_a[k] = coarse_accuracy(a, r, k);
    rep.cacc_k_b[k] = coarse_accuracy(b, r, k);
  }
  rep.pearson = pearson_similarity(a, b);
  rep.cosine = cosine_similarity(a, b);
  rep.transitions = transition_stats(a, b, r);
  return rep;
}

AveragedReport pairwise_average_report(std::span<const PredictionMatrix> matrices,
                                       const LabelVector& r, std::span<const std::size_t> ks) {
  if (matrices.size() != 3) {
    throw std::invalid_argument("pairwise averaging needs exactly three prediction matrices, got " +
                                std::to_string(matrices.size()));
  }
  AveragedReport avg;
  for (std::size_t i = 0; i < 3; ++i) avg.acc_each[i] = accuracy(matrices[i], r);
  avg.acc = (avg.acc_each[0] + avg.acc_each[1] + avg.acc_each[2]) / 3.0;
  for (auto k : ks) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += coarse_accuracy(matrices[i], r, k);
    avg.cacc_k[k] = s / 3.0;
    avg.ccon_k[k] = 0.0;
  }
  for (std::size_t p = 0; p < kStagePairs.size(); ++p) {
    const auto& a = matrices[kStagePairs[p][0]];
    const auto& b = matrices[kStagePairs[p][1]];
    avg.con += consistency(a, b);
    avg.acc_con += correct_consistency(a, b, r);
    avg.pearson += pearson_similarity(a, b);
    avg.cosine += cosine_similarity(a, b);
    for (auto k : ks) avg.ccon_k[k] += coarse_consistency(a, b, k);
    avg.transitions[p] = transition_stats(a, b, r);
  }
  avg.con /= 3.0;
  avg.acc_con /= 3.0;
  avg.pearson /= 3.0;
  avg.cosine /= 3.0;
  for (auto& [k, v] : avg.ccon_k) v /= 3.0;
  return avg;
}

}  // namespace dynens
