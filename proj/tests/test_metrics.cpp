#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dynens/errors.hpp"
#include "dynens/metrics.hpp"
#include "dynens/prediction.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace dynens;
using dynens::testing::Gen;

namespace {

// Argmax sequences A = [0,0,1,1], B = [0,1,1,0], truth [0,0,1,0], written with
// soft rows so argmax has real work to do.
PredictionMatrix soft(const std::vector<std::size_t>& argmax) {
  std::vector<double> v;
  for (auto c : argmax) {
    v.push_back(c == 0 ? 0.8 : 0.2);
    v.push_back(c == 0 ? 0.2 : 0.8);
  }
  return PredictionMatrix(argmax.size(), 2, v);
}

const PredictionMatrix kA = soft({0, 0, 1, 1});
const PredictionMatrix kB = soft({0, 1, 1, 0});
const LabelVector kTruth({0, 0, 1, 0});

PredictionMatrix row(std::vector<double> v) { return PredictionMatrix(1, v.size(), v); }

// Softmax of log(row) / temperature; preserves ordering within each row.
PredictionMatrix sharpen(const PredictionMatrix& m, double temperature) {
  std::vector<double> out;
  for (std::size_t t = 0; t < m.rows(); ++t) {
    std::vector<double> z;
    double s = 0;
    for (double v : m.row(t)) {
      z.push_back(std::pow(v, 1.0 / temperature));
      s += z.back();
    }
    for (double v : z) out.push_back(v / s);
  }
  return PredictionMatrix(m.rows(), m.classes(), out);
}

}  // namespace

TEST_CASE("fixture values") {
  CHECK(consistency(kA, kB) == 0.5);
  CHECK(consistency(kA, kA) == 1.0);
  CHECK(accuracy(kA, kTruth) == 0.75);
  CHECK(accuracy(kB, kTruth) == 0.75);
  CHECK(correct_consistency(kA, kB, kTruth) == 0.5);
  const auto t = transition_stats(kA, kB, kTruth);
  CHECK(t.cto_c == 0.5);
  CHECK(t.cto_i == 0.25);
  CHECK(t.ito_c == 0.25);
  CHECK(t.ito_i == 0.0);
  CHECK(t.com == 0.5);
}

TEST_CASE("disjoint and perfect cases") {
  const auto a = soft({0, 1, 0});
  const auto b = soft({1, 0, 1});
  CHECK(consistency(a, b) == 0.0);
  const LabelVector r({0, 1, 0});
  const std::vector<std::size_t> labels{0, 1, 0};
  const auto truth = PredictionMatrix::one_hot(labels, 2);
  CHECK(accuracy(truth, r) == 1.0);
  CHECK(correct_consistency(truth, truth, r) == 1.0);
  CHECK(correct_consistency(a, b, r) == 0.0);
  const auto all = transition_stats(a, a, r);
  CHECK(all.com == 1.0);
}

TEST_CASE("shape errors") {
  const auto three = soft({0, 1, 0});
  CHECK_THROWS_AS(consistency(kA, three), std::invalid_argument);
  CHECK_THROWS_AS(accuracy(kA, LabelVector({0, 1})), std::invalid_argument);
  CHECK_THROWS_AS(correct_consistency(kA, three, kTruth), std::invalid_argument);
  CHECK_THROWS_AS(transition_stats(kA, three, kTruth), std::invalid_argument);
  CHECK_THROWS_AS(coarse_consistency(kA, kB, 0), std::invalid_argument);
  CHECK_THROWS_AS(coarse_consistency(kA, kB, 3), std::invalid_argument);
  CHECK_THROWS_AS(coarse_accuracy(kA, kTruth, 3), std::invalid_argument);
  CHECK_THROWS_AS(accuracy(kA, LabelVector({0, 0, 2, 0})), std::invalid_argument);
}

TEST_CASE("coarse metrics examples") {
  CHECK(coarse_consistency(kA, kB, 1) == consistency(kA, kB));
  CHECK(coarse_consistency(kA, kB, 2) == 1.0);
  CHECK(coarse_consistency(row({0.5, 0.3, 0.2}), row({0.1, 0.6, 0.3}), 2) == 1.0);
  CHECK(coarse_consistency(row({0.5, 0.3, 0.2}), row({0.1, 0.3, 0.6}), 1) == 0.0);
  CHECK(coarse_accuracy(kA, kTruth, 1) == accuracy(kA, kTruth));
  CHECK(coarse_accuracy(kA, kTruth, 2) == 1.0);
  CHECK(coarse_accuracy(row({0.2, 0.5, 0.3}), LabelVector({2}), 2) == 1.0);
  CHECK(coarse_accuracy(row({0.2, 0.5, 0.3}), LabelVector({0}), 2) == 0.0);
}

TEST_CASE("top-k ties follow the argmax rule") {
  const std::vector<double> r{0.25, 0.25, 0.25, 0.25};
  CHECK(top_k_indices(r, 2) == std::vector<std::size_t>{0, 1});
  const std::vector<double> s{0.1, 0.3, 0.3, 0.3};
  CHECK(top_k_indices(s, 2) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("pearson and cosine examples") {
  CHECK(pearson_similarity(kA, kA) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson_similarity(row({0.7, 0.3}), row({0.6, 0.4})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson_similarity(row({0.7, 0.3}), row({0.3, 0.7})) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(pearson_similarity(row({0.5, 0.5}), row({0.5, 0.5})) == 1.0);
  CHECK(pearson_similarity(row({0.5, 0.5}), row({0.6, 0.4})) == 0.0);
  CHECK(cosine_similarity(kA, kA) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_similarity(row({1, 0}), row({0, 1})) == 0.0);
  CHECK(cosine_similarity(row({1, 0}), row({0.5, 0.5})) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("pairwise averaging examples") {
  const std::vector<std::size_t> ks{1, 2};
  const std::vector<std::size_t> labels{0, 0, 1, 0};
  const auto perfect = PredictionMatrix::one_hot(labels, 2);
  std::vector<PredictionMatrix> same{perfect, perfect, perfect};
  auto r = pairwise_average_report(same, kTruth, ks);
  CHECK(r.acc == 1.0);
  CHECK(r.con == 1.0);
  CHECK(r.acc_con == 1.0);

  std::vector<PredictionMatrix> aaa{kA, kA, kA};
  r = pairwise_average_report(aaa, kTruth, ks);
  CHECK(r.con == 1.0);
  CHECK(r.acc == 0.75);
  CHECK(r.acc_con == 0.75);

  std::vector<PredictionMatrix> aab{kA, kA, kB};
  r = pairwise_average_report(aab, kTruth, ks);
  CHECK(r.con == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.transitions[0].cto_i == 0.0);
  CHECK(r.transitions[1].cto_i == 0.25);
  CHECK(r.ccon_k.at(1) == r.con);

  std::vector<PredictionMatrix> two{kA, kB};
  CHECK_THROWS_AS(pairwise_average_report(two, kTruth, ks), std::invalid_argument);
}

TEST_CASE("prediction and label files round trip") {
  Gen g(21);
  const auto m = g.prediction_matrix(7, 4);
  std::stringstream ss;
  write_prediction_matrix(ss, m);
  CHECK(read_prediction_matrix(ss) == m);
  const auto l = g.labels(7, 4);
  std::stringstream ls;
  write_labels(ls, l);
  CHECK(read_labels(ls) == l);

  std::stringstream bad("2 2\n0.5 0.5\n0.5\n");
  CHECK_THROWS_AS(read_prediction_matrix(bad), ParseError);
  std::stringstream empty("");
  CHECK_THROWS_AS(read_prediction_matrix(empty), ParseError);
}

TEST_CASE("property: envelope, identities and oracles on random matrices") {
  Gen g(22);
  for (int i = 0; i < 300; ++i) {
    const auto n = g.range(1, 40);
    const auto p = g.range(2, 7);
    const auto a = g.prediction_matrix(n, p);
    const auto b = g.prediction_matrix(n, p);
    const auto r = g.labels(n, p);
    const double acc_a = accuracy(a, r), acc_b = accuracy(b, r);
    const double ac = correct_consistency(a, b, r);
    CHECK(ac <= std::min(acc_a, acc_b) + 1e-12);
    CHECK(ac >= std::max(acc_a + acc_b - 1.0, 0.0) - 1e-12);
    CHECK(ac <= consistency(a, b));
    CHECK(consistency(a, b) == dynens::testing::oracle_consistency(a, b));
    CHECK(acc_a == dynens::testing::oracle_accuracy(a, r));

    const auto t = transition_stats(a, b, r);
    CHECK(t.cto_c + t.cto_i + t.ito_c + t.ito_i == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.cto_c + t.cto_i == doctest::Approx(acc_a).epsilon(1e-12));
    CHECK(t.cto_c + t.ito_c == doctest::Approx(acc_b).epsilon(1e-12));

    double prev_c = 0, prev_a = 0;
    for (std::size_t k = 1; k <= p; ++k) {
      const double cc = coarse_consistency(a, b, k);
      const double ca = coarse_accuracy(a, r, k);
      CHECK(cc >= prev_c);
      CHECK(ca >= prev_a);
      prev_c = cc;
      prev_a = ca;
      double hits = 0;
      for (std::size_t row = 0; row < n; ++row) {
        const auto sa = dynens::testing::oracle_top_k(a.row(row), k);
        const auto sb = dynens::testing::oracle_top_k(b.row(row), k);
        bool meet = false;
        for (auto c : sa) meet = meet || sb.count(c);
        hits += meet;
      }
      CHECK(cc == doctest::Approx(hits / static_cast<double>(n)).epsilon(1e-15));
    }
    CHECK(coarse_accuracy(a, r, p) == 1.0);
  }
}

TEST_CASE("property: argmax-preserving sharpening leaves label metrics unchanged") {
  Gen g(23);
  for (int i = 0; i < 100; ++i) {
    const auto n = g.range(5, 30);
    const auto p = g.range(2, 6);
    // Strictly positive distinct entries so sharpening cannot create ties.
    std::vector<double> va, vb;
    for (std::size_t t = 0; t < n; ++t) {
      for (auto* v : {&va, &vb}) {
        std::vector<double> rowv(p);
        double s = 0;
        for (std::size_t k = 0; k < p; ++k) s += rowv[k] = 0.05 + g.uniform() + 1e-3 * static_cast<double>(k);
        for (double x : rowv) v->push_back(x / s);
      }
    }
    const PredictionMatrix a(n, p, va), b(n, p, vb);
    const auto r = g.labels(n, p);
    const auto a2 = sharpen(a, 0.3), b2 = sharpen(b, 2.0);
    CHECK(consistency(a, b) == consistency(a2, b2));
    CHECK(accuracy(a, r) == accuracy(a2, r));
    CHECK(correct_consistency(a, b, r) == correct_consistency(a2, b2, r));
    for (std::size_t k = 1; k <= p; ++k) {
      CHECK(coarse_consistency(a, b, k) == coarse_consistency(a2, b2, k));
      CHECK(coarse_accuracy(a, r, k) == coarse_accuracy(a2, r, k));
    }
  }
}
