#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dynens/simplex.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace dynens;
using dynens::testing::Gen;

namespace {

SimplexVector sv(std::vector<double> v) { return SimplexVector(std::move(v)); }

}  // namespace

TEST_CASE("simplex vectors are validated at construction") {
  CHECK_NOTHROW(sv({0.25, 0.75}));
  CHECK_NOTHROW(sv({0.5, 0.5 + 5e-10}));
  CHECK_THROWS_AS(sv({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(sv({0.6, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(sv({-0.1, 1.1}), std::invalid_argument);
  CHECK_THROWS_AS(sv({NAN, 1.0}), std::invalid_argument);
  CHECK(SimplexVector::one_hot(3, 2).is_one_hot());
  CHECK_FALSE(SimplexVector::uniform(3).is_one_hot());
  CHECK(sv({0.4, 0.4, 0.2}).argmax() == 0);
  CHECK(sv({0.2, 0.4, 0.4}).argmax() == 1);
}

TEST_CASE("euclidean distance examples") {
  CHECK(euclidean_distance(sv({1, 0}), sv({0, 1})) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const auto v = sv({0.3, 0.7});
  CHECK(euclidean_distance(v, v) == 0.0);
  CHECK(euclidean_distance(sv({0.5, 0.5}), sv({1, 0})) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(euclidean_distance(sv({0.5, 0.5}), sv({0.2, 0.3, 0.5})), std::invalid_argument);
}

TEST_CASE("minkowski distance examples") {
  CHECK(minkowski_distance(sv({0.5, 0.5}), sv({1, 0}), MinkowskiOrder(1.0)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(MinkowskiOrder(0.5), std::invalid_argument);
  Gen g(11);
  for (int i = 0; i < 200; ++i) {
    const auto p = g.range(2, 8);
    const auto a = g.simplex(p);
    const auto b = g.simplex(p);
    CHECK(minkowski_distance(a, b, MinkowskiOrder(2.0)) == euclidean_distance(a, b));
    for (double q : {1.0, 1.5, 3.0, 4.0}) {
      CHECK(minkowski_distance(a, a, MinkowskiOrder(q)) == 0.0);
      CHECK(minkowski_distance(a, b, MinkowskiOrder(q)) ==
            doctest::Approx(dynens::testing::oracle_minkowski(a.values(), b.values(), q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("triple distance examples") {
  const auto r = sv({1, 0});
  CHECK(triple_distance(r, r, r) == 0.0);
  CHECK(triple_distance(sv({1, 0}), sv({0, 1}), r) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(triple_distance(sv({0.5, 0.5}), sv({0.5, 0.5}), r) ==
        doctest::Approx(2 * std::sqrt(0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(triple_distance(r, r, sv({0.5, 0.5})), std::invalid_argument);
}

TEST_CASE("centroid examples") {
  std::vector<SimplexVector> two{sv({1, 0}), sv({0, 1})};
  CHECK(centroid(two) == sv({0.5, 0.5}));
  std::vector<SimplexVector> one{sv({0.3, 0.7})};
  CHECK(centroid(one) == one[0]);
  std::vector<SimplexVector> three{sv({0.8, 0.2}), sv({0.4, 0.6}), sv({0.6, 0.4})};
  const auto c = centroid(three);
  CHECK(c[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(c[1] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_THROWS_AS(centroid(std::vector<SimplexVector>{}), std::invalid_argument);
}

TEST_CASE("weighted centroid examples") {
  std::vector<SimplexVector> two{sv({1, 0}), sv({0, 1})};
  const std::vector<double> w{3, 1};
  CHECK(weighted_centroid(two, w) == sv({0.75, 0.25}));
  const std::vector<double> eq{2, 2};
  CHECK(weighted_centroid(two, eq) == centroid(two));
  const std::vector<double> zero{0, 0};
  CHECK_THROWS_AS(weighted_centroid(two, zero), std::invalid_argument);
  const std::vector<double> neg{-1, 2};
  CHECK_THROWS_AS(weighted_centroid(two, neg), std::invalid_argument);
}

TEST_CASE("correctness similarity examples") {
  const auto r = sv({1, 0});
  CHECK(correctness_sim(r, r) == 1.0);
  CHECK(correctness_sim(sv({0, 1}), r) == doctest::Approx(0.0));
  CHECK(correctness_sim(sv({0.5, 0.5}), r) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(correctness_sim(r, sv({0.5, 0.5})), std::invalid_argument);
}

TEST_CASE("property: triangle inequality for every order") {
  Gen g(12);
  for (int i = 0; i < 500; ++i) {
    const auto p = g.range(2, 10);
    const auto a = g.simplex(p), b = g.simplex(p), c = g.simplex(p);
    for (double q : {1.0, 1.5, 2.0, 3.0, 4.0}) {
      const MinkowskiOrder o(q);
      CHECK(minkowski_distance(a, b, o) <= minkowski_distance(a, c, o) + minkowski_distance(c, b, o) + 1e-12);
    }
    CHECK(euclidean_distance(a, b) <= std::sqrt(2.0) + 1e-12);
    CHECK(euclidean_distance(a, b) == euclidean_distance(b, a));
  }
}

TEST_CASE("property: centroid stays inside the componentwise range") {
  Gen g(13);
  for (int i = 0; i < 300; ++i) {
    const auto p = g.range(2, 6);
    std::vector<SimplexVector> vs;
    for (std::size_t j = 0, m = g.range(1, 7); j < m; ++j) vs.push_back(g.simplex(p));
    const auto c = centroid(vs);
    for (std::size_t k = 0; k < p; ++k) {
      double lo = 1, hi = 0;
      for (const auto& v : vs) {
        lo = std::min(lo, v[k]);
        hi = std::max(hi, v[k]);
      }
      CHECK(c[k] >= lo - 1e-15);
      CHECK(c[k] <= hi + 1e-15);
    }
  }
}
