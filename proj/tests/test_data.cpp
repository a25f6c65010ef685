#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dynens/data.hpp"
#include "dynens/errors.hpp"
#include "support/oracles.hpp"

using namespace dynens;

namespace {

std::set<std::uint64_t> ids(const LabeledDataset& d) { return {d.row_ids.begin(), d.row_ids.end()}; }

bool subset_of(const std::set<std::uint64_t>& a, const std::set<std::uint64_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("synthetic generator") {
  const auto a = make_synthetic(4, 6, 50, 3.0, 1);
  CHECK(a.size() == 200);
  CHECK(a.dims() == 6);
  CHECK(a.class_counts() == std::vector<std::size_t>{50, 50, 50, 50});
  CHECK(a == make_synthetic(4, 6, 50, 3.0, 1));
  CHECK_FALSE(a == make_synthetic(4, 6, 50, 3.0, 2));
  CHECK_NOTHROW(a.validate());

  CHECK(dynens::testing::nearest_mean_accuracy(make_synthetic(5, 10, 200, 20.0, 3)) >= 0.99);
  CHECK(dynens::testing::nearest_mean_accuracy(make_synthetic(3, 2, 200, 20.0, 3)) >= 0.99);
  // With separation 0 the estimated means only fit noise.
  const double blind = dynens::testing::nearest_mean_accuracy(make_synthetic(4, 2, 500, 0.0, 3));
  CHECK(blind < 0.4);
  CHECK_THROWS_AS(make_synthetic(1, 2, 10, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_synthetic(2, 0, 10, 1.0, 0), std::invalid_argument);
}

TEST_CASE("stream counts follow the recipe") {
  const auto full = make_synthetic(2, 3, 100, 3.0, 4);
  ImbalanceSpec spec;
  spec.keep_fractions = {1.0, 0.5};
  spec.stage_classes = {std::vector<std::size_t>{0, 1}, {0, 1}, {0, 1}};
  spec.growth = {0.8, 1.0, 1.0};
  spec.eval_per_class = 0;
  const auto s = make_stream(full, spec, 9);
  CHECK(s.stages[0].class_counts() == std::vector<std::size_t>{80, 40});
  CHECK(s.stages[1].class_counts() == std::vector<std::size_t>{100, 50});

  spec.keep_fractions = {1.0, 1.0};
  spec.growth = {1.0, 1.0, 1.0};
  const auto flat = make_stream(full, spec, 9);
  CHECK(flat.stages[0] == flat.stages[1]);
  CHECK(flat.stages[1] == flat.stages[2]);
}

TEST_CASE("held-out stream nesting and disjointness") {
  const auto full = make_synthetic(5, 8, 400, 3.0, 5);
  const auto spec = ImbalanceSpec::held_out_class({1.0, 0.9, 0.8, 0.7, 0.6}, 4, 100);
  const auto s = make_stream(full, spec, 11);
  const auto i1 = ids(s.stages[0]), i2 = ids(s.stages[1]), i3 = ids(s.stages[2]);
  CHECK(s.stages[0].size() < s.stages[1].size());
  CHECK(s.stages[1].size() < s.stages[2].size());
  CHECK(subset_of(i1, i2));
  CHECK(subset_of(i2, i3));
  CHECK(s.stages[0].class_counts()[4] == 0);
  CHECK(s.stages[1].class_counts()[4] == 0);
  CHECK(s.stages[2].class_counts()[4] > 0);
  CHECK(s.validation.size() == s.test.size());
  CHECK(s.validation.class_counts() == s.test.class_counts());
  for (std::size_t c = 0; c < 4; ++c) CHECK(s.test.class_counts()[c] == 100);
  const auto iv = ids(s.validation), it = ids(s.test);
  for (auto id : iv) {
    CHECK_FALSE(i3.count(id));
    CHECK_FALSE(it.count(id));
  }
  for (auto id : it) CHECK_FALSE(i3.count(id));
  CHECK(make_stream(full, spec, 11).stages[2] == s.stages[2]);

  auto greedy = spec;
  greedy.eval_per_class = 250;
  CHECK_THROWS_AS(make_stream(full, greedy, 11), std::invalid_argument);
  auto bad = spec;
  bad.stage_classes[1] = {0, 1};
  CHECK_THROWS_AS(make_stream(full, bad, 11), std::invalid_argument);
}

TEST_CASE("stratified resampling") {
  const auto d = make_synthetic(3, 2, 120, 1.0, 6);
  const auto [train, valid] = resample_train_valid(d, 1.0 / 6.0, 1);
  CHECK(valid.class_counts() == std::vector<std::size_t>{20, 20, 20});
  CHECK(train.size() + valid.size() == d.size());
  auto all = ids(train);
  for (auto id : valid.row_ids) CHECK(all.insert(id).second);
  CHECK(all == ids(d));
  const auto other = resample_train_valid(d, 1.0 / 6.0, 2);
  CHECK(other.first.row_ids != train.row_ids);
  CHECK(resample_train_valid(d, 1.0 / 6.0, 1).first == train);

  const auto tiny = resample_train_valid(d, 1e-6, 1);
  CHECK(tiny.second.class_counts() == std::vector<std::size_t>{1, 1, 1});

  auto lonely = d.subset({0});
  lonely.class_count = 3;
  CHECK_THROWS_AS(resample_train_valid(lonely, 0.5, 1), std::invalid_argument);
  CHECK(round_half_up(2.5) == 3);
  CHECK(round_half_up(2.4999) == 2);
}

TEST_CASE("csv round trip and errors") {
  const auto d = make_synthetic(3, 4, 5, 2.0, 7);
  std::stringstream ss;
  write_csv(ss, d);
  const auto back = read_csv(ss);
  CHECK(back.features == d.features);
  CHECK(back.labels == d.labels);
  CHECK(back.class_count == d.class_count);

  std::stringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), ParseError);
  std::stringstream width("2 2\n0.1,0.2,1\n0.3,1\n");
  try {
    read_csv(width);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::stringstream word("2 2\n0.1,abc,1\n");
  CHECK_THROWS_AS(read_csv(word), ParseError);
  std::stringstream label("2 2\n0.1,0.2,2\n");
  CHECK_THROWS_AS(read_csv(label), ParseError);
}

TEST_CASE("stream files round trip") {
  const auto full = make_synthetic(3, 2, 60, 3.0, 8);
  const auto s = make_stream(full, ImbalanceSpec::held_out_class({1.0, 1.0, 0.5}, 2, 10), 3);
  const auto dir = std::filesystem::temp_directory_path() / "dynens_test_stream";
  std::filesystem::remove_all(dir);
  const auto manifest = save_stream(dir.string(), s);
  const auto back = load_stream(manifest);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.stages[i].features == s.stages[i].features);
    CHECK(back.stages[i].labels == s.stages[i].labels);
  }
  CHECK(back.test.labels == s.test.labels);
  std::filesystem::remove(dir / "d2.csv");
  CHECK_THROWS(load_stream(manifest));
  std::filesystem::remove_all(dir);
}
