#include <doctest.h>

#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dynens/config.hpp"
#include "dynens/errors.hpp"
#include "dynens/experiment.hpp"

using namespace dynens;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.classes = 3;
  c.dims = 4;
  c.per_class = 80;
  c.keep_fractions = {1.0, 0.8, 0.6};
  c.held_out_class = 2;
  c.eval_per_class = 20;
  c.m = 3;
  c.n = 3;
  c.epochs = 6;
  c.hidden = {8};
  c.replicates = 2;
  c.seed = 77;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in("# comment\nm = 4\nbeta=0.5\nmethods = SingleBase, DynSnap-cyc\nheld_out_class=none\n");
  const auto kv = parse_key_values(in);
  const auto c = ExperimentConfig::from_key_values(kv);
  CHECK(c.m == 4);
  CHECK(c.beta == PruneFactor::fixed(0.5));
  CHECK(c.methods == std::vector<Method>{Method::kSingleBase, Method::kDynSnapCyc});
  CHECK_FALSE(c.held_out_class.has_value());

  const auto round = ExperimentConfig::from_key_values(c.to_key_values());
  CHECK(round.to_key_values() == c.to_key_values());

  std::istringstream dup("m=1\nm=2\n");
  CHECK_THROWS_AS(parse_key_values(dup), ParseError);
  KeyValues unknown{{"bogus", "1"}};
  CHECK_THROWS(ExperimentConfig::from_key_values(unknown));
  KeyValues bad{{"m", "-3"}};
  CHECK_THROWS(ExperimentConfig::from_key_values(bad));

  for (auto m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("Boosting"), std::invalid_argument);
}

TEST_CASE("cell seeds are distinct") {
  auto c = tiny_config();
  std::set<std::uint64_t> seen;
  for (std::size_t r = 0; r < 3; ++r) {
    for (auto m : kAllMethods) {
      for (std::size_t s = 0; s < 3; ++s) CHECK(seen.insert(cell_seed(c, r, m, s)).second);
    }
  }
  c.same_seed_across_stages = true;
  CHECK(cell_seed(c, 1, Method::kSnapshot, 0) == cell_seed(c, 1, Method::kSnapshot, 2));
}

TEST_CASE("summary statistics") {
  const auto s = summarize({1.0, 2.0, 3.0});
  CHECK(s.mean == 2.0);
  CHECK(s.sd == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.count == 3);
  CHECK(summarize({4.0}).sd == 0.0);
}

TEST_CASE("identical learners across stages") {
  auto c = tiny_config();
  c.methods = {Method::kSingleBase};
  c.replicates = 1;
  c.held_out_class.reset();
  c.keep_fractions = {1.0, 1.0, 1.0};
  c.growth = {1.0, 1.0, 1.0};
  c.same_seed_across_stages = true;
  const auto run = run_experiment(c);
  const auto& avg = run.report.get(Method::kSingleBase).get(Combiner::kAVG);
  CHECK(avg.get("con").mean == 1.0);
  CHECK(avg.get("acc_con").mean == avg.get("acc").mean);
  CHECK(run.report.get(Method::kSingleBase).relative_cost == 1.0);
}

TEST_CASE("experiment run, determinism and serialization") {
  auto c = tiny_config();
  const auto a = run_experiment(c);
  c.workers = 3;
  const auto b = run_experiment(c);
  const auto ja = report_to_json(a.report);
  CHECK(ja == report_to_json(b.report));
  CHECK(a.report.envelope_violations == 0);
  CHECK(a.report.admission_violations == 0);
  CHECK(a.report.methods.size() == 6);
  for (const auto& m : a.report.methods) {
    CHECK(m.failed_cells == 0);
    CHECK(m.replicates_ok == 2);
    CHECK(m.combiners.size() == 4);
    CHECK(m.relative_cost > 0.0);
  }
  CHECK(a.report.get(Method::kExtBagging).relative_cost == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(report_from_json(ja) == a.report);
  CHECK(report_to_json(report_from_json(ja)) == ja);

  const auto csv = report_to_csv(a.report);
  CHECK(csv.rfind("method,combiner,metric,mean,sd,count\n", 0) == 0);
  CHECK(csv.find("DynSnap-cyc,AVG,acc_con,") != std::string::npos);
  CHECK(csv.find("ExtBagging,-,relative_cost,") != std::string::npos);

  CHECK_THROWS(report_from_json("{}"));
  CHECK_THROWS(report_from_json("not json"));
  CHECK_THROWS(a.report.get(Method::kSingleBase).get(Combiner::kAVG).get("nope"));
}

TEST_CASE("sensitivity sweeps") {
  auto c = tiny_config();
  c.methods = {Method::kDynSnapCyc};
  c.replicates = 1;
  const auto single = sensitivity_sweep(c, SweepDimension::kM, {"3"});
  REQUIRE(single.reports.size() == 1);
  CHECK(report_to_json(single.reports[0]) == report_to_json(run_experiment(c).report));

  const auto betas = sensitivity_sweep(c, SweepDimension::kBeta, {"0", "0.5", "1"});
  CHECK(betas.reports.size() == 3);
  CHECK(betas.monotonicity_checks > 0);
  CHECK(betas.monotonicity_violations == 0);
  CHECK(sweep_to_json(betas).find("\"monotonicity_violations\": 0") != std::string::npos);
  CHECK(sweep_to_csv(betas).rfind("dimension,value,method,combiner,metric,mean,sd\n", 0) == 0);

  const auto windows = sensitivity_sweep(c, SweepDimension::kWindow, {"2"});
  CHECK(windows.reports[0].config.at("epochs") == "6");
  CHECK_THROWS(sensitivity_sweep(c, SweepDimension::kBeta, {"7"}));
  CHECK_THROWS(sensitivity_sweep(c, SweepDimension::kM, {}));
}
