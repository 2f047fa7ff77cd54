#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "confignet/experiment.hpp"
#include "confignet/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace confignet;
using nlohmann::json;

namespace {

PreparedData eq26_data() { return prepare(gen_scalar_function(400, 1), {300, 100, 2}); }

LearnerConfig oscn_config() {
  LearnerConfig cfg;
  cfg.algorithm = Algorithm::oscn;
  cfg.lambda_grid = parse_scope("150:10:200");
  return cfg;
}

}  // namespace

TEST_CASE("rmse examples") {
  CHECK(rmse(Matrix{{1}, {2}}, Matrix{{1}, {2}}) == 0.0);
  CHECK(rmse(Matrix{{0}, {0}}, Matrix{{3}, {4}}) == doctest::Approx(std::sqrt(12.5)));
  CHECK(rmse(Matrix{{0}, {0}}, Matrix{{3}, {4}}) == doctest::Approx(3.5355).epsilon(1e-4));
  const auto per = rmse_per_output(Matrix{{0, 0}, {0, 0}}, Matrix{{3, 1}, {4, 1}});
  CHECK(per[0] == doctest::Approx(std::sqrt(12.5)));
  CHECK(per[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(rmse(Matrix(2, 1), Matrix(3, 1)), InvalidInput);
}

TEST_CASE("accuracy examples") {
  const Matrix t{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 0}};
  CHECK(accuracy(t, t) == 1.0);
  const Matrix p{{0.9, 0.1, 0}, {0.2, 0.5, 0.3}, {0.4, 0.4, 0.2}, {0, 0.1, 0.9}};
  CHECK(accuracy(p, t) == 0.5);
  // A tie goes to the first column.
  CHECK(accuracy(Matrix{{0.5, 0.5}}, Matrix{{1, 0}}) == 1.0);
  CHECK(accuracy(Matrix{{0.5, 0.5}}, Matrix{{0, 1}}) == 0.0);
}

TEST_CASE("parse_scope grammar") {
  CHECK(parse_scope("150:10:200") == std::vector<double>{150, 160, 170, 180, 190, 200});
  const auto half = parse_scope("{0.5:0.5:10}");
  CHECK(half.size() == 20);
  CHECK(half.back() == doctest::Approx(10.0));
  CHECK(parse_scope("{1}") == std::vector<double>{1});
  CHECK(parse_scope("7") == std::vector<double>{7});
  CHECK(parse_scope("1,5,9") == std::vector<double>{1, 5, 9});
  CHECK(parse_scope("0.1:0.1:0.3").size() == 3);
  CHECK_THROWS_AS(parse_scope(""), InvalidInput);
  CHECK_THROWS_AS(parse_scope("5:0:10"), InvalidInput);
  CHECK_THROWS_AS(parse_scope("a:b:c"), InvalidInput);
}

TEST_CASE("summarize") {
  const Stat one = summarize(std::vector<double>{4.0});
  CHECK(one.ave == 4.0);
  CHECK(one.dev == 0.0);
  CHECK(one.count == 1);
  const Stat s = summarize(std::vector<double>{1, 2, 3, 4});
  CHECK(s.ave == 2.5);
  CHECK(s.dev == doctest::Approx(std::sqrt(1.25)));
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  CHECK(summarize(std::vector<double>{}).count == 0);
}

TEST_CASE("run_trials is deterministic, thread-independent and self-consistent") {
  const PreparedData data = eq26_data();
  TrialOptions opt;
  opt.trials = 6;
  opt.base_seed = 10;
  const SuiteResult a = run_trials(data, oscn_config(), opt, "a");
  opt.threads = 3;
  const SuiteResult b = run_trials(data, oscn_config(), opt, "b");
  REQUIRE(a.reports.size() == 6);
  for (std::size_t t = 0; t < 6; ++t) {
    CHECK(a.reports[t].seed == 10 + t);
    CHECK(a.reports[t].residual_history == b.reports[t].residual_history);
    CHECK(a.reports[t].test_rmse == b.reports[t].test_rmse);
  }
  CHECK(a.prediction_variance == b.prediction_variance);

  double sum = 0.0, lo = 1e300, hi = -1e300;
  for (const auto& r : a.reports) {
    sum += r.test_rmse;
    lo = std::min(lo, r.test_rmse);
    hi = std::max(hi, r.test_rmse);
  }
  CHECK(a.test_rmse.ave == doctest::Approx(sum / 6.0).epsilon(1e-12));
  CHECK(a.test_rmse.ave >= lo);
  CHECK(a.test_rmse.ave <= hi);
  for (double v : a.prediction_variance.data()) CHECK(v >= 0.0);

  // suite_to_json carries no timing, so equal runs serialize identically.
  auto ja = suite_to_json(a), jb = suite_to_json(b);
  ja.erase("label");
  jb.erase("label");
  CHECK(ja.dump() == jb.dump());
  CHECK(ja.dump().find("wall") == std::string::npos);
}

TEST_CASE("a single trial has zero prediction variance") {
  TrialOptions opt;
  opt.trials = 1;
  const SuiteResult s = run_trials(eq26_data(), oscn_config(), opt);
  for (double v : s.prediction_variance.data()) CHECK(v == 0.0);
  CHECK(s.test_rmse.dev == 0.0);
}

TEST_CASE("run_fixed_nodes grows exactly the requested count") {
  const PreparedData data = prepare(gen_multi_output(300, 1), {200, 100, 2});
  for (auto alg : {Algorithm::irvfln, Algorithm::sc3, Algorithm::oscn}) {
    LearnerConfig cfg;
    cfg.algorithm = alg;
    cfg.lambda_grid = alg == Algorithm::irvfln ? std::vector<double>{10} : parse_scope("10:5:50");
    cfg.t_max = 10;
    cfg.sigma = 1e-8;
    const TrainResult r = run_fixed_nodes(data, cfg, 4, 3);
    CHECK(r.model.size() == 4);
    CHECK(r.report.test_rmse_per_output.size() == 2);
  }
}

TEST_CASE("failed trials stay in the reports but not in the statistics") {
  LearnerConfig cfg = oscn_config();
  cfg.sigma = 1e6;
  cfg.max_r_retries = 1;
  TrialOptions opt;
  opt.trials = 3;
  const SuiteResult s = run_trials(eq26_data(), cfg, opt);
  CHECK(s.reports.size() == 3);
  CHECK(s.failed_trials == 3);
  CHECK(s.test_rmse.count == 0);
  CHECK(has_failures(s));
}

TEST_CASE("IRVFLN needs a single scope value") {
  LearnerConfig cfg;
  cfg.algorithm = Algorithm::irvfln;
  cfg.lambda_grid = {1, 2};
  CHECK_THROWS_AS(train_learner(eq26_data().train, cfg, 0), InvalidInput);
}

TEST_CASE("classification reports accuracy") {
  const Dataset iris = load_csv(std::filesystem::path(CONFIGNET_TEST_DATA) / "iris.csv", 1, true);
  const PreparedData data = prepare(iris, {120, 30, 2});
  LearnerConfig cfg = oscn_config();
  cfg.lambda_grid = parse_scope("0.5:0.5:10");
  cfg.epsilon = 0.0;
  cfg.l_max = 10;
  cfg.t_max = 10;
  TrialOptions opt;
  opt.trials = 3;
  const SuiteResult s = run_trials(data, cfg, opt);
  REQUIRE(s.test_accuracy.has_value());
  CHECK(s.test_accuracy->ave > 0.8);
  CHECK(s.test_accuracy->ave <= 1.0);
}

TEST_CASE("experiment config parsing") {
  const json good = json::parse(R"({"algorithm": "oscn", "lambda_grid": [1, 2],
    "dataset": {"synth": {"which": "eq27", "n": 50}, "split": {"train": 40, "test": 10}}})");
  const ExperimentConfig cfg = parse_experiment(good, ".");
  CHECK(cfg.learner.lambda_grid == std::vector<double>{1, 2});
  CHECK(cfg.dataset.synth->which == "eq27");
  CHECK(prepare_dataset(cfg.dataset).train.size() == 40);

  auto typo = good;
  typo["Lmax"] = 5;
  CHECK_THROWS_AS(parse_experiment(typo, "."), InvalidInput);
  auto both = good;
  both["dataset"]["path"] = "x.csv";
  CHECK_THROWS_AS(parse_experiment(both, "."), InvalidInput);
  auto nosplit = good;
  nosplit["dataset"].erase("split");
  CHECK_THROWS_AS(parse_experiment(nosplit, "."), InvalidInput);
  auto badalg = good;
  badalg["algorithm"] = "scn9";
  CHECK_THROWS_AS(parse_experiment(badalg, "."), InvalidInput);

  auto rel = good;
  rel["dataset"].erase("synth");
  rel["dataset"]["path"] = "data/file.csv";
  CHECK(*parse_experiment(rel, "/base").dataset.path == std::filesystem::path("/base/data/file.csv"));
}

TEST_CASE("header detection looks at feature cells only") {
  const auto dir = std::filesystem::temp_directory_path();
  std::ofstream(dir / "confignet_h1.csv") << "a,b,label\n1,2,x\n";
  std::ofstream(dir / "confignet_h2.csv") << "1,2,x\n3,4,y\n";
  CHECK(csv_has_header(dir / "confignet_h1.csv", 1));
  CHECK_FALSE(csv_has_header(dir / "confignet_h2.csv", 1));
}
