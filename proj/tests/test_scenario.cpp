#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "neurolesion/report.hpp"
#include "neurolesion/scenario.hpp"

using namespace neurolesion;

namespace {

SweepOptions tiny_options() {
  SweepOptions opts;
  opts.seeds = 3;
  opts.epochs = 2;
  opts.snn_T = 40;
  return opts;
}

}  // namespace

TEST_CASE("scenario table is enforced") {
  auto c2 = make_scenario_config(2);
  CHECK(c2.engine == Engine::Ann);
  CHECK(c2.algo == TrainAlgo::BackpropSgd);
  CHECK(c2.activation.tag == Activation::ReLU);

  auto c6 = make_scenario_config(6);
  CHECK(c6.engine == Engine::Snn);
  CHECK(c6.algo == TrainAlgo::Sur);
  CHECK(c6.activation.tag == Activation::SReLU);

  CHECK_THROWS_AS(make_scenario_config(0), ConfigError);
  CHECK_THROWS_AS(make_scenario_config(7), ConfigError);

  auto broken = make_scenario_config(1);
  broken.seeds = {1};
  broken.activation = ActivationKind::relu();
  CHECK_THROWS_AS(broken.validate(), ConfigError);
  auto empty_seeds = make_scenario_config(1);
  CHECK_THROWS_AS(empty_seeds.validate(), ConfigError);
}

TEST_CASE("impact classification") {
  CHECK(classify_impact(0.05, Engine::Ann).tag == "Minor");
  CHECK(classify_impact(0.30, Engine::Ann).tag == "Moderate");
  CHECK(classify_impact(0.80, Engine::Ann).tag == "Severe");
  CHECK(classify_impact(0.80, Engine::Snn).tag == "Complex");
  CHECK(classify_impact(0.0, Engine::Snn).tag == "Complex");
  CHECK_THROWS_AS(classify_impact(std::nan(""), Engine::Ann), DomainError);

  // monotone in D for the dense engine
  auto severity = [](const std::string& tag) {
    if (tag == "Minor") return 0;
    if (tag == "Moderate") return 1;
    return 2;
  };
  double prev = -1.0;
  int prev_rank = 0;
  for (double d = 0.0; d <= 1.2; d += 0.01) {
    int rank = severity(classify_impact(d, Engine::Ann).tag);
    if (prev >= 0.0) CHECK(rank >= prev_rank);
    prev = d;
    prev_rank = rank;
  }
}

TEST_CASE("default seed list is deterministic and distinct") {
  auto a = default_seed_list(42, 20);
  auto b = default_seed_list(42, 20);
  CHECK(a == b);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) CHECK(a[i] != a[j]);
}

TEST_CASE("median") {
  CHECK(median_of({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median_of({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));
  CHECK_THROWS_AS(median_of({}), DomainError);
}

TEST_CASE("ann scenario run produces twins, compensation and telemetry") {
  ScenarioConfig config = scenario_from_options(1, tiny_options());
  ScenarioResult result = run_scenario(config);
  CHECK(result.outcomes.size() == 3);
  CHECK(result.ok_seeds == 3);
  for (const auto& o : result.outcomes) {
    CHECK(o.ok);
    CHECK(o.lesion_fired);
    CHECK(o.twins_matched_at_death);
    CHECK(std::isfinite(o.degradation));
    REQUIRE(o.comp_outgoing.has_value());
    REQUIRE(o.comp_incoming.has_value());
    REQUIRE(o.telemetry.has_value());
    CHECK(o.telemetry->snapshots > 0);
    if (!o.comp_outgoing->no_adaptation) {
      double sum = 0.0;
      for (const auto& s : o.comp_outgoing->survivors) sum += *s.share;
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
  CHECK(result.median_s1.has_value());
  CHECK(result.s1_ci.has_value());
  CHECK(result.s1_ci->lo <= *result.median_s1 + 1e-12);
  CHECK(result.s1_ci->hi >= *result.median_s1 - 1e-12);
}

TEST_CASE("a death step beyond training is a no-op lesion with D exactly zero") {
  SweepOptions opts = tiny_options();
  opts.seeds = 2;
  opts.death_frac = 2.0;
  ScenarioConfig config = scenario_from_options(1, opts);
  ScenarioResult result = run_scenario(config);
  for (const auto& o : result.outcomes) {
    CHECK(o.ok);
    CHECK(!o.lesion_fired);
    CHECK(o.degradation == 0.0);
    CHECK(!o.comp_outgoing.has_value());
  }
  CHECK(result.impact.tag == "Minor");
}

TEST_CASE("a diverging seed is marked failed while the rest continue") {
  SweepOptions opts = tiny_options();
  opts.seeds = 2;
  ScenarioConfig config = scenario_from_options(1, opts);
  config.sgd.learning_rate = 1e18;  // guaranteed blow-up
  CHECK_THROWS_AS(run_scenario(config), RunError);  // every seed diverges
}

TEST_CASE("snn scenario run reports firing-rate deltas") {
  SweepOptions opts = tiny_options();
  opts.seeds = 2;
  opts.epochs = 1;
  ScenarioConfig config = scenario_from_options(6, opts);
  ScenarioResult result = run_scenario(config);
  CHECK(result.impact.tag == "Complex");
  for (const auto& o : result.outcomes) {
    CHECK(o.ok);
    REQUIRE(o.snn.has_value());
    const int non_input = 10 + 10 + 10 + 1;
    CHECK(o.snn->rate_delta_final.size() == static_cast<std::size_t>(non_input));
    CHECK(o.snn->baseline_rates_final.size() == static_cast<std::size_t>(non_input));
    for (double r : o.snn->lesioned_rates_final) {
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
  }
}

TEST_CASE("scenario report passes schema validation and is deterministic") {
  ScenarioConfig config = scenario_from_options(4, tiny_options());
  ScenarioResult result = run_scenario(config);
  auto j = scenario_result_to_json(result, false);
  auto issues = validate_scenario_report(j);
  for (const auto& issue : issues) MESSAGE(issue);
  CHECK(issues.empty());

  ScenarioResult again = run_scenario(config);
  CHECK(scenario_report_text(result, false) == scenario_report_text(again, false));
  CHECK(config_hash(result.config) == config_hash(again.config));
}

TEST_CASE("classification thresholds are echoed into the report") {
  ScenarioConfig config = scenario_from_options(1, tiny_options());
  ScenarioResult result = run_scenario(config);
  auto j = scenario_result_to_json(result, false);
  CHECK(j["impact"]["thresholds"]["minor_below"] == 0.10);
  CHECK(j["impact"]["thresholds"]["severe_at"] == 0.50);
  CHECK(j["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("summary mirrors the scenario table in order") {
  SweepOptions opts = tiny_options();
  opts.seeds = 2;
  opts.epochs = 1;
  opts.snn_T = 30;
  auto results = sweep_all(opts);
  REQUIRE(results.size() == 6);
  auto summary = summary_to_json(results, false);
  const auto& rows = summary["scenarios"];
  REQUIRE(rows.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(rows[static_cast<std::size_t>(i)]["scenario"] == i + 1);
  CHECK(rows[0]["training_algorithm"] == "ANN with Backpropagation");
  CHECK(rows[0]["activation"] == "Sigmoid");
  CHECK(rows[3]["training_algorithm"] == "ANN with Adam optimizer");
  CHECK(rows[5]["training_algorithm"] == "SNN with SUR algorithm");
  CHECK(rows[5]["activation"] == "SReLU");
  std::string csv = summary_csv(results);
  CHECK(csv.rfind("scenario,", 0) == 0);
}
