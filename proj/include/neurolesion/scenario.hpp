#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neurolesion/data.hpp"
#include "neurolesion/lesion.hpp"
#include "neurolesion/network.hpp"
#include "neurolesion/optim.hpp"
#include "neurolesion/snn.hpp"

namespace neurolesion {

enum class Engine { Ann, Snn };
enum class TrainAlgo { BackpropSgd, Adam, Surrogate, Sur };

const char* engine_tag(Engine engine);
const char* train_algo_tag(TrainAlgo algo);

// One config block for everything spiking; echoed into every SNN report.
struct SnnSettings {
  LifParams lif;
  int T = 100;
  double max_rate = 30.0;  // spikes per window = 0.3 * T
  double w_min = -1.0;
  double w_max = 1.0;
  SurRule sur;
  StdpRule stdp;
  SurrogateParams surrogate;
  double surrogate_lr = 0.05;
  double init_gain = 1.0;
};

struct ScenarioConfig {
  int id = 1;
  Engine engine = Engine::Ann;
  TrainAlgo algo = TrainAlgo::BackpropSgd;
  ActivationKind activation = ActivationKind::sigmoid();
  std::vector<int> layer_sizes = {5, 10, 10, 10, 1};
  LesionSpec lesion;        // death_step resolved from death_frac when a run starts
  double death_frac = 0.5;
  TrainConfig train;
  SgdState sgd;
  AdamParams adam;
  SnnSettings snn;
  DatasetParams data;
  std::uint64_t data_seed = 99;
  int kfolds = 5;
  int fold = 0;
  std::vector<std::uint64_t> seeds;
  double vanish_threshold = 1e-7;
  int probe_size = 16;
  int snn_probe_samples = 8;

  // Enforces the fixed scenario table: 1 ANN/backprop/sigmoid,
  // 2 ANN/backprop/relu, 3 ANN/backprop/leakyrelu, 4 ANN/adam/sigmoid,
  // 5 SNN/surrogate/sigmoid, 6 SNN/sur/srelu.
  void validate() const;
};

// Scenario defaults per the table above.
ScenarioConfig make_scenario_config(int id);

std::vector<std::uint64_t> default_seed_list(std::uint64_t master_seed, int count);

struct ImpactThresholds {
  double minor_below = 0.10;
  double severe_at = 0.50;
};

struct ImpactClass {
  std::string tag;  // Minor | Moderate | Severe | Complex
  ImpactThresholds thresholds;
};

// Pure function of the median degradation and the engine; SNN runs are
// always Complex.
ImpactClass classify_impact(double median_degradation, Engine engine,
                            ImpactThresholds thresholds = {});

struct TelemetrySummary {
  int snapshots = 0;
  double final_loss = 0.0;
  double min_layer_grad_norm = 0.0;
  int vanishing_events = 0;
  int dead_neurons_final = 0;
};

struct SnnSeedMetrics {
  std::vector<double> baseline_rates_predeath;
  std::vector<double> baseline_rates_final;
  std::vector<double> lesioned_rates_predeath;
  std::vector<double> lesioned_rates_final;
  std::vector<double> rate_delta_final;  // lesioned - baseline, per non-input neuron
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double baseline_final_loss = 0.0;
  double lesioned_final_loss = 0.0;
  double degradation = 0.0;  // (lesioned - baseline) / baseline
  double baseline_test_loss = 0.0;
  double lesioned_test_loss = 0.0;
  bool lesion_fired = false;
  bool twins_matched_at_death = false;
  std::optional<CompensationReport> comp_outgoing;
  std::optional<CompensationReport> comp_incoming;
  std::optional<TelemetrySummary> telemetry;  // ANN runs only
  std::optional<SnnSeedMetrics> snn;
};

struct BootstrapInterval {
  double lo = 0.0;
  double hi = 0.0;
  int replicates = 0;
};

struct ScenarioResult {
  ScenarioConfig config;
  std::uint64_t resolved_death_step = 0;
  FoldPlan fold_plan;
  std::vector<SeedOutcome> outcomes;
  int ok_seeds = 0;
  double median_baseline_loss = 0.0;
  double median_lesioned_loss = 0.0;
  double median_degradation = 0.0;
  std::optional<double> median_s1;
  std::optional<BootstrapInterval> s1_ci;
  ImpactClass impact;
};

// Trains a baseline and a lesioned twin per seed (identical init and data
// order), in a worker pool capped by NEUROLESION_THREADS. A diverging seed is
// marked failed and skipped in the aggregates; all seeds failing is a
// RunError.
ScenarioResult run_scenario(const ScenarioConfig& config);

struct SweepOptions {
  std::uint64_t master_seed = 1234;
  std::uint64_t data_seed = 99;
  int seeds = 20;
  int epochs = 30;
  double death_frac = 0.5;
  double l2_lambda = 0.0;
  double dropout_keep = 1.0;
  int snn_T = 100;
};

ScenarioConfig scenario_from_options(int id, const SweepOptions& options);

// All six scenarios with shared seeds and one shared dataset.
std::vector<ScenarioResult> sweep_all(const SweepOptions& options);

int worker_count(int jobs);

double median_of(std::vector<double> values);

}  // namespace neurolesion
