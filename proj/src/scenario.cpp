#include "neurolesion/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <numeric>
#include <thread>

#include "neurolesion/hash.hpp"

namespace neurolesion {

const char* engine_tag(Engine engine) { return engine == Engine::Ann ? "ann" : "snn"; }

const char* train_algo_tag(TrainAlgo algo) {
  switch (algo) {
    case TrainAlgo::BackpropSgd: return "backprop-sgd";
    case TrainAlgo::Adam: return "adam";
    case TrainAlgo::Surrogate: return "surrogate";
    case TrainAlgo::Sur: return "sur";
  }
  return "unknown";
}

namespace {

struct ScenarioRow {
  Engine engine;
  TrainAlgo algo;
  Activation activation;
};

ScenarioRow scenario_row(int id) {
  switch (id) {
    case 1: return {Engine::Ann, TrainAlgo::BackpropSgd, Activation::Sigmoid};
    case 2: return {Engine::Ann, TrainAlgo::BackpropSgd, Activation::ReLU};
    case 3: return {Engine::Ann, TrainAlgo::BackpropSgd, Activation::LeakyReLU};
    case 4: return {Engine::Ann, TrainAlgo::Adam, Activation::Sigmoid};
    case 5: return {Engine::Snn, TrainAlgo::Surrogate, Activation::Sigmoid};
    case 6: return {Engine::Snn, TrainAlgo::Sur, Activation::SReLU};
    default: throw ConfigError("scenario id must be in 1..6");
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  ScenarioRow row = scenario_row(id);
  if (engine != row.engine || algo != row.algo || activation.tag != row.activation)
    throw ConfigError("scenario " + std::to_string(id) +
                      " does not match the fixed engine/optimizer/activation table");
  if (seeds.empty()) throw ConfigError("scenario needs at least one seed");
  if (layer_sizes.size() < 3) throw ConfigError("scenario network needs a hidden layer");
  if (!(death_frac >= 0.0)) throw ConfigError("death_frac must be >= 0");
  activation.validate();
  train.validate();
  lesion.validate_for(layer_sizes);
  sgd.validate();
  adam.validate();
  snn.lif.validate();
  data.validate();
  if (kfolds < 2 || kfolds > kDaysPerYear) throw ConfigError("kfolds out of range");
  if (fold < 0 || fold >= kfolds) throw ConfigError("fold out of range");
  if (probe_size < 1 || snn_probe_samples < 1) throw ConfigError("probe sizes must be >= 1");
}

ScenarioConfig make_scenario_config(int id) {
  ScenarioRow row = scenario_row(id);
  ScenarioConfig config;
  config.id = id;
  config.engine = row.engine;
  config.algo = row.algo;
  switch (row.activation) {
    case Activation::Sigmoid: config.activation = ActivationKind::sigmoid(); break;
    case Activation::ReLU: config.activation = ActivationKind::relu(); break;
    case Activation::LeakyReLU: config.activation = ActivationKind::leaky_relu(); break;
    case Activation::SReLU: config.activation = ActivationKind::srelu(); break;
    case Activation::Identity: config.activation = ActivationKind::identity(); break;
  }
  return config;
}

std::vector<std::uint64_t> default_seed_list(std::uint64_t master_seed, int count) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    seeds.push_back(derive_seed(master_seed, Stream::kSeedList, static_cast<std::uint64_t>(i)));
  return seeds;
}

ImpactClass classify_impact(double median_degradation, Engine engine,
                            ImpactThresholds thresholds) {
  if (!std::isfinite(median_degradation))
    throw DomainError("impact classification needs a finite degradation");
  ImpactClass impact;
  impact.thresholds = thresholds;
  if (engine == Engine::Snn) {
    impact.tag = "Complex";
  } else if (median_degradation < thresholds.minor_below) {
    impact.tag = "Minor";
  } else if (median_degradation < thresholds.severe_at) {
    impact.tag = "Moderate";
  } else {
    impact.tag = "Severe";
  }
  return impact;
}

int worker_count(int jobs) {
  int workers = 0;
  if (const char* env = std::getenv("NEUROLESION_THREADS")) {
    workers = std::atoi(env);
  }
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 0) workers = 1;
  return std::max(1, std::min(workers, jobs));
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

struct PreparedData {
  Dataset dataset;
  FoldPlan plan;
  std::vector<int> train_idx;
  std::vector<int> test_idx;
  NormStats stats;
  std::vector<Vector> train_x, test_x;
  std::vector<double> train_y, test_y;
};

PreparedData prepare_data(const ScenarioConfig& config) {
  PreparedData d;
  d.dataset = generate_dataset(config.data_seed, config.data);
  const int n = static_cast<int>(d.dataset.rows.size());
  d.plan = kfold_split(n, config.kfolds, config.data_seed);
  d.test_idx = d.plan.test_folds[static_cast<std::size_t>(config.fold)];
  d.train_idx = d.plan.train_indices(config.fold, n);
  d.stats = compute_norm_stats(d.dataset, d.train_idx);
  auto fill = [&](const std::vector<int>& idx, std::vector<Vector>& xs, std::vector<double>& ys) {
    for (int i : idx) {
      const Sample& row = d.dataset.rows[static_cast<std::size_t>(i)];
      xs.push_back(normalize_features(row, d.stats));
      ys.push_back(normalize_target(row.target, d.stats));
    }
  };
  fill(d.train_idx, d.train_x, d.train_y);
  fill(d.test_idx, d.test_x, d.test_y);
  return d;
}

std::uint64_t resolve_death_step(double death_frac, std::uint64_t total_steps) {
  return static_cast<std::uint64_t>(death_frac * static_cast<double>(total_steps));
}

Vector clamp01(Vector x) {
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
  return x;
}

struct TelemetryAccum {
  int snapshots = 0;
  double min_norm = std::numeric_limits<double>::infinity();
  int vanishing_events = 0;

  void absorb(const TelemetrySnapshot& snap) {
    ++snapshots;
    for (double n : snap.layer_grad_norms) min_norm = std::min(min_norm, n);
    for (auto flag : snap.vanishing) vanishing_events += flag ? 1 : 0;
  }

  TelemetrySummary finish(const TelemetrySnapshot& last) const {
    TelemetrySummary out;
    out.snapshots = snapshots;
    out.final_loss = last.loss;
    out.min_layer_grad_norm = min_norm;
    out.vanishing_events = vanishing_events;
    for (const auto& layer : last.dead)
      for (auto flag : layer) out.dead_neurons_final += flag ? 1 : 0;
    return out;
  }
};

double mean_loss_ann(const Network& net, const std::vector<Vector>& xs,
                     const std::vector<double>& ys) {
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ForwardTrace trace = forward(net, xs[i]);
    sum += mse_loss(ys[i], trace.y_pred);
  }
  return sum / static_cast<double>(xs.size());
}

struct AnnArtifacts {
  Network net;
  std::optional<Network> at_death;
  bool fired = false;
  std::uint64_t init_hash = 0;
  std::uint64_t death_hash = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  TelemetrySummary telemetry;
};

AnnArtifacts run_ann(const ScenarioConfig& config, const PreparedData& data, std::uint64_t seed,
                     bool lesioned) {
  std::vector<ActivationKind> acts(config.layer_sizes.size() - 1, config.activation);
  acts.back() = ActivationKind::identity();
  Network net = init_network(config.layer_sizes, acts, seed);

  TrainConfig tcfg = config.train;
  tcfg.seed = seed;
  std::optional<AdamState> adam;
  if (config.algo == TrainAlgo::Adam) adam = AdamState::init_for(net, config.adam);

  const std::uint64_t total_steps =
      static_cast<std::uint64_t>(tcfg.epochs) * data.train_x.size();
  const std::uint64_t death_step = resolve_death_step(config.death_frac, total_steps);
  LesionSpec spec = config.lesion;
  spec.death_step = death_step;
  LesionInjector injector;

  ProbeBatch probe;
  const std::size_t probe_n =
      std::min<std::size_t>(static_cast<std::size_t>(config.probe_size), data.train_x.size());
  for (std::size_t i = 0; i < probe_n; ++i) {
    probe.inputs.push_back(data.train_x[i]);
    probe.targets.push_back(Vector{data.train_y[i]});
  }

  AnnArtifacts art;
  art.init_hash = checkpoint_hash(net);
  TelemetryAccum tel;

  std::uint64_t step = 0;
  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    std::vector<int> order(data.train_x.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 shuffle_rng(derive_seed(seed, Stream::kShuffle, static_cast<std::uint64_t>(epoch)));
    seeded_shuffle(order, shuffle_rng);
    for (int idx : order) {
      if (step == death_step) {
        art.death_hash = checkpoint_hash(net);
        if (lesioned) {
          tel.absorb(probe_telemetry(net, probe, step, config.vanish_threshold));
          injector.fire(net, spec);
          art.fired = true;
          art.at_death = net;
          tel.absorb(probe_telemetry(net, probe, step, config.vanish_threshold));
        }
      } else if (step % 50 == 0 || step + 1 == death_step) {
        tel.absorb(probe_telemetry(net, probe, step, config.vanish_threshold));
      }
      const std::size_t s = static_cast<std::size_t>(idx);
      ForwardTrace trace = forward_train(net, data.train_x[s], tcfg, step);
      Gradient grad = backward(net, trace, data.train_y[s], tcfg);
      if (adam) {
        adam_step(net, grad, *adam);
      } else {
        sgd_step(net, grad, config.sgd);
      }
      ++step;
    }
  }

  TelemetrySnapshot last = probe_telemetry(net, probe, step, config.vanish_threshold);
  tel.absorb(last);
  art.telemetry = tel.finish(last);
  art.train_loss = mean_loss_ann(net, data.train_x, data.train_y);
  art.test_loss = mean_loss_ann(net, data.test_x, data.test_y);
  if (!std::isfinite(art.train_loss) || !std::isfinite(art.test_loss))
    throw NumericError("training diverged to a non-finite loss");
  art.net = std::move(net);
  return art;
}

std::uint64_t snn_hash(const SnnNetwork& net) {
  std::string bytes;
  for (int s : net.layer_sizes)
    bytes.append(reinterpret_cast<const char*>(&s), sizeof(s));
  for (const Matrix& w : net.weights)
    bytes.append(reinterpret_cast<const char*>(w.data.data()), w.data.size() * sizeof(double));
  return fnv1a64(bytes);
}

std::vector<SpikeTrain> layer_trains(const SimResult& sim, const SnnNetwork& net, int layer) {
  std::vector<SpikeTrain> trains;
  const int width = net.layer_sizes[static_cast<std::size_t>(layer)];
  trains.reserve(static_cast<std::size_t>(width));
  for (int u = 0; u < width; ++u)
    trains.push_back(sim.trains[static_cast<std::size_t>(net.global_id(layer, u))]);
  return trains;
}

std::vector<double> snn_probe_rates(SnnNetwork& net, const ScenarioConfig& config,
                                    const PreparedData& data, std::uint64_t seed) {
  const std::size_t probe_n =
      std::min<std::size_t>(static_cast<std::size_t>(config.snn_probe_samples), data.train_x.size());
  std::vector<double> rates(static_cast<std::size_t>(net.non_input_count()), 0.0);
  for (std::size_t p = 0; p < probe_n; ++p) {
    auto trains = encode_poisson(clamp01(data.train_x[p]), config.snn.max_rate, config.snn.T,
                                 derive_seed(seed, Stream::kProbe, p));
    SimResult sim = lif_simulate(net, trains, config.snn.T, config.snn.lif);
    const int inputs = net.layer_sizes.front();
    for (std::size_t i = 0; i < rates.size(); ++i)
      rates[i] += static_cast<double>(sim.trains[i + static_cast<std::size_t>(inputs)].steps.size()) /
                  static_cast<double>(config.snn.T);
  }
  for (double& r : rates) r /= static_cast<double>(probe_n);
  return rates;
}

double mean_loss_snn(SnnNetwork& net, const ScenarioConfig& config, const std::vector<Vector>& xs,
                     const std::vector<double>& ys, std::uint64_t seed, std::uint64_t stream_tag) {
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto trains = encode_poisson(clamp01(xs[i]), config.snn.max_rate, config.snn.T,
                                 derive_seed(seed, Stream::kProbe, i, stream_tag));
    SimResult sim = lif_simulate(net, trains, config.snn.T, config.snn.lif);
    double y_hat = rate_decode(sim.output_train(net), config.snn.T, config.snn.surrogate.decode_scale);
    sum += mse_loss(ys[i], y_hat);
  }
  return sum / static_cast<double>(xs.size());
}

struct SnnArtifacts {
  SnnNetwork net;
  std::optional<SnnNetwork> at_death;
  bool fired = false;
  std::uint64_t init_hash = 0;
  std::uint64_t death_hash = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  std::vector<double> rates_predeath;
  std::vector<double> rates_final;
};

SnnArtifacts run_snn(const ScenarioConfig& config, const PreparedData& data, std::uint64_t seed,
                     bool lesioned) {
  SnnNetwork net = init_snn_network(config.layer_sizes, seed, config.snn.init_gain);
  if (config.activation.tag == Activation::SReLU)
    net.gate = SReluGate{config.activation.a, config.activation.b};

  const std::uint64_t total_steps =
      static_cast<std::uint64_t>(config.train.epochs) * data.train_x.size();
  const std::uint64_t death_step = resolve_death_step(config.death_frac, total_steps);
  LesionSpec spec = config.lesion;
  spec.death_step = death_step;
  SnnLesionInjector injector;

  PlasticityRule rule = PlasticityRule::make_sur(config.snn.sur);

  SnnArtifacts art;
  art.init_hash = snn_hash(net);

  std::uint64_t step = 0;
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    std::vector<int> order(data.train_x.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 shuffle_rng(derive_seed(seed, Stream::kShuffle, static_cast<std::uint64_t>(epoch)));
    seeded_shuffle(order, shuffle_rng);
    for (int idx : order) {
      if (step == death_step) {
        art.death_hash = snn_hash(net);
        art.rates_predeath = snn_probe_rates(net, config, data, seed);
        if (lesioned) {
          injector.fire(net, spec);
          art.fired = true;
          art.at_death = net;
        }
      }
      const std::size_t s = static_cast<std::size_t>(idx);
      auto trains = encode_poisson(clamp01(data.train_x[s]), config.snn.max_rate, config.snn.T,
                                   derive_seed(seed, Stream::kPoisson, step));
      if (config.algo == TrainAlgo::Surrogate) {
        surrogate_backprop_step(net, trains, data.train_y[s], config.snn.surrogate_lr,
                                config.snn.T, config.snn.lif, config.snn.surrogate);
      } else {
        SimResult sim = lif_simulate(net, trains, config.snn.T, config.snn.lif);
        for (int wl = 0; wl < net.weight_layer_count(); ++wl) {
          auto pre = layer_trains(sim, net, wl);
          auto post = layer_trains(sim, net, wl + 1);
          net.weights[static_cast<std::size_t>(wl)] =
              sur_update(net.weights[static_cast<std::size_t>(wl)], pre, post, rule,
                         config.snn.w_min, config.snn.w_max, &net.frozen[static_cast<std::size_t>(wl)]);
        }
      }
      ++step;
    }
  }

  art.rates_final = snn_probe_rates(net, config, data, seed);
  art.train_loss = mean_loss_snn(net, config, data.train_x, data.train_y, seed, 1);
  art.test_loss = mean_loss_snn(net, config, data.test_x, data.test_y, seed, 2);
  if (!std::isfinite(art.train_loss) || !std::isfinite(art.test_loss))
    throw NumericError("snn training diverged to a non-finite loss");
  art.net = std::move(net);
  return art;
}

double degradation_of(double baseline, double lesioned) {
  if (baseline > 0.0) return (lesioned - baseline) / baseline;
  if (lesioned == baseline) return 0.0;
  throw NumericError("degradation undefined: baseline loss is zero");
}

SeedOutcome run_seed(const ScenarioConfig& config, const PreparedData& data, std::uint64_t seed) {
  SeedOutcome outcome;
  outcome.seed = seed;
  try {
    LesionSpec spec = config.lesion;
    if (config.engine == Engine::Ann) {
      AnnArtifacts base = run_ann(config, data, seed, false);
      AnnArtifacts les = run_ann(config, data, seed, true);
      outcome.baseline_final_loss = base.train_loss;
      outcome.lesioned_final_loss = les.train_loss;
      outcome.baseline_test_loss = base.test_loss;
      outcome.lesioned_test_loss = les.test_loss;
      outcome.degradation = degradation_of(base.train_loss, les.train_loss);
      outcome.lesion_fired = les.fired;
      outcome.twins_matched_at_death =
          base.init_hash == les.init_hash && base.death_hash == les.death_hash;
      outcome.telemetry = les.telemetry;
      if (les.fired) {
        outcome.comp_outgoing = compensation_report(*les.at_death, les.net, spec, false);
        outcome.comp_incoming = compensation_report(*les.at_death, les.net, spec, true);
      }
      outcome.ok = true;
    } else {
      SnnArtifacts base = run_snn(config, data, seed, false);
      SnnArtifacts les = run_snn(config, data, seed, true);
      outcome.baseline_final_loss = base.train_loss;
      outcome.lesioned_final_loss = les.train_loss;
      outcome.baseline_test_loss = base.test_loss;
      outcome.lesioned_test_loss = les.test_loss;
      outcome.degradation = degradation_of(base.train_loss, les.train_loss);
      outcome.lesion_fired = les.fired;
      outcome.twins_matched_at_death =
          base.init_hash == les.init_hash && base.death_hash == les.death_hash;
      if (les.fired) {
        outcome.comp_outgoing = compensation_from_weights(
            les.at_death->weights, les.net.weights, config.layer_sizes, spec, false);
        outcome.comp_incoming = compensation_from_weights(
            les.at_death->weights, les.net.weights, config.layer_sizes, spec, true);
      }
      SnnSeedMetrics metrics;
      metrics.baseline_rates_predeath = base.rates_predeath;
      metrics.baseline_rates_final = base.rates_final;
      metrics.lesioned_rates_predeath = les.rates_predeath;
      metrics.lesioned_rates_final = les.rates_final;
      metrics.rate_delta_final.resize(les.rates_final.size());
      for (std::size_t i = 0; i < les.rates_final.size(); ++i)
        metrics.rate_delta_final[i] = les.rates_final[i] - base.rates_final[i];
      outcome.snn = std::move(metrics);
      outcome.ok = true;
    }
  } catch (const std::exception& e) {
    outcome.ok = false;
    outcome.error = e.what();
  }
  return outcome;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  PreparedData data = prepare_data(config);

  ScenarioResult result;
  result.config = config;
  result.fold_plan = data.plan;
  result.resolved_death_step = resolve_death_step(
      config.death_frac,
      static_cast<std::uint64_t>(config.train.epochs) * data.train_x.size());
  result.config.lesion.death_step = result.resolved_death_step;

  result.outcomes.resize(config.seeds.size());
  std::atomic<std::size_t> cursor{0};
  const int workers = worker_count(static_cast<int>(config.seeds.size()));
  auto work = [&]() {
    while (true) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= config.seeds.size()) break;
      result.outcomes[i] = run_seed(config, data, config.seeds[i]);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<double> base_losses, les_losses, degradations, s1_values;
  for (const SeedOutcome& o : result.outcomes) {
    if (!o.ok) continue;
    ++result.ok_seeds;
    base_losses.push_back(o.baseline_final_loss);
    les_losses.push_back(o.lesioned_final_loss);
    degradations.push_back(o.degradation);
    if (o.comp_outgoing && o.comp_outgoing->s1) s1_values.push_back(*o.comp_outgoing->s1);
  }
  if (result.ok_seeds == 0) throw RunError("all seeds failed for scenario " + std::to_string(config.id));

  result.median_baseline_loss = median_of(base_losses);
  result.median_lesioned_loss = median_of(les_losses);
  result.median_degradation = median_of(degradations);
  if (!s1_values.empty()) {
    result.median_s1 = median_of(s1_values);
    const int replicates = 1000;
    std::vector<double> reps;
    reps.reserve(replicates);
    SplitMix64 rng(derive_seed(config.seeds.front(), Stream::kBootstrap,
                               static_cast<std::uint64_t>(config.id)));
    for (int r = 0; r < replicates; ++r) {
      std::vector<double> sample;
      sample.reserve(s1_values.size());
      for (std::size_t i = 0; i < s1_values.size(); ++i)
        sample.push_back(s1_values[static_cast<std::size_t>(rng.next_below(s1_values.size()))]);
      reps.push_back(median_of(sample));
    }
    std::sort(reps.begin(), reps.end());
    auto quantile = [&](double q) {
      double pos = q * static_cast<double>(reps.size() - 1);
      return reps[static_cast<std::size_t>(std::llround(pos))];
    };
    result.s1_ci = BootstrapInterval{quantile(0.025), quantile(0.975), replicates};
  }
  result.impact = classify_impact(result.median_degradation, config.engine);
  return result;
}

ScenarioConfig scenario_from_options(int id, const SweepOptions& options) {
  ScenarioConfig config = make_scenario_config(id);
  config.seeds = default_seed_list(options.master_seed, options.seeds);
  config.data_seed = options.data_seed;
  config.train.epochs = options.epochs;
  config.train.l2_lambda = options.l2_lambda;
  config.train.dropout_keep = options.dropout_keep;
  config.death_frac = options.death_frac;
  config.snn.T = options.snn_T;
  config.snn.max_rate = 0.3 * static_cast<double>(options.snn_T);
  return config;
}

std::vector<ScenarioResult> sweep_all(const SweepOptions& options) {
  std::vector<ScenarioResult> results;
  results.reserve(6);
  for (int id = 1; id <= 6; ++id) results.push_back(run_scenario(scenario_from_options(id, options)));
  return results;
}

}  // namespace neurolesion
