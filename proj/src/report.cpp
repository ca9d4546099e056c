#include "neurolesion/report.hpp"

#include <charconv>
#include <cmath>
#include <ctime>

#include "neurolesion/hash.hpp"
#include "neurolesion/version.hpp"

namespace neurolesion {

using nlohmann::json;

namespace {

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json optional_number(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

json compensation_to_json(const CompensationReport& report) {
  json j;
  j["hidden_layer"] = report.hidden_layer;
  j["dead_neuron"] = report.dead_neuron;
  j["view"] = report.incoming_view ? "incoming" : "outgoing";
  j["no_adaptation"] = report.no_adaptation;
  j["total_delta"] = finite_or_null(report.total_delta);
  json survivors = json::array();
  for (const auto& s : report.survivors) {
    survivors.push_back(json{{"index", s.index},
                             {"distance", s.distance},
                             {"delta", finite_or_null(s.delta)},
                             {"share", optional_number(s.share)}});
  }
  j["survivors"] = survivors;
  j["share_by_distance"] = report.share_by_distance;
  j["s1"] = optional_number(report.s1);
  return j;
}

json telemetry_to_json(const TelemetrySummary& t) {
  return json{{"snapshots", t.snapshots},
              {"final_loss", finite_or_null(t.final_loss)},
              {"min_layer_grad_norm", finite_or_null(t.min_layer_grad_norm)},
              {"vanishing_events", t.vanishing_events},
              {"dead_neurons_final", t.dead_neurons_final}};
}

json snn_metrics_to_json(const SnnSeedMetrics& m) {
  return json{{"baseline_rates_predeath", m.baseline_rates_predeath},
              {"baseline_rates_final", m.baseline_rates_final},
              {"lesioned_rates_predeath", m.lesioned_rates_predeath},
              {"lesioned_rates_final", m.lesioned_rates_final},
              {"rate_delta_final", m.rate_delta_final}};
}

const char* table2_algorithm(int id) {
  switch (id) {
    case 1:
    case 2:
    case 3: return "ANN with Backpropagation";
    case 4: return "ANN with Adam optimizer";
    case 5: return "SNN with Backpropagation";
    case 6: return "SNN with SUR algorithm";
  }
  return "unknown";
}

const char* table2_activation(int id) {
  switch (id) {
    case 1:
    case 4:
    case 5: return "Sigmoid";
    case 2: return "ReLU";
    case 3: return "LeakyReLU";
    case 6: return "SReLU";
  }
  return "unknown";
}

}  // namespace

json scenario_config_to_json(const ScenarioConfig& config) {
  json j;
  j["id"] = config.id;
  j["engine"] = engine_tag(config.engine);
  j["algorithm"] = train_algo_tag(config.algo);
  j["activation"] = activation_tag(config.activation);
  j["output_activation"] = "identity";
  j["layer_sizes"] = config.layer_sizes;
  j["lesion"] = json{{"hidden_layer", config.lesion.hidden_layer},
                     {"neuron", config.lesion.neuron},
                     {"mode", lesion_mode_tag(config.lesion.mode)},
                     {"death_step", config.lesion.death_step},
                     {"freeze", config.lesion.freeze}};
  j["death_frac"] = config.death_frac;
  j["train"] = json{{"l2_lambda", config.train.l2_lambda},
                    {"dropout_keep", config.train.dropout_keep},
                    {"epochs", config.train.epochs}};
  j["optimizer"] = config.algo == TrainAlgo::Adam
                       ? optimizer_tag(config.adam)
                       : (config.algo == TrainAlgo::BackpropSgd ? optimizer_tag(config.sgd)
                                                                : std::string(train_algo_tag(config.algo)));
  j["snn"] = json{{"T", config.snn.T},
                  {"max_rate", config.snn.max_rate},
                  {"tau_m", config.snn.lif.tau_m},
                  {"v_rest", config.snn.lif.v_rest},
                  {"v_reset", config.snn.lif.v_reset},
                  {"v_th", config.snn.lif.v_th},
                  {"r", config.snn.lif.r},
                  {"refractory", config.snn.lif.refractory},
                  {"w_min", config.snn.w_min},
                  {"w_max", config.snn.w_max},
                  {"sur_eta", config.snn.sur.eta},
                  {"sur_window", config.snn.sur.window},
                  {"stdp_a_plus", config.snn.stdp.a_plus},
                  {"stdp_a_minus", config.snn.stdp.a_minus},
                  {"stdp_tau_plus", config.snn.stdp.tau_plus},
                  {"stdp_tau_minus", config.snn.stdp.tau_minus},
                  {"surrogate_beta", config.snn.surrogate.beta},
                  {"decode_scale", config.snn.surrogate.decode_scale},
                  {"surrogate_lr", config.snn.surrogate_lr},
                  {"init_gain", config.snn.init_gain}};
  j["data"] = json{{"seed", config.data_seed},
                   {"base", config.data.base},
                   {"trend", config.data.trend},
                   {"seasonal", config.data.seasonal},
                   {"weekly", config.data.weekly},
                   {"noise_sigma", config.data.noise_sigma},
                   {"kfolds", config.kfolds},
                   {"fold", config.fold}};
  j["seeds"] = config.seeds;
  j["vanish_threshold"] = config.vanish_threshold;
  j["probe_size"] = config.probe_size;
  j["snn_probe_samples"] = config.snn_probe_samples;
  j["prng"] = "splitmix64 substreams per (purpose, layer, step)";
  j["init"] = "uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero";
  return j;
}

std::string config_hash(const ScenarioConfig& config) {
  return hex64(fnv1a64(scenario_config_to_json(config).dump()));
}

json scenario_result_to_json(const ScenarioResult& result, bool with_timestamp) {
  json j;
  j["tool_version"] = kToolVersion;
  if (with_timestamp) j["generated_at"] = iso8601_utc_now();
  j["config"] = scenario_config_to_json(result.config);
  j["config_hash"] = config_hash(result.config);
  j["death_step"] = result.resolved_death_step;

  json folds = json::array();
  for (const auto& f : result.fold_plan.test_folds) folds.push_back(f);
  j["fold_plan"] = json{{"k", result.fold_plan.k}, {"seed", result.fold_plan.seed}, {"test_folds", folds}};

  json per_seed = json::array();
  for (const SeedOutcome& o : result.outcomes) {
    json s;
    s["seed"] = o.seed;
    s["status"] = o.ok ? "ok" : "failed";
    if (!o.ok) {
      s["error"] = o.error;
      per_seed.push_back(s);
      continue;
    }
    s["baseline_final_loss"] = finite_or_null(o.baseline_final_loss);
    s["lesioned_final_loss"] = finite_or_null(o.lesioned_final_loss);
    s["degradation"] = finite_or_null(o.degradation);
    s["baseline_test_loss"] = finite_or_null(o.baseline_test_loss);
    s["lesioned_test_loss"] = finite_or_null(o.lesioned_test_loss);
    s["lesion_fired"] = o.lesion_fired;
    s["twins_matched_at_death"] = o.twins_matched_at_death;
    s["compensation"] = o.comp_outgoing ? compensation_to_json(*o.comp_outgoing) : json(nullptr);
    s["compensation_incoming"] =
        o.comp_incoming ? compensation_to_json(*o.comp_incoming) : json(nullptr);
    s["telemetry"] = o.telemetry ? telemetry_to_json(*o.telemetry) : json(nullptr);
    s["snn"] = o.snn ? snn_metrics_to_json(*o.snn) : json(nullptr);
    per_seed.push_back(s);
  }
  j["per_seed"] = per_seed;
  j["ok_seeds"] = result.ok_seeds;
  j["median"] = json{{"baseline_final_loss", finite_or_null(result.median_baseline_loss)},
                     {"lesioned_final_loss", finite_or_null(result.median_lesioned_loss)},
                     {"degradation", finite_or_null(result.median_degradation)},
                     {"s1", optional_number(result.median_s1)}};
  if (result.s1_ci) {
    j["s1_bootstrap"] = json{{"lo", finite_or_null(result.s1_ci->lo)},
                             {"hi", finite_or_null(result.s1_ci->hi)},
                             {"replicates", result.s1_ci->replicates},
                             {"confidence", 0.95}};
  } else {
    j["s1_bootstrap"] = nullptr;
  }
  j["impact"] = json{{"class", result.impact.tag},
                     {"thresholds", json{{"minor_below", result.impact.thresholds.minor_below},
                                         {"severe_at", result.impact.thresholds.severe_at}}}};
  return j;
}

std::string scenario_report_text(const ScenarioResult& result, bool with_timestamp) {
  return scenario_result_to_json(result, with_timestamp).dump(2) + "\n";
}

json summary_to_json(const std::vector<ScenarioResult>& results, bool with_timestamp) {
  json j;
  j["tool_version"] = kToolVersion;
  if (with_timestamp) j["generated_at"] = iso8601_utc_now();
  json rows = json::array();
  for (const ScenarioResult& r : results) {
    rows.push_back(json{{"scenario", r.config.id},
                        {"training_algorithm", table2_algorithm(r.config.id)},
                        {"activation", table2_activation(r.config.id)},
                        {"impact_class", r.impact.tag},
                        {"median_degradation", finite_or_null(r.median_degradation)},
                        {"median_s1", optional_number(r.median_s1)},
                        {"ok_seeds", r.ok_seeds},
                        {"config_hash", config_hash(r.config)}});
  }
  j["scenarios"] = rows;
  return j;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

std::string summary_csv(const std::vector<ScenarioResult>& results) {
  std::string out = "scenario,training_algorithm,activation,impact_class,median_degradation,median_s1\n";
  for (const ScenarioResult& r : results) {
    out += std::to_string(r.config.id);
    out += ',';
    out += table2_algorithm(r.config.id);
    out += ',';
    out += table2_activation(r.config.id);
    out += ',';
    out += r.impact.tag;
    out += ',';
    out += fmt(r.median_degradation);
    out += ',';
    out += r.median_s1 ? fmt(*r.median_s1) : std::string("");
    out += '\n';
  }
  return out;
}

std::string compensation_csv(const CompensationReport& report) {
  std::string out = "layer,index,distance,delta,share\n";
  for (const auto& s : report.survivors) {
    out += std::to_string(report.hidden_layer);
    out += ',';
    out += std::to_string(s.index);
    out += ',';
    out += std::to_string(s.distance);
    out += ',';
    out += fmt(s.delta);
    out += ',';
    out += s.share ? fmt(*s.share) : std::string("");
    out += '\n';
  }
  return out;
}

namespace {

void require_key(const json& j, const char* key, const char* where,
                 std::vector<std::string>& issues) {
  if (!j.contains(key)) issues.push_back(std::string(where) + " is missing key '" + key + "'");
}

}  // namespace

std::vector<std::string> validate_scenario_report(const json& report) {
  std::vector<std::string> issues;
  for (const char* key : {"tool_version", "config", "config_hash", "death_step", "fold_plan",
                          "per_seed", "ok_seeds", "median", "impact", "s1_bootstrap"})
    require_key(report, key, "report", issues);
  if (!issues.empty()) return issues;

  if (!report["per_seed"].is_array()) issues.push_back("per_seed must be an array");
  for (const auto& s : report["per_seed"]) {
    require_key(s, "seed", "per_seed entry", issues);
    require_key(s, "status", "per_seed entry", issues);
    if (!s.contains("status")) continue;
    const std::string status = s["status"].get<std::string>();
    if (status == "ok") {
      for (const char* key :
           {"baseline_final_loss", "lesioned_final_loss", "degradation", "compensation",
            "compensation_incoming", "telemetry", "snn", "lesion_fired", "twins_matched_at_death"})
        require_key(s, key, "ok per_seed entry", issues);
      for (const char* key : {"baseline_final_loss", "lesioned_final_loss", "degradation"}) {
        if (s.contains(key) && !s[key].is_null() && !s[key].is_number())
          issues.push_back(std::string("per_seed '") + key + "' must be a number or null");
        if (s.contains(key) && s[key].is_number() && !std::isfinite(s[key].get<double>()))
          issues.push_back(std::string("per_seed '") + key + "' must be finite");
      }
    } else if (status == "failed") {
      require_key(s, "error", "failed per_seed entry", issues);
    } else {
      issues.push_back("per_seed status must be 'ok' or 'failed'");
    }
  }
  const json& median = report["median"];
  for (const char* key : {"baseline_final_loss", "lesioned_final_loss", "degradation", "s1"})
    require_key(median, key, "median", issues);
  const json& impact = report["impact"];
  require_key(impact, "class", "impact", issues);
  require_key(impact, "thresholds", "impact", issues);
  if (impact.contains("class")) {
    const std::string tag = impact["class"].get<std::string>();
    if (tag != "Minor" && tag != "Moderate" && tag != "Severe" && tag != "Complex")
      issues.push_back("impact class must be Minor|Moderate|Severe|Complex");
  }
  const json& config = report["config"];
  for (const char* key : {"id", "engine", "algorithm", "activation", "layer_sizes", "lesion",
                          "train", "seeds", "data"})
    require_key(config, key, "config", issues);
  return issues;
}

std::string iso8601_utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace neurolesion
