#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "neurolesion/data.hpp"
#include "neurolesion/report.hpp"
#include "neurolesion/scenario.hpp"
#include "neurolesion/version.hpp"

namespace fs = std::filesystem;
using namespace neurolesion;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot open for writing: " + path.string());
  out << content;
}

std::string sweep_compensation_csv(const ScenarioResult& result) {
  std::string out = "seed,layer,index,distance,delta,share\n";
  char buf[64];
  for (const SeedOutcome& o : result.outcomes) {
    if (!o.ok || !o.comp_outgoing) continue;
    for (const auto& s : o.comp_outgoing->survivors) {
      std::snprintf(buf, sizeof(buf), "%llu,%d,%d,%d,%.17g,",
                    static_cast<unsigned long long>(o.seed), o.comp_outgoing->hidden_layer,
                    s.index, s.distance, s.delta);
      out += buf;
      if (s.share) {
        std::snprintf(buf, sizeof(buf), "%.17g", *s.share);
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

void print_scenario_line(const ScenarioResult& r) {
  std::cout << "scenario " << r.config.id << ": impact=" << r.impact.tag
            << " median_degradation=" << r.median_degradation;
  if (r.median_s1) std::cout << " median_s1=" << *r.median_s1;
  std::cout << " ok_seeds=" << r.ok_seeds << "/" << r.outcomes.size() << "\n";
}

int do_run(int scenario_id, const SweepOptions& opts, const std::string& out_path,
           const std::string& comp_csv_path) {
  ScenarioConfig config = scenario_from_options(scenario_id, opts);
  ScenarioResult result = run_scenario(config);
  write_file(out_path, scenario_report_text(result));
  if (!comp_csv_path.empty()) {
    const SeedOutcome* first_ok = nullptr;
    for (const auto& o : result.outcomes)
      if (o.ok && o.comp_outgoing) {
        first_ok = &o;
        break;
      }
    if (first_ok != nullptr) write_file(comp_csv_path, compensation_csv(*first_ok->comp_outgoing));
  }
  print_scenario_line(result);
  std::cout << "report written to " << out_path << "\n";
  return 0;
}

int do_sweep(const SweepOptions& opts, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<ScenarioResult> results = sweep_all(opts);
  for (const ScenarioResult& r : results) {
    const std::string stem = "scenario_" + std::to_string(r.config.id);
    write_file(fs::path(out_dir) / (stem + ".json"), scenario_report_text(r));
    write_file(fs::path(out_dir) / (stem + "_compensation.csv"), sweep_compensation_csv(r));
    print_scenario_line(r);
  }
  write_file(fs::path(out_dir) / "summary.json", summary_to_json(results).dump(2) + "\n");
  write_file(fs::path(out_dir) / "summary.csv", summary_csv(results));
  std::cout << "sweep written to " << out_dir << "\n";
  return 0;
}

int do_summarize(const std::string& dir) {
  std::vector<nlohmann::json> reports;
  for (int id = 1; id <= 6; ++id) {
    fs::path p = fs::path(dir) / ("scenario_" + std::to_string(id) + ".json");
    if (!fs::exists(p)) continue;
    std::ifstream in(p, std::ios::binary);
    nlohmann::json j = nlohmann::json::parse(in);
    auto issues = validate_scenario_report(j);
    if (!issues.empty()) {
      std::cerr << p.string() << " failed schema validation:\n";
      for (const auto& issue : issues) std::cerr << "  - " << issue << "\n";
      throw RunError("invalid report in " + dir);
    }
    reports.push_back(std::move(j));
  }
  if (reports.empty()) throw ConfigError("no scenario_*.json reports found in " + dir);
  std::cout << "scenario  algorithm                   activation  impact    degradation  s1\n";
  for (const auto& j : reports) {
    const auto& cfg = j["config"];
    char line[160];
    const auto& median = j["median"];
    double deg = median["degradation"].is_number() ? median["degradation"].get<double>() : 0.0;
    std::string s1 = median["s1"].is_number() ? std::to_string(median["s1"].get<double>()) : "n/a";
    std::snprintf(line, sizeof(line), "%-9d %-27s %-11s %-9s %-12.5f %s",
                  cfg["id"].get<int>(), cfg["algorithm"].get<std::string>().c_str(),
                  cfg["activation"].get<std::string>().c_str(),
                  j["impact"]["class"].get<std::string>().c_str(), deg, s1.c_str());
    std::cout << line << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neurolesion: dead-neuron lesion experiments on dense and spiking networks"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  SweepOptions opts;
  int scenario_id = 1;
  std::string out_path;
  std::string comp_csv_path;

  CLI::App* run = app.add_subcommand("run", "run one scenario (baseline + lesioned twins)");
  run->add_option("--scenario", scenario_id, "scenario id, 1..6")->required()->check(CLI::Range(1, 6));
  run->add_option("--seeds", opts.seeds, "number of seeds")->check(CLI::PositiveNumber);
  run->add_option("--master-seed", opts.master_seed, "seed-list master seed");
  run->add_option("--data-seed", opts.data_seed, "dataset seed");
  run->add_option("--death-frac", opts.death_frac, "lesion step as a fraction of total steps");
  run->add_option("--epochs", opts.epochs)->check(CLI::PositiveNumber);
  run->add_option("--l2", opts.l2_lambda, "L2 penalty lambda");
  run->add_option("--keep", opts.dropout_keep, "dropout keep probability");
  run->add_option("--snn-T", opts.snn_T, "spiking window length")->check(CLI::PositiveNumber);
  run->add_option("--out", out_path, "report JSON path")->required();
  run->add_option("--comp-csv", comp_csv_path, "compensation CSV (first ok seed)");

  std::string sweep_dir;
  CLI::App* sweep = app.add_subcommand("sweep", "run all six scenarios");
  sweep->add_option("--seeds", opts.seeds)->check(CLI::PositiveNumber);
  sweep->add_option("--master-seed", opts.master_seed);
  sweep->add_option("--data-seed", opts.data_seed);
  sweep->add_option("--death-frac", opts.death_frac);
  sweep->add_option("--epochs", opts.epochs)->check(CLI::PositiveNumber);
  sweep->add_option("--l2", opts.l2_lambda);
  sweep->add_option("--keep", opts.dropout_keep);
  sweep->add_option("--snn-T", opts.snn_T)->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_dir, "output directory")->required();

  CLI::App* data_cmd = app.add_subcommand("data", "dataset utilities");
  std::uint64_t gen_seed = 99;
  std::string gen_out;
  DatasetParams gen_params;
  CLI::App* gen = data_cmd->add_subcommand("gen", "write the synthetic dataset as CSV");
  gen->add_option("--seed", gen_seed)->required();
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--base", gen_params.base);
  gen->add_option("--trend", gen_params.trend);
  gen->add_option("--seasonal", gen_params.seasonal);
  gen->add_option("--weekly", gen_params.weekly);
  gen->add_option("--sigma", gen_params.noise_sigma);

  CLI::App* report_cmd = app.add_subcommand("report", "report utilities");
  std::string summarize_dir;
  CLI::App* summarize = report_cmd->add_subcommand("summarize", "print a sweep summary table");
  summarize->add_option("dir", summarize_dir, "sweep output directory")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed()) return do_run(scenario_id, opts, out_path, comp_csv_path);
    if (sweep->parsed()) return do_sweep(opts, sweep_dir);
    if (data_cmd->parsed() && gen->parsed()) {
      write_file(gen_out, dataset_to_csv(generate_dataset(gen_seed, gen_params)));
      std::cout << "dataset written to " << gen_out << "\n";
      return 0;
    }
    if (report_cmd->parsed() && summarize->parsed()) return do_summarize(summarize_dir);
    std::cerr << "missing subcommand\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "run error: " << e.what() << "\n";
    return 2;
  }
}
