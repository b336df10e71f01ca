#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "v2xcoex/baselines.hpp"
#include "v2xcoex/esss.hpp"
#include "v2xcoex/harness.hpp"
#include "v2xcoex/matching.hpp"
#include "v2xcoex/scenario.hpp"
#include "v2xcoex/schedule.hpp"

namespace {

using namespace v2x;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? config_from_json(nlohmann::json::object()) : load_config(path);
}

int cmd_simulate(const std::string& config_path, const std::string& out_path, std::optional<std::uint64_t> seed,
                 std::optional<int> jobs, const std::string& trace_path) {
  ExperimentConfig config = load_config(config_path);
  if (seed) config.master_seed = *seed;
  if (!out_path.empty()) config.output = out_path;
  if (!trace_path.empty()) config.trace = true;
  const ExperimentResult result = run_sweep(config, resolve_jobs(jobs));
  auto out = open_out(config.output);
  write_results_csv(out, result.rows);
  if (!trace_path.empty()) {
    auto tout = open_out(trace_path);
    write_trace_csv(tout, result.traces);
  }
  std::cerr << "wrote " << result.rows.size() << " rows to " << config.output << '\n';
  return 0;
}

int cmd_summarize(const std::string& in_path, const std::vector<std::string>& group_by, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error(in_path + ": cannot open");
  const CsvTable table = read_csv(in);
  if (out_path.empty()) {
    summarize(table, group_by, std::cout);
  } else {
    auto out = open_out(out_path);
    summarize(table, group_by, out);
  }
  return 0;
}

int cmd_export(const std::string& json_path, const std::string& config_path, std::uint64_t seed,
               std::optional<double> speed) {
  const ExperimentConfig config = config_or_default(config_path);
  const Scenario sc = generate_urban(scenario_config_at(config, speed.value_or(config.speeds_kmh.front())), seed);
  for (const auto& w : sc.warnings) std::cerr << "warning: " << w << '\n';
  auto out = open_out(json_path);
  out << to_json(sc).dump(2) << '\n';
  return 0;
}

int cmd_import(const std::string& json_path, const std::string& algorithm, double lambda, std::uint64_t seed,
               const std::string& out_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error(json_path + ": cannot open");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(json_path + ": " + e.what());
  }
  const Scenario sc = scenario_from_json(doc);
  std::cerr << sc.vehicles.size() << " vehicles, " << sc.cellular_users().size() << " cellular users\n";
  if (algorithm.empty()) return 0;

  const ChannelState cs = make_channel_state(sc, seed);
  Allocation alloc = algorithm == "greedy" ? run_greedy(sc, cs).matching : run_dvrma(sc, cs, lambda, seed).matching;
  const auto violations = check_constraints(alloc, sc);
  for (const auto& v : violations) std::cerr << "violation: " << v.message << '\n';
  const auto obj = objective(alloc, cs, lambda);
  std::cerr << "active " << obj.active_count << ", interference area " << obj.interference_area << '\n';
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    write_allocation_csv(out, alloc, cs);
  } else {
    write_allocation_csv(std::cout, alloc, cs);
  }
  return violations.empty() ? 0 : 1;
}

int cmd_esss(const std::string& config_path, std::uint64_t seed, double lambda, int cycles,
             const CoexistenceConfig& cc, const std::string& out_path) {
  const ExperimentConfig config = config_or_default(config_path);
  const Scenario sc = generate_urban(scenario_config_at(config, config.speeds_kmh.front()), seed);
  const CoexistenceResult res = run_coexistence(sc, lambda, cycles, seed, cc);
  if (!collision_free(res.timeline)) throw std::logic_error("esss: V2X unlicensed airtime overlaps a VANET period");
  if (out_path.empty()) {
    write_cycle_csv(std::cout, res.cycles);
  } else {
    auto out = open_out(out_path);
    write_cycle_csv(out, res.cycles);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cellular V2X / VANET coexistence simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, trace_path, in_path, json_path, algorithm;
  std::vector<std::string> group_by;
  std::optional<std::uint64_t> seed_opt;
  std::optional<int> jobs;
  std::optional<double> speed;
  std::uint64_t seed = 1;
  double lambda = 0.0;
  int cycles = 100;
  CoexistenceConfig cc;

  auto* sim = app.add_subcommand("simulate", "Run a parameter sweep and write the result CSV");
  sim->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_path, "Result CSV (overrides the config's output)");
  sim->add_option("--seed", seed_opt, "Master seed (overrides the config)");
  sim->add_option("--jobs", jobs, "Worker threads (default: $V2X_JOBS or 1)");
  sim->add_option("--trace", trace_path, "Also write the DV-RMA convergence trace CSV");

  auto* sum = app.add_subcommand("summarize", "Aggregate a result CSV by group");
  sum->add_option("--in", in_path, "Result CSV")->required()->check(CLI::ExistingFile);
  sum->add_option("--group-by", group_by, "Grouping columns")->delimiter(',')->required();
  sum->add_option("--out", out_path, "Summary CSV (default: stdout)");

  auto* scen = app.add_subcommand("scenario", "Export or import a scenario snapshot");
  scen->require_subcommand(1);
  auto* exp = scen->add_subcommand("export", "Generate a scenario and write it as JSON");
  exp->add_option("--json", json_path, "Output JSON")->required();
  exp->add_option("--config", config_path, "Experiment config for the scenario parameters");
  exp->add_option("--seed", seed, "Scenario seed");
  exp->add_option("--speed", speed, "Speed in km/h (default: first sweep speed)");
  auto* imp = scen->add_subcommand("import", "Validate a scenario JSON and optionally schedule it");
  imp->add_option("--json", json_path, "Input JSON")->required()->check(CLI::ExistingFile);
  imp->add_option("--algorithm", algorithm, "Schedule with dvrma or greedy")
      ->check(CLI::IsMember({"dvrma", "greedy"}));
  imp->add_option("--lambda", lambda, "Interference penalty")->check(CLI::NonNegativeNumber);
  imp->add_option("--seed", seed, "Fading and initialisation seed");
  imp->add_option("--out", out_path, "Allocation CSV (default: stdout)");

  auto* es = app.add_subcommand("esss", "Run duty cycles with channel sensing and write per-cycle metrics");
  es->add_option("--config", config_path, "Experiment config for the scenario parameters");
  es->add_option("--seed", seed, "Seed");
  es->add_option("--lambda", lambda, "Interference penalty")->check(CLI::NonNegativeNumber);
  es->add_option("--cycles", cycles, "Duty cycles")->check(CLI::PositiveNumber);
  es->add_option("--channels", cc.channels, "Unlicensed channels")->check(CLI::PositiveNumber);
  es->add_option("--p-busy", cc.p_busy, "VANET busy probability")->check(CLI::Range(0.0, 1.0));
  es->add_option("--adaptive-sps", cc.duty.adaptive_sps_cycles, "Adaptive period in SPS cycles (even)");
  es->add_option("--out", out_path, "Cycle CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(config_path, out_path, seed_opt, jobs, trace_path);
    if (*sum) return cmd_summarize(in_path, group_by, out_path);
    if (*exp) return cmd_export(json_path, config_path, seed, speed);
    if (*imp) return cmd_import(json_path, algorithm, lambda, seed, out_path);
    if (*es) return cmd_esss(config_path, seed, lambda, cycles, cc, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
