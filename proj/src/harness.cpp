#include "v2xcoex/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "v2xcoex/baselines.hpp"
#include "v2xcoex/rng.hpp"

namespace v2x {

using nlohmann::json;

const char* to_string(Mode mode) { return mode == Mode::kShared ? "shared" : "dedicated"; }
const char* to_string(Algorithm algorithm) { return algorithm == Algorithm::kDvrma ? "dvrma" : "greedy"; }

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = find(key)) out = convert<T>(*v, path(key));
  }

  template <typename T>
  void read_list(const std::string& key, std::vector<T>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) fail(path(key), "expected an array");
    out.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      out.push_back(convert<T>((*v)[i], path(key) + "[" + std::to_string(i) + "]"));
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(path(it.key()), "unknown key");
    }
  }

  template <typename T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(where, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(where, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) fail(where, "expected a non-negative integer");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(where, "expected an integer");
      return v.get<T>();
    } else {
      if (!v.is_number()) fail(where, "expected a number");
      return v.get<T>();
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Mode parse_mode(const std::string& s, const std::string& where) {
  if (s == "shared") return Mode::kShared;
  if (s == "dedicated") return Mode::kDedicated;
  ObjectReader::fail(where, "mode must be \"shared\" or \"dedicated\", got \"" + s + "\"");
}

Algorithm parse_algorithm(const std::string& s, const std::string& where) {
  if (s == "dvrma") return Algorithm::kDvrma;
  if (s == "greedy") return Algorithm::kGreedy;
  ObjectReader::fail(where, "algorithm must be \"dvrma\" or \"greedy\", got \"" + s + "\"");
}

void read_grid(ObjectReader& parent, RoadGrid& g) {
  const json* j = parent.find("grid");
  if (!j) return;
  ObjectReader r(*j, parent.path("grid"));
  r.read("arm_length_m", g.arm_length_m);
  r.read("lane_width_m", g.lane_width_m);
  r.read("lanes_per_direction", g.lanes_per_direction);
  r.finish();
}

void read_spectrum(ObjectReader& parent, Spectrum& s) {
  const json* j = parent.find("spectrum");
  if (!j) return;
  ObjectReader r(*j, parent.path("spectrum"));
  r.read("K", s.dedicated);
  r.read("K_u", s.unlicensed);
  r.read("T", s.subframes);
  r.read("subframe_s", s.subframe_s);
  r.read("S", s.max_resources_per_vehicle);
  r.read("Q", s.max_vehicles_per_resource);
  r.finish();
}

void read_phy(ObjectReader& parent, PhyParams& p) {
  const json* j = parent.find("phy");
  if (!j) return;
  ObjectReader r(*j, parent.path("phy"));
  double tx = watts_to_dbm(p.tx_power_w);
  double rx = watts_to_dbm(p.rx_threshold_w);
  double noise_density = -174.0;
  double gain = ratio_to_db(p.gain_factor);
  r.read("tx_power_dbm", tx);
  r.read("rx_threshold_dbm", rx);
  r.read("noise_dbm_per_hz", noise_density);
  r.read("gain_db", gain);
  r.read("alpha", p.alpha);
  r.read("bandwidth_hz", p.bandwidth_hz);
  r.read("waiting_interval_s", p.waiting_interval_s);
  r.read("carrier_hz", p.carrier_hz);
  r.finish();
  if (!(p.bandwidth_hz > 0)) ObjectReader::fail(r.path("bandwidth_hz"), "must be positive");
  p.tx_power_w = dbm_to_watts(tx);
  p.rx_threshold_w = dbm_to_watts(rx);
  p.noise_w = dbm_to_watts(noise_density + 10.0 * std::log10(p.bandwidth_hz));
  p.gain_factor = db_to_ratio(gain);
}

}  // namespace

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const char* path, const char* what) {
    if (!ok) ObjectReader::fail(path, what);
  };
  need(replications >= 1, "config.replications", "must be >= 1");
  need(!speeds_kmh.empty(), "config.sweep.speeds_kmh", "must not be empty");
  need(!lambdas.empty(), "config.sweep.lambdas", "must not be empty");
  need(!gamma_th_db.empty(), "config.sweep.gamma_th_db", "must not be empty");
  need(!modes.empty(), "config.sweep.modes", "must not be empty");
  need(!algorithms.empty(), "config.sweep.algorithms", "must not be empty");
  for (size_t i = 0; i < speeds_kmh.size(); ++i) {
    if (!(speeds_kmh[i] >= 15.0 && speeds_kmh[i] <= 60.0)) {
      ObjectReader::fail("config.sweep.speeds_kmh[" + std::to_string(i) + "]", "must lie in [15, 60]");
    }
  }
  for (size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0)) ObjectReader::fail("config.sweep.lambdas[" + std::to_string(i) + "]", "must be >= 0");
  }
  for (size_t i = 0; i < gamma_th_db.size(); ++i) {
    if (!std::isfinite(gamma_th_db[i])) {
      ObjectReader::fail("config.sweep.gamma_th_db[" + std::to_string(i) + "]", "must be finite");
    }
  }
  need(scenario.v2i >= 0 && scenario.v2v_pairs >= 0 && scenario.vanet >= 0, "config.scenario",
       "role counts must be non-negative");
  need(scenario.pairing_range_m > 0, "config.scenario.pairing_range_m", "must be positive");
  if (density) {
    need(density->fraction > 0 && density->fraction <= 1, "config.scenario.density.fraction", "must lie in (0, 1]");
    need(density->v2i_share >= 0 && density->v2v_share >= 0 && density->v2i_share + density->v2v_share <= 1,
         "config.scenario.density", "shares must be non-negative and sum to at most 1");
  }
  need(dvrma.max_processes >= 1, "config.dvrma.max_processes", "must be >= 1");
  try {
    scenario.spectrum.validate();
  } catch (const std::exception& e) {
    ObjectReader::fail("config.scenario.spectrum", e.what());
  }
  try {
    scenario.phy.validate();
  } catch (const std::exception& e) {
    ObjectReader::fail("config.phy", e.what());
  }
}

size_t ExperimentConfig::points() const {
  return speeds_kmh.size() * lambdas.size() * gamma_th_db.size() * modes.size() * algorithms.size();
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  ObjectReader root(doc, "config");

  if (const json* j = root.find("scenario")) {
    ObjectReader r(*j, "config.scenario");
    read_grid(r, c.scenario.grid);
    read_spectrum(r, c.scenario.spectrum);
    r.read("v2i", c.scenario.v2i);
    r.read("v2v_pairs", c.scenario.v2v_pairs);
    r.read("vanet", c.scenario.vanet);
    r.read("pairing_range_m", c.scenario.pairing_range_m);
    if (const json* d = r.find("density")) {
      ObjectReader dr(*d, r.path("density"));
      DensitySpec spec;
      dr.read("fraction", spec.fraction);
      dr.read("v2i_share", spec.v2i_share);
      dr.read("v2v_share", spec.v2v_share);
      dr.finish();
      c.density = spec;
    }
    r.finish();
  }
  read_phy(root, c.scenario.phy);

  if (const json* j = root.find("fading")) {
    const auto s = ObjectReader::convert<std::string>(*j, "config.fading");
    if (s == "rayleigh") {
      c.fading = Fading::kRayleigh;
    } else if (s == "unit") {
      c.fading = Fading::kUnit;
    } else {
      ObjectReader::fail("config.fading", "must be \"rayleigh\" or \"unit\"");
    }
  }
  if (const json* j = root.find("dvrma")) {
    ObjectReader r(*j, "config.dvrma");
    std::string key = "matched_set";
    r.read("memo_key", key);
    if (key == "subframe_state") {
      c.dvrma.memo_key = IncompatibleKey::kSubframeState;
    } else if (key == "matched_set") {
      c.dvrma.memo_key = IncompatibleKey::kMatchedSet;
    } else {
      ObjectReader::fail(r.path("memo_key"), "must be \"subframe_state\" or \"matched_set\"");
    }
    r.read("max_processes", c.dvrma.max_processes);
    r.finish();
  }
  if (const json* j = root.find("sweep")) {
    ObjectReader r(*j, "config.sweep");
    r.read_list("speeds_kmh", c.speeds_kmh);
    r.read_list("lambdas", c.lambdas);
    r.read_list("gamma_th_db", c.gamma_th_db);
    std::vector<std::string> names;
    if (r.find("modes")) {
      r.read_list("modes", names);
      c.modes.clear();
      for (size_t i = 0; i < names.size(); ++i) {
        c.modes.push_back(parse_mode(names[i], r.path("modes") + "[" + std::to_string(i) + "]"));
      }
    }
    names.clear();
    if (r.find("algorithms")) {
      r.read_list("algorithms", names);
      c.algorithms.clear();
      for (size_t i = 0; i < names.size(); ++i) {
        c.algorithms.push_back(parse_algorithm(names[i], r.path("algorithms") + "[" + std::to_string(i) + "]"));
      }
    }
    r.finish();
  }
  root.read("replications", c.replications);
  root.read("master_seed", c.master_seed);
  root.read("output", c.output);
  root.read("trace", c.trace);
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(doc);
}

int point_index(const ExperimentConfig& c, size_t speed, size_t lambda, size_t gamma, size_t mode,
                size_t algorithm) {
  size_t idx = speed;
  idx = idx * c.lambdas.size() + lambda;
  idx = idx * c.gamma_th_db.size() + gamma;
  idx = idx * c.modes.size() + mode;
  idx = idx * c.algorithms.size() + algorithm;
  return static_cast<int>(idx);
}

std::uint64_t child_seed(std::uint64_t master, size_t speed_index, int replication, int replications) {
  // splitmix64 is a bijection, so distinct offsets map to distinct seeds.
  const std::uint64_t offset = static_cast<std::uint64_t>(speed_index) * static_cast<std::uint64_t>(replications) +
                               static_cast<std::uint64_t>(replication);
  return splitmix64(master + offset);
}

ScenarioConfig scenario_config_at(const ExperimentConfig& config, double speed_kmh) {
  ScenarioConfig sc = config.scenario;
  sc.speed_kmh = speed_kmh;
  if (config.density) {
    const auto counts = counts_from_density(sc.grid, speed_kmh, config.density->fraction, config.density->v2i_share,
                                            config.density->v2v_share);
    sc.v2i = counts.v2i;
    sc.v2v_pairs = counts.v2v_pairs;
    sc.vanet = counts.vanet;
  }
  return sc;
}

namespace {

struct Task {
  size_t speed = 0;
  int replication = 0;
};

struct TaskOutput {
  std::vector<ResultRow> rows;
  std::vector<TraceRecord> traces;
};

void ensure_feasible(const Allocation& alloc, const Scenario& scenario, const ResultRow& row) {
  const auto violations = check_constraints(alloc, scenario);
  if (!violations.empty()) {
    throw std::logic_error("point " + std::to_string(row.point_index) + " replication " +
                           std::to_string(row.replication) + ": " + violations.front().message);
  }
}

TaskOutput run_task(const ExperimentConfig& config, const Task& task) {
  TaskOutput out;
  const double speed = config.speeds_kmh[task.speed];
  const std::uint64_t seed = child_seed(config.master_seed, task.speed, task.replication, config.replications);
  const Scenario base = generate_urban(scenario_config_at(config, speed), seed);

  for (size_t gi = 0; gi < config.gamma_th_db.size(); ++gi) {
    Scenario with_gamma = base;
    with_gamma.phy.sinr_threshold = db_to_ratio(config.gamma_th_db[gi]);
    for (size_t mi = 0; mi < config.modes.size(); ++mi) {
      const Scenario view = config.modes[mi] == Mode::kShared ? with_gamma : dedicated_view(with_gamma);
      const ChannelState cs = make_channel_state(view, seed, config.fading);
      const double max_radius = cs.radius.empty() ? 0.0 : *std::max_element(cs.radius.begin(), cs.radius.end());
      const double map_area = view.map_area(max_radius) * view.spectrum.subframes;

      for (size_t li = 0; li < config.lambdas.size(); ++li) {
        const double lambda = config.lambdas[li];
        for (size_t ai = 0; ai < config.algorithms.size(); ++ai) {
          ResultRow row;
          row.point_index = point_index(config, task.speed, li, gi, mi, ai);
          row.speed_kmh = speed;
          row.lambda = lambda;
          row.gamma_th_db = config.gamma_th_db[gi];
          row.mode = config.modes[mi];
          row.algorithm = config.algorithms[ai];
          row.replication = task.replication;
          row.seed = seed;
          row.users = cs.users();

          const auto start = std::chrono::steady_clock::now();
          Allocation alloc;
          if (row.algorithm == Algorithm::kDvrma) {
            DvrmaResult res = run_dvrma(view, cs, lambda, seed, config.dvrma);
            row.proposal_count = res.proposals;
            row.process_count = res.processes;
            if (config.trace) {
              for (const auto& t : res.trace) out.traces.push_back({row.point_index, row.replication, t});
            }
            alloc = std::move(res.matching);
          } else {
            alloc = run_greedy(view, cs).matching;
          }
          row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

          ensure_feasible(alloc, view, row);
          const auto obj = objective(alloc, cs, lambda);
          row.active_count = obj.active_count;
          row.split = active_split(alloc, cs);
          row.interference_area = obj.interference_area;
          row.interference_ratio = map_area > 0 ? std::min(1.0, obj.interference_area / map_area) : 0.0;
          row.objective = obj.value;
          out.rows.push_back(row);
        }
      }
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_sweep(const ExperimentConfig& config, int jobs) {
  config.validate();
  std::vector<Task> tasks;
  for (size_t s = 0; s < config.speeds_kmh.size(); ++s) {
    for (int r = 0; r < config.replications; ++r) tasks.push_back({s, r});
  }
  std::vector<TaskOutput> outputs(tasks.size());
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      try {
        outputs[i] = run_task(config, tasks[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = tasks.size();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  ExperimentResult result;
  for (auto& o : outputs) {
    result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
    result.traces.insert(result.traces.end(), o.traces.begin(), o.traces.end());
  }
  std::sort(result.rows.begin(), result.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.point_index, a.replication) < std::tie(b.point_index, b.replication);
  });
  std::stable_sort(result.traces.begin(), result.traces.end(), [](const TraceRecord& a, const TraceRecord& b) {
    return std::tie(a.point_index, a.replication) < std::tie(b.point_index, b.replication);
  });
  return result;
}

int resolve_jobs(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--jobs: must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("V2X_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("V2X_JOBS: expected a positive integer");
    return static_cast<int>(v);
  }
  return 1;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "point_index",        "speed_kmh",        "lambda",           "gamma_th_db",          "mode",
      "algorithm",          "replication",      "seed",             "users",                "active_count",
      "active_v2i_dedicated", "active_v2i_unlicensed", "active_v2v_dedicated", "active_v2v_unlicensed",
      "unlicensed_assignments", "interference_area", "interference_ratio", "objective", "proposal_count",
      "process_count",      "wall_time_s"};
  return cols;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  const auto& cols = result_columns();
  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.point_index << ',' << fmt(r.speed_kmh) << ',' << fmt(r.lambda) << ',' << fmt(r.gamma_th_db) << ','
        << to_string(r.mode) << ',' << to_string(r.algorithm) << ',' << r.replication << ',' << r.seed << ','
        << r.users << ',' << r.active_count << ',' << r.split.v2i_dedicated << ',' << r.split.v2i_unlicensed << ','
        << r.split.v2v_dedicated << ',' << r.split.v2v_unlicensed << ',' << r.split.unlicensed_assignments << ','
        << fmt(r.interference_area) << ',' << fmt(r.interference_ratio) << ',' << fmt(r.objective) << ','
        << r.proposal_count << ',' << r.process_count << ',' << fmt(r.wall_time_s) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& traces) {
  out << "point_index,replication,process_index,proposals,active_count,objective_value\n";
  for (const auto& t : traces) {
    out << t.point_index << ',' << t.replication << ',' << t.row.process_index << ',' << t.row.proposals << ','
        << t.row.active_count << ',' << fmt(t.row.objective_value) << '\n';
  }
}

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw std::invalid_argument("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                  " fields, expected " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

void summarize(const CsvTable& table, const std::vector<std::string>& group_by, std::ostream& out) {
  if (table.rows.empty()) throw std::invalid_argument("summarize: no rows");
  std::vector<int> keys;
  for (const auto& g : group_by) {
    const int c = table.column(g);
    if (c < 0) throw std::invalid_argument("summarize: unknown column '" + g + "'");
    keys.push_back(c);
  }
  static const std::set<std::string> skip = {"point_index", "replication", "seed", "speed_kmh", "lambda",
                                             "gamma_th_db", "mode",        "algorithm"};
  std::vector<int> metrics;
  for (size_t c = 0; c < table.header.size(); ++c) {
    if (skip.count(table.header[c]) || std::find(keys.begin(), keys.end(), static_cast<int>(c)) != keys.end()) {
      continue;
    }
    metrics.push_back(static_cast<int>(c));
  }

  // Groups keep first-appearance order.
  std::vector<std::vector<std::string>> order;
  std::map<std::vector<std::string>, std::vector<size_t>> groups;
  for (size_t i = 0; i < table.rows.size(); ++i) {
    std::vector<std::string> key;
    for (int c : keys) key.push_back(table.rows[i][static_cast<size_t>(c)]);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(i);
  }

  for (size_t i = 0; i < group_by.size(); ++i) out << group_by[i] << ',';
  out << "n";
  for (int c : metrics) {
    out << ',' << table.header[static_cast<size_t>(c)] << "_mean," << table.header[static_cast<size_t>(c)] << "_std";
  }
  out << '\n';
  for (const auto& key : order) {
    const auto& idx = groups[key];
    for (const auto& k : key) out << k << ',';
    out << idx.size();
    for (int c : metrics) {
      double sum = 0.0;
      for (size_t i : idx) sum += std::stod(table.rows[i][static_cast<size_t>(c)]);
      const double mean = sum / static_cast<double>(idx.size());
      double ss = 0.0;
      for (size_t i : idx) {
        const double d = std::stod(table.rows[i][static_cast<size_t>(c)]) - mean;
        ss += d * d;
      }
      out << ',' << fmt(mean) << ',' << fmt(std::sqrt(ss / static_cast<double>(idx.size())));
    }
    out << '\n';
  }
}

}  // namespace v2x
