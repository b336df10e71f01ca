#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "v2xcoex/matching.hpp"
#include "v2xcoex/scenario.hpp"
#include "v2xcoex/schedule.hpp"

namespace v2x {

// Validation failure; the message starts with the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Mode { kShared, kDedicated };
enum class Algorithm { kDvrma, kGreedy };

const char* to_string(Mode mode);
const char* to_string(Algorithm algorithm);

// Role counts derived from grid capacity at each speed.
struct DensitySpec {
  double fraction = 0.5;
  double v2i_share = 0.3;
  double v2v_share = 0.4;
};

struct ExperimentConfig {
  ScenarioConfig scenario;            // speed_kmh is overridden by the sweep
  std::optional<DensitySpec> density; // replaces the fixed counts when set
  Fading fading = Fading::kRayleigh;
  DvrmaOptions dvrma;

  std::vector<double> speeds_kmh{45.0};
  std::vector<double> lambdas{0.0};
  std::vector<double> gamma_th_db{0.0};
  std::vector<Mode> modes{Mode::kShared};
  std::vector<Algorithm> algorithms{Algorithm::kDvrma};

  int replications = 1;
  std::uint64_t master_seed = 1;
  std::string output = "results.csv";
  bool trace = false;

  void validate() const;
  size_t points() const;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

struct ResultRow {
  int point_index = 0;
  double speed_kmh = 0.0;
  double lambda = 0.0;
  double gamma_th_db = 0.0;
  Mode mode = Mode::kShared;
  Algorithm algorithm = Algorithm::kDvrma;
  int replication = 0;
  std::uint64_t seed = 0;
  int users = 0;
  long active_count = 0;
  ActiveSplit split;
  double interference_area = 0.0;
  double interference_ratio = 0.0;
  double objective = 0.0;
  long proposal_count = 0;
  int process_count = 0;
  double wall_time_s = 0.0;
};

struct TraceRecord {
  int point_index = 0;
  int replication = 0;
  TraceRow row;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;       // sorted by (point_index, replication)
  std::vector<TraceRecord> traces;   // only when config.trace
};

// Point index of (speed, lambda, gamma, mode, algorithm) indices, speed-major.
int point_index(const ExperimentConfig& config, size_t speed, size_t lambda, size_t gamma, size_t mode,
                size_t algorithm);

// Child seed of (speed index, replication). Every treatment at that speed and
// replication shares it, so runs are paired. Distinct inputs give distinct
// seeds.
std::uint64_t child_seed(std::uint64_t master, size_t speed_index, int replication, int replications);

// Scenario config used at the given speed.
ScenarioConfig scenario_config_at(const ExperimentConfig& config, double speed_kmh);

// Generates every (speed, replication) scenario once and runs all treatments on
// it. Every allocation is checked against the constraints; a violation throws
// std::logic_error.
ExperimentResult run_sweep(const ExperimentConfig& config, int jobs = 1);

// --jobs wins over V2X_JOBS, which wins over 1.
int resolve_jobs(std::optional<int> flag);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& traces);

const std::vector<std::string>& result_columns();

// Result CSV as a table of strings keyed by header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(std::istream& in);

// Per group: n, then mean and population std of every numeric metric column.
void summarize(const CsvTable& table, const std::vector<std::string>& group_by, std::ostream& out);

}  // namespace v2x
