#pragma once

#include "slh/sim/clock.hpp"
#include "slh/sim/topology.hpp"
#include "slh/work.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace slh {

struct WriteSpec {
  std::string node;
  uint32_t per_day = 0;
  double emergency_rate = 0.02;
  double referral_rate = 0.05;
};

struct QuerySpec {
  std::string node;
  uint64_t day = 0;  // runs at the last second of this day
  std::string text;
};

// A parsed scenario script. Writes land on days [0, days); windows run for
// days + drain_days so the final day's records still get an uplink ride.
struct ScenarioSpec {
  std::string name = "scenario";
  uint64_t seed = 1;
  uint64_t days = 1;
  uint64_t drain_days = 1;
  Difficulty difficulty{16, 256};
  TopologySpec topology;
  std::vector<WriteSpec> writes;
  std::vector<QuerySpec> queries;
  std::filesystem::path dictionary;  // empty: queries expand reflexively only
};

// Line-oriented script, '#' comments. Keywords, one per line; nodes must be
// declared before link/writes/query lines that mention them:
//   scenario NAME
//   seed N | days N | drain N | difficulty D SCALE | dictionary PATH
//   node NAME tier T [parent NAME] [hashrate H] [power W] [uptime HOURS]
//   link CHILD [bps N] [loss F] [windows MIN MAX] [minutes LO HI] [continuous]
//   writes NODE PER_DAY [emergency F] [referral F]
//   query NODE DAY TEXT...
ScenarioSpec parse_scenario(std::string_view text);
ScenarioSpec load_scenario(const std::filesystem::path& path);

struct ScenarioMetrics {
  std::string name;
  uint64_t seed = 0;
  uint64_t days = 0;
  uint64_t horizon_seconds = 0;
  size_t nodes = 0;
  size_t links = 0;

  size_t records_created = 0;
  size_t records_delivered = 0;  // reached the top of their uplink chain
  size_t records_pending = 0;
  double max_propagation_seconds = 0;
  double mean_propagation_seconds = 0;

  size_t windows_executed = 0;
  size_t sync_sessions = 0;
  size_t sync_aborts = 0;
  size_t records_transferred = 0;
  size_t quarantined = 0;
  uint64_t bytes_on_wire = 0;
  double max_window_utilization = 0;  // transferred bits / window capacity
  bool all_links_converged = false;   // sync roots equal across every link

  std::map<std::string, double> energy_joules;  // by node name

  std::string csv;   // one row per event, time-ordered
  std::string json;  // flat summary
};

// Executes a scenario on a freshly built topology: record creation on the
// simulated clock (node clock skew shifts the stamps), sync sessions on
// every window opening with in-window retry after aborts, continuous links
// polled every 15 minutes, queries at end of their day. Deterministic:
// one seed fixes every byte of csv and json.
ScenarioMetrics run_scenario(const ScenarioSpec& spec);

}  // namespace slh
