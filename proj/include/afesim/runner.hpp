#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "afesim/simulation.hpp"

namespace afesim {

/// Process exit codes of `run` and `sweep`.
enum ExitCode : int
{
  kExitOk = 0,
  kExitRuntime = 1,
  kExitConfig = 2,
  kExitControllerError = 3,
};

/// Ordered `key = value` metrics of one run.
using MetricList = std::vector<std::pair<std::string, double>>;

/// Summary metrics of a finished run; NaN where a metric does not apply
/// (no MONITOR window, no AC signal).
MetricList compute_metrics(const SimConfig& config, const SimTrace& trace);

std::optional<double> find_metric(const MetricList& metrics, const std::string& key);

/// CSV header of trace.csv.
extern const char* const kTraceHeader;

void write_trace_csv(std::ostream& out, const SimTrace& trace);
void write_events(std::ostream& out, const EventLog& events);
void write_metrics(std::ostream& out, const MetricList& metrics);
MetricList read_metrics(std::istream& in);

struct RunOptions
{
  std::vector<std::string> overrides;  // section.key=value
  std::optional<std::uint64_t> seed;
};

/// Loads the scenario, applies overrides, simulates and writes trace, metrics
/// and events into out_dir. Diagnostics go to `err`.
int run(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir, const RunOptions& options,
        std::ostream& err);

/// One `run` per value of section.key into out_dir/<key>=<value>/, plus
/// out_dir/summary.csv of metrics against the swept value. Sub-runs execute
/// in parallel. Returns the worst sub-run exit code.
int sweep(const std::filesystem::path& scenario_path, const std::string& key, const std::vector<std::string>& values,
          const std::filesystem::path& out_dir, const RunOptions& options, std::ostream& err);

}  // namespace afesim
