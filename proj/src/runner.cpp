#include "afesim/runner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include "afesim/metrics.hpp"
#include "afesim/scenario_file.hpp"

namespace afesim {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void put_real(std::string& line, double v)
{
  std::array<char, 32> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.8e", v);
  line.append(buf.data(), static_cast<std::size_t>(n));
}

std::string format_metric(double v)
{
  if (std::isnan(v)) {
    return "nan";
  }
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.9g", v);
  return buf.data();
}

std::string sanitize(std::string s)
{
  for (char& c : s) {
    if (c == '/' || c == '\\' || c == ' ' || c == ':') {
      c = '_';
    }
  }
  return s;
}

}  // namespace

const char* const kTraceHeader =
    "time_s,i_pd_A,i_ac_truth_A,i_offset_truth_A,idac_code,rf_code,vref_code,v_out_V,v_dc_V,v_sig_V,"
    "v_sig_baseline_V,phase,in_calibration,saturated";

MetricList compute_metrics(const SimConfig& config, const SimTrace& trace)
{
  const FrontEndConfig& fe = config.front_end;
  const Hertz f0 = config.scenario.ac.f0;
  MetricList m;
  m.emplace_back("samples", static_cast<double>(trace.size()));

  const bool reached_monitor = std::any_of(trace.events.begin(), trace.events.end(), [](const Event& e) {
    return e.kind == EventKind::phase && e.to == Phase::monitor;
  });
  m.emplace_back("monitor_reached", reached_monitor ? 1.0 : 0.0);

  const std::optional<Window> window = analysis_window(trace, f0);
  m.emplace_back("window_start_s", window ? trace.time[window->begin] : kNaN);
  m.emplace_back("window_end_s", window ? trace.time[window->end - 1] + trace.dt : kNaN);
  m.emplace_back("residual_dc_V", window ? residual_dc(trace, *window, fe.v_cm) : kNaN);
  m.emplace_back("residual_bound_V", fe.vref_dac_spec.lsb() + config.adc.base_lsb());

  double comp_time = kNaN;
  double comp_error = kNaN;
  try {
    const CompensationTime ct = compensation_time(trace.events);
    comp_time = ct.seconds;
    comp_error = ct.error ? 1.0 : 0.0;
  } catch (const std::invalid_argument&) {
  }
  m.emplace_back("compensation_time_s", comp_time);
  m.emplace_back("compensation_error", comp_error);

  const std::size_t at = window ? window->begin : trace.size() - 1;
  m.emplace_back("final_idac_code", static_cast<double>(trace.idac_code[at]));
  m.emplace_back("final_rf_code", static_cast<double>(trace.rf_code[at]));
  m.emplace_back("final_rf_ohm", fe.rf(trace.rf_code[at]));
  m.emplace_back("final_vref_code", static_cast<double>(trace.vref_code[at]));

  const bool has_ac = config.scenario.ac.amplitude_peak > 0.0;
  ShapeFidelity proposed{kNaN, kNaN, kNaN};
  ShapeFidelity base{kNaN, kNaN, kNaN};
  double writes = kNaN;
  double saturated = kNaN;
  if (window) {
    const std::span<const double> truth(trace.i_ac_truth.data() + window->begin, window->size());
    if (has_ac && static_cast<double>(window->size()) * trace.dt * f0 >= 3.0 - 1e-9) {
      const double scale = fe.polarity() * fe.rf(trace.rf_code[window->begin]) * fe.oa2_gain;
      proposed = shape_fidelity({trace.v_sig.data() + window->begin, window->size()}, truth, trace.dt, f0, scale);
      const double base_scale = fe.polarity() * fe.rf(config.baseline.rf_code) * fe.oa2_gain;
      base = shape_fidelity({trace.v_sig_baseline.data() + window->begin, window->size()}, truth, trace.dt, f0,
                            base_scale);
    }
    writes = static_cast<double>(
        hardware_touches(trace.events, trace.time[window->begin], trace.time[window->end - 1]));
    saturated = static_cast<double>(std::count(trace.saturated.begin() + static_cast<std::ptrdiff_t>(window->begin),
                                               trace.saturated.begin() + static_cast<std::ptrdiff_t>(window->end), 1));
  }
  m.emplace_back("pearson_r", proposed.pearson_r);
  m.emplace_back("lag_s", proposed.lag);
  m.emplace_back("phase_deg", proposed.phase_deg(f0));
  m.emplace_back("amplitude_ratio", proposed.amplitude_ratio);
  m.emplace_back("monitor_writes", writes);
  m.emplace_back("monitor_saturated_samples", saturated);
  m.emplace_back("baseline_pearson_r", base.pearson_r);
  m.emplace_back("baseline_lag_s", base.lag);
  m.emplace_back("baseline_phase_deg", base.phase_deg(f0));
  m.emplace_back("baseline_amplitude_ratio", base.amplitude_ratio);

  m.emplace_back("recal_events", static_cast<double>(count_events(trace.events, EventKind::recal)));
  m.emplace_back("warning_events", static_cast<double>(count_events(trace.events, EventKind::warning)));
  m.emplace_back("error_events", static_cast<double>(count_events(trace.events, EventKind::error)));
  return m;
}

std::optional<double> find_metric(const MetricList& metrics, const std::string& key)
{
  for (const auto& [k, v] : metrics) {
    if (k == key) {
      return v;
    }
  }
  return std::nullopt;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace)
{
  out << kTraceHeader << '\n';
  std::string line;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    line.clear();
    put_real(line, trace.time[k]);
    line += ',';
    put_real(line, trace.i_pd[k]);
    line += ',';
    put_real(line, trace.i_ac_truth[k]);
    line += ',';
    put_real(line, trace.i_offset_truth[k]);
    line += ',';
    line += std::to_string(trace.idac_code[k]);
    line += ',';
    line += std::to_string(trace.rf_code[k]);
    line += ',';
    line += std::to_string(trace.vref_code[k]);
    line += ',';
    put_real(line, trace.v_out[k]);
    line += ',';
    put_real(line, trace.v_dc[k]);
    line += ',';
    put_real(line, trace.v_sig[k]);
    line += ',';
    put_real(line, trace.v_sig_baseline[k]);
    line += ',';
    line += to_string(trace.phase[k]);
    line += trace.in_calibration[k] ? ",1" : ",0";
    line += trace.saturated[k] ? ",1\n" : ",0\n";
    out << line;
  }
}

void write_events(std::ostream& out, const EventLog& events)
{
  for (const auto& e : events) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.6f", e.time);
    out << buf.data() << '\t' << to_string(e.kind) << '\t' << e.detail << '\n';
  }
}

void write_metrics(std::ostream& out, const MetricList& metrics)
{
  for (const auto& [key, value] : metrics) {
    out << key << " = " << format_metric(value) << '\n';
  }
}

MetricList read_metrics(std::istream& in)
{
  MetricList metrics;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      continue;
    }
    const std::string value = line.substr(eq + 3);
    metrics.emplace_back(line.substr(0, eq), value == "nan" ? kNaN : std::stod(value));
  }
  return metrics;
}

int run(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir, const RunOptions& options,
        std::ostream& err)
{
  SimConfig config;
  SimTrace trace;
  try {
    config = load_scenario(scenario_path.string());
    for (const auto& o : options.overrides) {
      apply_override(config, o);
    }
    if (options.seed) {
      config.scenario.rng_seed = *options.seed;
    }
    trace = simulate(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const MetricList metrics = compute_metrics(config, trace);
  try {
    std::filesystem::create_directories(out_dir);
    std::ofstream trace_out(out_dir / config.output.trace);
    std::ofstream metrics_out(out_dir / config.output.metrics);
    std::ofstream events_out(out_dir / config.output.events);
    if (!trace_out || !metrics_out || !events_out) {
      err << "cannot write outputs into " << out_dir << '\n';
      return kExitRuntime;
    }
    write_trace_csv(trace_out, trace);
    write_metrics(metrics_out, metrics);
    write_events(events_out, trace.events);
  } catch (const std::filesystem::filesystem_error& e) {
    err << e.what() << '\n';
    return kExitRuntime;
  }

  for (const auto& e : trace.events) {
    if (e.kind == EventKind::warning) {
      err << "warning: t=" << e.time << " " << e.detail << '\n';
    }
  }
  bool controller_error = false;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::error) {
      err << "controller error: t=" << e.time << " [" << to_string(e.from) << "] " << e.detail << '\n';
      controller_error = true;
    }
  }
  return controller_error ? kExitControllerError : kExitOk;
}

int sweep(const std::filesystem::path& scenario_path, const std::string& key, const std::vector<std::string>& values,
          const std::filesystem::path& out_dir, const RunOptions& options, std::ostream& err)
{
  if (values.empty()) {
    err << "config error: sweep needs at least one value\n";
    return kExitConfig;
  }
  if (key.find('.') == std::string::npos) {
    err << "config error: sweep key must look like section.key, got '" << key << "'\n";
    return kExitConfig;
  }

  struct SubRun
  {
    std::filesystem::path dir;
    int exit_code = kExitOk;
    std::string log;
  };
  std::vector<SubRun> runs(values.size());

  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t first = 0; first < values.size(); first += workers) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = first; i < std::min(values.size(), first + workers); ++i) {
      runs[i].dir = out_dir / sanitize(key + "=" + values[i]);
      batch.push_back(std::async(std::launch::async, [&, i] {
        RunOptions sub = options;
        sub.overrides.push_back(key + "=" + values[i]);
        std::ostringstream log;
        runs[i].exit_code = run(scenario_path, runs[i].dir, sub, log);
        runs[i].log = log.str();
      }));
    }
    for (auto& f : batch) {
      f.get();
    }
  }

  int worst = kExitOk;
  MetricList columns;
  std::vector<MetricList> results(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!runs[i].log.empty()) {
      err << "[" << key << "=" << values[i] << "]\n" << runs[i].log;
    }
    worst = std::max(worst, runs[i].exit_code);
    std::ifstream in(runs[i].dir / "metrics.txt");
    if (in) {
      results[i] = read_metrics(in);
      if (columns.empty()) {
        columns = results[i];
      }
    }
  }

  std::filesystem::create_directories(out_dir);
  std::ofstream summary(out_dir / "summary.csv");
  summary << "value,exit_code";
  for (const auto& [name, unused] : columns) {
    summary << ',' << name;
  }
  summary << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    summary << values[i] << ',' << runs[i].exit_code;
    for (const auto& [name, unused] : columns) {
      summary << ',';
      if (auto v = find_metric(results[i], name)) {
        summary << format_metric(*v);
      }
    }
    summary << '\n';
  }
  return worst;
}

}  // namespace afesim
