#include "afesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace afesim {
namespace {

double mean_of(std::span<const double> x)
{
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace

Volts residual_dc(const SimTrace& trace, Window window, Volts v_cm)
{
  if (window.begin >= window.end || window.end > trace.size()) {
    throw std::invalid_argument("residual_dc: empty or out-of-range window");
  }
  for (std::size_t k = window.begin; k < window.end; ++k) {
    if (trace.phase[k] != Phase::monitor || trace.in_calibration[k] != 0) {
      throw std::invalid_argument("residual_dc: window overlaps calibration at t=" + std::to_string(trace.time[k]));
    }
  }
  const std::span<const double> v(trace.v_out.data() + window.begin, window.size());
  return std::abs(mean_of(v) - v_cm);
}

ShapeFidelity shape_fidelity(std::span<const double> recovered, std::span<const double> truth, Seconds dt, Hertz f0,
                             double scale)
{
  if (recovered.size() != truth.size()) {
    throw std::invalid_argument("shape_fidelity: series lengths differ");
  }
  if (!(dt > 0.0) || !(f0 > 0.0)) {
    throw std::invalid_argument("shape_fidelity: dt and f0 must be positive");
  }
  const std::size_t n = recovered.size();
  if (static_cast<double>(n) * dt * f0 < 3.0 - 1e-9) {
    throw std::invalid_argument("shape_fidelity: fewer than 3 beats of data");
  }

  const double mr = mean_of(recovered);
  const double mt = mean_of(truth);
  std::vector<double> r(n);
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) {
    r[k] = recovered[k] - mr;
    s[k] = (truth[k] - mt) * scale;
  }

  double srr = 0.0;
  double sss = 0.0;
  double srs = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    srr += r[k] * r[k];
    sss += s[k] * s[k];
    srs += r[k] * s[k];
  }

  ShapeFidelity out;
  if (srr == 0.0 || sss == 0.0) {
    throw std::invalid_argument("shape_fidelity: constant series");
  }
  out.pearson_r = srs / (std::sqrt(srr) * std::sqrt(sss));
  out.amplitude_ratio = std::sqrt(srr) / std::sqrt(sss);

  // recovered[k] ~ truth[k - lag], circular: the window spans whole periods.
  const auto max_lag = static_cast<long long>(std::llround(0.5 / (f0 * dt)));
  const auto len = static_cast<long long>(n);
  double best = -std::numeric_limits<double>::infinity();
  long long best_lag = 0;
  for (long long lag = -max_lag; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (long long k = 0; k < len; ++k) {
      const long long j = ((k - lag) % len + len) % len;
      acc += r[static_cast<std::size_t>(k)] * s[static_cast<std::size_t>(j)];
    }
    // Ties go to the smaller |lag|.
    if (acc > best || (acc == best && std::llabs(lag) < std::llabs(best_lag))) {
      best = acc;
      best_lag = lag;
    }
  }
  out.lag = static_cast<double>(best_lag) * dt;
  return out;
}

CompensationTime compensation_time(const EventLog& log)
{
  std::optional<Seconds> start;
  bool error = false;
  for (const auto& e : log) {
    if (e.kind == EventKind::phase && e.to == Phase::coarse_measure && !start) {
      start = e.time;
      continue;
    }
    if (!start) {
      continue;
    }
    if (e.kind == EventKind::error) {
      error = true;
    }
    if (e.kind == EventKind::phase && e.to == Phase::monitor) {
      return {e.time - *start, error};
    }
  }
  throw std::invalid_argument("compensation_time: event log has no complete calibration pass");
}

std::optional<Window> analysis_window(const SimTrace& trace, Hertz f0)
{
  Window best;
  std::size_t k = 0;
  while (k < trace.size()) {
    if (trace.phase[k] != Phase::monitor) {
      ++k;
      continue;
    }
    const std::size_t begin = k;
    while (k < trace.size() && trace.phase[k] == Phase::monitor) {
      ++k;
    }
    if (k - begin > best.size()) {
      best = {begin, k};
    }
  }
  const double samples_per_period = 1.0 / (f0 * trace.dt);
  const auto periods = static_cast<std::size_t>(std::floor(static_cast<double>(best.size()) / samples_per_period));
  if (periods == 0) {
    return std::nullopt;
  }
  best.end = best.begin + static_cast<std::size_t>(std::llround(static_cast<double>(periods) * samples_per_period));
  return best;
}

std::size_t hardware_touches(const EventLog& log, Seconds t0, Seconds t1)
{
  return static_cast<std::size_t>(std::count_if(log.begin(), log.end(), [&](const Event& e) {
    return touches_hardware(e) && e.time >= t0 && e.time <= t1;
  }));
}

std::size_t count_events(const EventLog& log, EventKind kind)
{
  return static_cast<std::size_t>(
      std::count_if(log.begin(), log.end(), [kind](const Event& e) { return e.kind == kind; }));
}

}  // namespace afesim
