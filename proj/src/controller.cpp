#include "afesim/controller.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace afesim {
namespace {

// Tolerance for comparing controller time against deadlines built from sums
// of float seconds.
constexpr Seconds kTimeEps = 1e-9;

std::string fmt(const char* format, double value)
{
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), format, value);
  return buf.data();
}

std::string describe_ref(RefSource source) { return source == RefSource::v_cm ? "v_cm" : "vref_dac"; }

}  // namespace

std::string_view to_string(Phase phase)
{
  switch (phase) {
    case Phase::idle:
      return "IDLE";
    case Phase::coarse_measure:
      return "COARSE_MEASURE";
    case Phase::coarse_set:
      return "COARSE_SET";
    case Phase::gain_raise:
      return "GAIN_RAISE";
    case Phase::fine_trim:
      return "FINE_TRIM";
    case Phase::monitor:
      return "MONITOR";
  }
  return "?";
}

std::optional<Phase> phase_from_string(std::string_view name)
{
  for (Phase p : {Phase::idle, Phase::coarse_measure, Phase::coarse_set, Phase::gain_raise, Phase::fine_trim,
                  Phase::monitor}) {
    if (to_string(p) == name) {
      return p;
    }
  }
  return std::nullopt;
}

bool is_allowed_transition(Phase from, Phase to)
{
  switch (from) {
    case Phase::idle:
      return to == Phase::coarse_measure;
    case Phase::coarse_measure:
      return to == Phase::coarse_set;
    case Phase::coarse_set:
      return to == Phase::gain_raise;
    case Phase::gain_raise:
      return to == Phase::fine_trim;
    case Phase::fine_trim:
      return to == Phase::monitor;
    case Phase::monitor:
      return to == Phase::coarse_measure;
  }
  return false;
}

std::string_view to_string(EventKind kind)
{
  switch (kind) {
    case EventKind::phase:
      return "PHASE";
    case EventKind::write:
      return "WRITE";
    case EventKind::switch_change:
      return "SWITCH";
    case EventKind::recal:
      return "RECAL";
    case EventKind::info:
      return "INFO";
    case EventKind::warning:
      return "WARNING";
    case EventKind::error:
      return "ERROR";
  }
  return "?";
}

void CalibrationConfig::validate(const FrontEndConfig& fe, const AdcSpec& adc, Seconds sim_dt) const
{
  if (!(v_dc_threshold > 4.0 * adc.base_lsb())) {
    throw ConfigError("controller threshold must exceed 4 ADC LSB (" + fmt("%.6g", 4.0 * adc.base_lsb()) + " V)");
  }
  if (!(settle_factor >= 3.0)) {
    throw ConfigError("controller settle_factor must be >= 3");
  }
  if (!(controller_tick >= sim_dt)) {
    throw ConfigError("controller tick must be >= simulation dt");
  }
  if (rf_initial_code < 0 || rf_initial_code > fe.rf_spec.max_code() || rf_target_code < 0 ||
      rf_target_code > fe.rf_spec.max_code()) {
    throw ConfigError("controller RF codes must lie within the digipot range");
  }
  if (rf_target_code < rf_initial_code) {
    throw ConfigError("controller rf_target_code must be >= rf_initial_code");
  }
  if (fine_loop_max_iters < 1) {
    throw ConfigError("controller fine_loop_max_iters must be >= 1");
  }
  if (!(debounce_factor >= 0.0)) {
    throw ConfigError("controller debounce_factor must be >= 0");
  }
}

Volts ripple_bound(const FrontEndConfig& fe, const CalibrationConfig& cfg, const AcSignalSpec& ac)
{
  const double ratio = ac.f0 / fe.lpf_cutoff();
  return ac.amplitude_peak * fe.rf(cfg.rf_target_code) / std::sqrt(1.0 + ratio * ratio);
}

std::vector<std::string> threshold_warnings(const FrontEndConfig& fe, const CalibrationConfig& cfg,
                                            const AcSignalSpec& ac)
{
  std::vector<std::string> warnings;
  const Volts bound = ripple_bound(fe, cfg, ac);
  if (cfg.v_dc_threshold < 2.0 * bound) {
    warnings.push_back("threshold " + fmt("%.6g", cfg.v_dc_threshold) + " V is below twice the LPF ripple bound " +
                       fmt("%.6g", bound) + " V; the watchdog may trigger on the AC signal");
  }
  return warnings;
}

Controller::Controller(FrontEndConfig fe, AdcSpec adc, CalibrationConfig cfg)
    : fe_(std::move(fe)), adc_(adc), cfg_(cfg)
{
  state_.rf_code = cfg_.rf_initial_code;
  state_.vref_code = quantize(fe_.vref_dac_spec, fe_.v_cm);
}

bool Controller::in_calibration() const
{
  switch (state_.phase) {
    case Phase::coarse_measure:
    case Phase::coarse_set:
    case Phase::gain_raise:
    case Phase::fine_trim:
      return true;
    case Phase::idle:
    case Phase::monitor:
      return false;
  }
  return false;
}

void Controller::tick(Seconds t, FrontEndPort& port)
{
  switch (state_.phase) {
    case Phase::idle:
      if (cfg_.enabled) {
        begin_calibration(t, port);
      }
      break;
    case Phase::coarse_measure:
      if (wait_elapsed(t)) {
        if (coarse_calibrate(t, port)) {
          raise_gain(t, port);
          enter_fine_trim(t, port);
        }
      }
      break;
    case Phase::fine_trim:
      if (wait_elapsed(t)) {
        fine_trim(t, port);
      }
      break;
    case Phase::monitor:
      monitor_tick(t, port);
      break;
    case Phase::coarse_set:
    case Phase::gain_raise:
      // Both complete within the tick that entered them.
      throw std::logic_error("controller ticked in transient phase " + std::string(to_string(state_.phase)));
  }
}

std::optional<CoarseResult> Controller::coarse_calibrate(Seconds t, FrontEndPort& port)
{
  require_phase(Phase::coarse_measure, "coarse_calibrate");

  const std::int64_t code = port.read_vdc();
  const Volts v_dc = adc_.to_volts(code);
  const bool rail = port.rail_detect() || v_dc >= fe_.supply - adc_.base_lsb() || v_dc <= adc_.base_lsb();

  if (rail) {
    if (state_.rf_code > 0) {
      const std::int64_t lower = state_.rf_code / 10;
      log(t, EventKind::warning,
          "saturated during offset measurement at rf_code=" + std::to_string(state_.rf_code) +
              "; retrying at rf_code=" + std::to_string(lower));
      do_write_rf(t, port, lower);
      state_.wait_until = t + settle_time();
      return std::nullopt;
    }
    log(t, EventKind::error, "offset exceeds measurable range at the lowest RF; estimate is a lower bound");
  }

  const Amperes estimate = fe_.polarity() * (v_dc - fe_.v_cm) / fe_.rf(state_.rf_code);
  state_.latched_idc_estimate = estimate;
  log(t, EventKind::info, "offset estimate " + fmt("%.9g", estimate) + " A from v_dc=" + fmt("%.9g", v_dc) + " V");
  transition(t, Phase::coarse_set);

  const auto& idac = fe_.idac_spec.quant;
  const Amperes lowest = std::min(dequantize(idac, 0), dequantize(idac, idac.max_code()));
  const Amperes highest = std::max(dequantize(idac, 0), dequantize(idac, idac.max_code()));

  CoarseResult result{state_.idac_code, estimate, false};
  if (estimate < 0.5 * lowest) {
    // Leaving the sink disconnected is closer to the estimate than any code.
    log(t, EventKind::info, "offset below half the smallest iDAC current; sink left disconnected");
  } else {
    if (estimate < lowest || estimate > highest) {
      log(t, EventKind::warning,
          "offset estimate " + fmt("%.6g", estimate) + " A outside iDAC range; clamped to nearest code");
    }
    result.idac_code = quantize(idac, estimate);
    result.sink_enabled = true;
    do_write_idac(t, port, result.idac_code);
    do_set_s1(t, port, true);
  }
  transition(t, Phase::gain_raise);
  return result;
}

std::int64_t Controller::raise_gain(Seconds t, FrontEndPort& port)
{
  require_phase(Phase::gain_raise, "raise_gain");

  const std::int64_t start = state_.rf_code;
  const std::int64_t target = std::max(cfg_.rf_target_code, start);
  std::int64_t good = start;
  std::optional<std::int64_t> bad;

  if (port.rail_detect()) {
    bad = start;
  } else {
    while (good < target) {
      std::int64_t next = quantize(fe_.rf_spec, 2.0 * fe_.rf(good));
      next = std::clamp(next, good + 1, target);
      do_write_rf(t, port, next);
      if (port.rail_detect()) {
        bad = next;
        break;
      }
      good = next;
    }
    if (bad) {
      while (*bad - good > 1) {
        const std::int64_t mid = good + (*bad - good) / 2;
        do_write_rf(t, port, mid);
        if (port.rail_detect()) {
          bad = mid;
        } else {
          good = mid;
        }
      }
    }
  }

  if (state_.rf_code != good) {
    do_write_rf(t, port, good);
  }
  if (good == start && bad && target > start) {
    log(t, EventKind::error,
        "cannot raise gain above rf_code=" + std::to_string(start) +
            " without saturation; residual offset too large for the iDAC resolution");
  }
  return good;
}

void Controller::enter_fine_trim(Seconds t, FrontEndPort& port)
{
  transition(t, Phase::fine_trim);
  do_write_vref(t, port, quantize(fe_.vref_dac_spec, fe_.v_cm));
  do_select_s2(t, port, RefSource::vref_dac);
  state_.trim_reads = 0;
  state_.last_trim_correction = 0;
  state_.wait_until = t + settle_time();
}

bool Controller::fine_trim(Seconds t, FrontEndPort& port)
{
  require_phase(Phase::fine_trim, "fine_trim");

  const auto& dac = fe_.vref_dac_spec;
  const Volts v_dc = adc_.to_volts(port.read_vdc());
  const Volts error = v_dc - fe_.v_cm;
  const Volts tolerance = std::max(adc_.effective_lsb(), 0.5 * dac.lsb());
  ++state_.trim_reads;

  auto finish = [&] {
    transition(t, Phase::monitor);
    state_.exceed_since.reset();
    return true;
  };

  if (std::abs(error) <= tolerance) {
    return finish();
  }
  const auto correction = static_cast<std::int64_t>(round_half_away(error / dac.lsb()));
  if (correction == 0) {
    return finish();
  }
  if (std::abs(correction) == 1 && correction == -state_.last_trim_correction) {
    log(t, EventKind::info, "VREF trim dithering between adjacent codes; keeping residual " + fmt("%.6g", error) + " V");
    return finish();
  }
  const std::int64_t next = std::clamp(state_.vref_code - correction, std::int64_t{0}, dac.max_code());
  if (next == state_.vref_code) {
    log(t, EventKind::error, "VREF trim out of DAC range at vref_code=" + std::to_string(next) +
                                 "; residual " + fmt("%.6g", error) + " V");
    return finish();
  }
  if (state_.trim_reads >= cfg_.fine_loop_max_iters) {
    log(t, EventKind::error, "VREF trim did not converge in " + std::to_string(cfg_.fine_loop_max_iters) +
                                 " iterations; residual " + fmt("%.6g", error) + " V");
    return finish();
  }
  do_write_vref(t, port, next);
  state_.last_trim_correction = correction;
  state_.wait_until = t + settle_time();
  return false;
}

void Controller::monitor_tick(Seconds t, FrontEndPort& port)
{
  require_phase(Phase::monitor, "monitor_tick");

  const Volts v_dc = adc_.to_volts(port.read_vdc());
  const Volts deviation = std::abs(v_dc - fe_.v_cm);
  if (deviation <= cfg_.v_dc_threshold) {
    state_.exceed_since.reset();
    return;
  }
  if (!state_.exceed_since) {
    state_.exceed_since = t;
  }
  const Seconds hold = cfg_.debounce ? cfg_.debounce_factor * fe_.tau() : 0.0;
  if (t - *state_.exceed_since + kTimeEps >= hold) {
    log(t, EventKind::recal,
        "|v_dc - v_cm| = " + fmt("%.6g", deviation) + " V above threshold since t=" + fmt("%.6f", *state_.exceed_since));
    begin_calibration(t, port);
  }
}

void Controller::begin_calibration(Seconds t, FrontEndPort& port)
{
  transition(t, Phase::coarse_measure);
  do_set_s1(t, port, false);
  do_select_s2(t, port, RefSource::v_cm);
  do_write_rf(t, port, cfg_.rf_initial_code);
  state_.exceed_since.reset();
  state_.wait_until = t + settle_time();
}

void Controller::transition(Seconds t, Phase to)
{
  const Phase from = state_.phase;
  if (!is_allowed_transition(from, to)) {
    throw std::logic_error("illegal phase transition " + std::string(to_string(from)) + " -> " +
                           std::string(to_string(to)));
  }
  state_.phase = to;
  Event e;
  e.time = t;
  e.kind = EventKind::phase;
  e.detail = std::string(to_string(from)) + "->" + std::string(to_string(to));
  e.from = from;
  e.to = to;
  state_.event_log.push_back(std::move(e));
}

void Controller::log(Seconds t, EventKind kind, std::string detail)
{
  Event e;
  e.time = t;
  e.kind = kind;
  e.detail = std::move(detail);
  e.from = e.to = state_.phase;
  state_.event_log.push_back(std::move(e));
}

void Controller::require_phase(Phase expected, const char* op) const
{
  if (state_.phase != expected) {
    throw std::logic_error(std::string(op) + " called in phase " + std::string(to_string(state_.phase)));
  }
}

bool Controller::wait_elapsed(Seconds t) const { return t + kTimeEps >= state_.wait_until; }

void Controller::do_write_idac(Seconds t, FrontEndPort& port, std::int64_t code)
{
  port.write_idac(code);
  state_.idac_code = code;
  state_.idac_written = true;
  log(t, EventKind::write, "idac_code=" + std::to_string(code) + " (" + fmt("%.6g", fe_.idac_spec.current(code)) + " A)");
}

void Controller::do_write_rf(Seconds t, FrontEndPort& port, std::int64_t code)
{
  port.write_rf(code);
  state_.rf_code = code;
  log(t, EventKind::write, "rf_code=" + std::to_string(code) + " (" + fmt("%.6g", fe_.rf(code)) + " ohm)");
}

void Controller::do_write_vref(Seconds t, FrontEndPort& port, std::int64_t code)
{
  port.write_vref(code);
  state_.vref_code = code;
  log(t, EventKind::write,
      "vref_code=" + std::to_string(code) + " (" + fmt("%.6g", dequantize(fe_.vref_dac_spec, code)) + " V)");
}

void Controller::do_set_s1(Seconds t, FrontEndPort& port, bool closed)
{
  if (closed && !state_.idac_written) {
    throw std::logic_error("S1 closed before an iDAC code was written");
  }
  port.set_s1(closed);
  state_.s1_closed = closed;
  log(t, EventKind::switch_change, closed ? "s1=closed" : "s1=open");
}

void Controller::do_select_s2(Seconds t, FrontEndPort& port, RefSource source)
{
  port.select_s2(source);
  state_.s2_sel = source;
  log(t, EventKind::switch_change, "s2=" + describe_ref(source));
}

}  // namespace afesim
