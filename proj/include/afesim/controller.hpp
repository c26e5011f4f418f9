#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afesim/afe.hpp"
#include "afesim/common.hpp"
#include "afesim/converters.hpp"
#include "afesim/signals.hpp"

namespace afesim {

enum class Phase
{
  idle,
  coarse_measure,
  coarse_set,
  gain_raise,
  fine_trim,
  monitor,
};

std::string_view to_string(Phase phase);
std::optional<Phase> phase_from_string(std::string_view name);

/// True for the edges of the calibration flow graph.
bool is_allowed_transition(Phase from, Phase to);

enum class EventKind
{
  phase,
  write,
  switch_change,
  recal,
  info,
  warning,
  error,
};

std::string_view to_string(EventKind kind);

struct Event
{
  Seconds time = 0.0;
  EventKind kind = EventKind::info;
  std::string detail;
  // Populated for EventKind::phase.
  Phase from = Phase::idle;
  Phase to = Phase::idle;
};

using EventLog = std::vector<Event>;

/// True for events that change the analog path (code writes, switch moves).
inline bool touches_hardware(const Event& e)
{
  return e.kind == EventKind::write || e.kind == EventKind::switch_change;
}

struct CalibrationConfig
{
  Volts v_dc_threshold = 0.050;
  double settle_factor = 5.0;  // LPF time constants to wait before trusting v_dc
  std::int64_t rf_initial_code = 0;
  std::int64_t rf_target_code = 255;
  Seconds controller_tick = 0.010;
  int fine_loop_max_iters = 8;
  bool debounce = true;
  double debounce_factor = 1.0;  // LPF time constants above threshold before RECAL
  bool enabled = true;

  /// Throws ConfigError on broken invariants.
  void validate(const FrontEndConfig& fe, const AdcSpec& adc, Seconds sim_dt) const;
};

/// Worst-case LPF ripple of the AC signal on v_dc at the target gain:
/// amplitude * RF(target) / sqrt(1 + (f0/fc)^2).
Volts ripple_bound(const FrontEndConfig& fe, const CalibrationConfig& cfg, const AcSignalSpec& ac);

/// Non-fatal configuration advice (threshold too close to the ripple bound).
std::vector<std::string> threshold_warnings(const FrontEndConfig& fe, const CalibrationConfig& cfg,
                                            const AcSignalSpec& ac);

/// The hardware as firmware sees it: one ADC channel on the LPF node, a rail
/// comparator on the TIA output, three code registers and two switches.
class FrontEndPort
{
public:
  virtual ~FrontEndPort() = default;

  /// Oversampled conversion of v_dc, at the ADC's effective resolution.
  virtual std::int64_t read_vdc() = 0;
  /// TIA output currently clamped at a rail.
  virtual bool rail_detect() = 0;
  virtual void write_idac(std::int64_t code) = 0;
  virtual void write_rf(std::int64_t code) = 0;
  virtual void write_vref(std::int64_t code) = 0;
  virtual void set_s1(bool closed) = 0;
  virtual void select_s2(RefSource source) = 0;
};

struct CalibrationState
{
  Phase phase = Phase::idle;
  Amperes latched_idc_estimate = 0.0;
  std::int64_t idac_code = 0;
  bool idac_written = false;
  bool s1_closed = false;
  RefSource s2_sel = RefSource::v_cm;
  std::int64_t rf_code = 0;
  std::int64_t vref_code = 0;
  EventLog event_log;

  // Bookkeeping for waits, the trim loop and the watchdog.
  Seconds wait_until = 0.0;
  int trim_reads = 0;
  std::int64_t last_trim_correction = 0;
  std::optional<Seconds> exceed_since;
};

struct CoarseResult
{
  std::int64_t idac_code;
  Amperes i_dc_estimate;
  bool sink_enabled;
};

/// Dual-loop discrete offset compensation firmware.
///
/// Coarse loop: measure the offset with the iDAC disconnected at low gain, sink
/// it with the nearest iDAC code, then raise RF as far as the residual allows.
/// Fine loop: trim the TIA reference with the VREF DAC until v_dc sits on V_cm.
/// In MONITOR the controller only reads; a threshold excursion that persists
/// for the debounce time triggers a full recalibration.
///
/// Every phase runs on serialized tick() calls. The settling waits are
/// measured in controller time, so the firmware never observes analog values
/// except through FrontEndPort.
class Controller
{
public:
  Controller(FrontEndConfig fe, AdcSpec adc, CalibrationConfig cfg);

  /// Advance the state machine. In IDLE an enabled controller starts a
  /// calibration pass.
  void tick(Seconds t, FrontEndPort& port);

  const CalibrationState& state() const { return state_; }
  const EventLog& events() const { return state_.event_log; }
  Phase phase() const { return state_.phase; }
  bool in_calibration() const;

  const CalibrationConfig& config() const { return cfg_; }
  Seconds settle_time() const { return cfg_.settle_factor * fe_.tau(); }

  /// Reads v_dc, estimates the offset from the nominal RF and sinks it with
  /// the nearest iDAC code. Pre: COARSE_MEASURE with the settling wait elapsed.
  /// Returns nullopt when the reading saturated and a lower-gain retry was
  /// scheduled instead.
  std::optional<CoarseResult> coarse_calibrate(Seconds t, FrontEndPort& port);

  /// Doubles RF toward the target code, then bisects back to the largest code
  /// whose TIA output stays off the rails. Pre: GAIN_RAISE.
  std::int64_t raise_gain(Seconds t, FrontEndPort& port);

  /// One read-and-correct iteration of the VREF loop. Pre: FINE_TRIM with the
  /// settling wait elapsed. Returns true once the loop has finished.
  bool fine_trim(Seconds t, FrontEndPort& port);

  /// Watchdog tick. Pre: MONITOR.
  void monitor_tick(Seconds t, FrontEndPort& port);

private:
  void transition(Seconds t, Phase to);
  void begin_calibration(Seconds t, FrontEndPort& port);
  void enter_fine_trim(Seconds t, FrontEndPort& port);
  void log(Seconds t, EventKind kind, std::string detail);
  void require_phase(Phase expected, const char* op) const;
  bool wait_elapsed(Seconds t) const;

  void do_write_idac(Seconds t, FrontEndPort& port, std::int64_t code);
  void do_write_rf(Seconds t, FrontEndPort& port, std::int64_t code);
  void do_write_vref(Seconds t, FrontEndPort& port, std::int64_t code);
  void do_set_s1(Seconds t, FrontEndPort& port, bool closed);
  void do_select_s2(Seconds t, FrontEndPort& port, RefSource source);

  FrontEndConfig fe_;
  AdcSpec adc_;
  CalibrationConfig cfg_;
  CalibrationState state_;
};

}  // namespace afesim
