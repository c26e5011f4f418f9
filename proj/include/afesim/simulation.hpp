#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afesim/afe.hpp"
#include "afesim/baseline.hpp"
#include "afesim/common.hpp"
#include "afesim/controller.hpp"
#include "afesim/converters.hpp"
#include "afesim/signals.hpp"

namespace afesim {

struct OutputConfig
{
  std::string trace = "trace.csv";
  std::string metrics = "metrics.txt";
  std::string events = "events.log";
};

/// Everything a run needs. The VREF DAC and ADC reference ranges follow
/// front_end.supply; call sync_references() after editing the supply.
struct SimConfig
{
  PhotocurrentScenario scenario;
  FrontEndConfig front_end;
  AdcSpec adc;
  Volts adc_noise_rms = 0.8e-3;
  CalibrationConfig controller;
  ContinuousCancelConfig baseline;
  OutputConfig output;

  void sync_references();
  /// Validates every section. Returns non-fatal warnings.
  std::vector<std::string> validate() const;
};

/// Time-indexed record of one run, one entry per simulation step.
struct SimTrace
{
  Seconds dt = 0.0;
  std::vector<Seconds> time;
  std::vector<Amperes> i_pd;
  std::vector<Amperes> i_ac_truth;
  std::vector<Amperes> i_offset_truth;
  std::vector<std::int64_t> idac_code;
  std::vector<std::int64_t> rf_code;
  std::vector<std::int64_t> vref_code;
  std::vector<Volts> v_out;
  std::vector<Volts> v_dc;
  std::vector<Volts> v_sig;
  std::vector<Volts> v_sig_baseline;
  std::vector<Phase> phase;
  std::vector<std::uint8_t> in_calibration;
  std::vector<std::uint8_t> saturated;
  EventLog events;

  std::size_t size() const { return time.size(); }
  void reserve(std::size_t n);
};

/// Simulated hardware behind the firmware's port. Holds the analog state and
/// the photocurrent of the current step.
class SimulatedFrontEnd : public FrontEndPort
{
public:
  SimulatedFrontEnd(FrontEndConfig cfg, AdcSpec adc, Volts adc_noise_rms, std::uint64_t seed, FrontEndState initial);

  std::int64_t read_vdc() override;
  bool rail_detect() override;
  void write_idac(std::int64_t code) override;
  void write_rf(std::int64_t code) override;
  void write_vref(std::int64_t code) override;
  void set_s1(bool closed) override;
  void select_s2(RefSource source) override;

  void set_photocurrent(Amperes i_pd) { i_pd_ = i_pd; }
  void advance(Seconds dt) { state_ = step(cfg_, state_, i_pd_, dt); }

  const FrontEndState& state() const { return state_; }
  FrontEndState& mutable_state() { return state_; }
  const FrontEndConfig& config() const { return cfg_; }

private:
  FrontEndConfig cfg_;
  AdcSpec adc_;
  Volts adc_noise_rms_;
  GaussianRng rng_;
  FrontEndState state_;
  Amperes i_pd_ = 0.0;
};

/// Runs the proposed chain and the continuous baseline side by side over the
/// synthesized photocurrent. Throws ConfigError on invalid configuration.
/// Configuration warnings are recorded as WARNING events at t = 0.
SimTrace simulate(const SimConfig& config);

/// Same, over a caller-provided photocurrent (used by tests that script the
/// input directly).
SimTrace simulate(const SimConfig& config, const PhotocurrentSeries& input);

}  // namespace afesim
