#include "afesim/simulation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace afesim {
namespace {

// Separates the ADC noise stream from the photocurrent noise stream.
constexpr std::uint64_t kAdcStreamSalt = 0x9E3779B97F4A7C15ULL;

void check_code(std::int64_t code, const QuantizerSpec& spec, const char* what)
{
  if (code < 0 || code > spec.max_code()) {
    throw std::out_of_range(std::string(what) + " code " + std::to_string(code) + " out of range");
  }
}

}  // namespace

void SimConfig::sync_references()
{
  front_end.vref_dac_spec.full_scale_lo = 0.0;
  front_end.vref_dac_spec.full_scale_hi = front_end.supply;
  adc.vref_lo = 0.0;
  adc.vref_hi = front_end.supply;
}

std::vector<std::string> SimConfig::validate() const
{
  std::vector<std::string> warnings = scenario.validate();
  front_end.validate();
  adc.validate();
  if (!(adc_noise_rms >= 0.0) || !std::isfinite(adc_noise_rms)) {
    throw ConfigError("adc_noise_rms must be >= 0");
  }
  controller.validate(front_end, adc, scenario.dt);
  baseline.validate();
  if (baseline.rf_code > front_end.rf_spec.max_code()) {
    throw ConfigError("baseline rf_code outside the digipot range");
  }
  if (scenario.dt > front_end.tau() / 10.0) {
    throw ConfigError("sim dt must be <= tau/10 for the LPF model");
  }
  if (scenario.dt > 1.0 / (20.0 * baseline.fc_hp)) {
    throw ConfigError("sim dt must be <= 1/(20 fc_hp) for the baseline model");
  }
  if (controller.enabled) {
    for (auto& w : threshold_warnings(front_end, controller, scenario.ac)) {
      warnings.push_back(std::move(w));
    }
  }
  return warnings;
}

void SimTrace::reserve(std::size_t n)
{
  time.reserve(n);
  i_pd.reserve(n);
  i_ac_truth.reserve(n);
  i_offset_truth.reserve(n);
  idac_code.reserve(n);
  rf_code.reserve(n);
  vref_code.reserve(n);
  v_out.reserve(n);
  v_dc.reserve(n);
  v_sig.reserve(n);
  v_sig_baseline.reserve(n);
  phase.reserve(n);
  in_calibration.reserve(n);
  saturated.reserve(n);
}

SimulatedFrontEnd::SimulatedFrontEnd(FrontEndConfig cfg, AdcSpec adc, Volts adc_noise_rms, std::uint64_t seed,
                                     FrontEndState initial)
    : cfg_(std::move(cfg)), adc_(adc), adc_noise_rms_(adc_noise_rms), rng_(seed), state_(initial)
{
}

std::int64_t SimulatedFrontEnd::read_vdc() { return adc_sample(adc_, state_.v_dc, adc_noise_rms_, rng_); }

bool SimulatedFrontEnd::rail_detect() { return tia_output(cfg_, state_, i_pd_).saturated; }

void SimulatedFrontEnd::write_idac(std::int64_t code)
{
  check_code(code, cfg_.idac_spec.quant, "idac");
  state_.idac_code = code;
}

void SimulatedFrontEnd::write_rf(std::int64_t code)
{
  check_code(code, cfg_.rf_spec, "rf");
  state_.rf_code = code;
}

void SimulatedFrontEnd::write_vref(std::int64_t code)
{
  check_code(code, cfg_.vref_dac_spec, "vref");
  state_.vref_code = code;
}

void SimulatedFrontEnd::set_s1(bool closed) { state_.s1_closed = closed; }

void SimulatedFrontEnd::select_s2(RefSource source) { state_.s2_sel = source; }

SimTrace simulate(const SimConfig& config) { return simulate(config, synthesize(config.scenario)); }

SimTrace simulate(const SimConfig& config, const PhotocurrentSeries& input)
{
  const std::vector<std::string> warnings = config.validate();
  const std::size_t n = input.total.size();
  if (n == 0) {
    throw ConfigError("empty photocurrent series");
  }
  const Seconds dt = config.scenario.dt;
  const FrontEndConfig& fe = config.front_end;

  SimulatedFrontEnd hw(fe, config.adc, config.adc_noise_rms, config.scenario.rng_seed ^ kAdcStreamSalt,
                       settled_state(fe, input.total[0], config.controller.rf_initial_code));
  Controller controller(fe, config.adc, config.controller);
  ContinuousCancelState servo = settled_baseline(baseline_input(fe, config.baseline, input.total[0]));

  const auto tick_steps = std::max<long long>(1, std::llround(config.controller.controller_tick / dt));

  SimTrace trace;
  trace.dt = dt;
  trace.reserve(n);
  for (const auto& w : warnings) {
    trace.events.push_back(Event{0.0, EventKind::warning, w, Phase::idle, Phase::idle});
  }

  for (std::size_t k = 0; k < n; ++k) {
    const Seconds t = static_cast<double>(k) * dt;
    const Amperes i_pd = input.total[k];
    hw.set_photocurrent(i_pd);
    if (static_cast<long long>(k) % tick_steps == 0) {
      controller.tick(t, hw);
    }
    hw.advance(dt);
    const auto base = continuous_cancel_step(fe, config.baseline, servo, baseline_input(fe, config.baseline, i_pd), dt);
    servo = base.state;

    const FrontEndState& s = hw.state();
    trace.time.push_back(t);
    trace.i_pd.push_back(i_pd);
    trace.i_ac_truth.push_back(input.ac[k]);
    trace.i_offset_truth.push_back(input.offset_at(k));
    trace.idac_code.push_back(s.idac_code);
    trace.rf_code.push_back(s.rf_code);
    trace.vref_code.push_back(s.vref_code);
    trace.v_out.push_back(s.v_out);
    trace.v_dc.push_back(s.v_dc);
    trace.v_sig.push_back(s.v_sig);
    trace.v_sig_baseline.push_back(base.v_sig);
    trace.phase.push_back(controller.phase());
    trace.in_calibration.push_back(controller.in_calibration() ? 1 : 0);
    trace.saturated.push_back(s.saturated ? 1 : 0);
  }

  trace.events.insert(trace.events.end(), controller.events().begin(), controller.events().end());
  return trace;
}

}  // namespace afesim
