#include "afesim/afe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace afesim {

void FrontEndConfig::validate() const
{
  if (!(supply > 0.0) || !std::isfinite(supply)) {
    throw ConfigError("supply must be positive");
  }
  if (!(v_cm > 0.0 && v_cm < supply)) {
    throw ConfigError("v_cm must lie strictly between 0 and supply");
  }
  if (!(rl > 0.0) || !(cl > 0.0)) {
    throw ConfigError("rl and cl must be positive");
  }
  if (!(oa2_gain >= 1.0)) {
    throw ConfigError("oa2_gain must be >= 1");
  }
  rf_spec.validate();
  if (!(rf_spec.full_scale_lo > 0.0)) {
    throw ConfigError("RF range must be positive");
  }
  idac_spec.validate();
  vref_dac_spec.validate();
}

Hertz FrontEndConfig::lpf_cutoff() const { return 1.0 / (2.0 * std::numbers::pi * tau()); }

FrontEndState settled_state(const FrontEndConfig& cfg, Amperes i_pd, std::int64_t rf_code)
{
  FrontEndState state;
  state.rf_code = rf_code;
  state.vref_code = quantize(cfg.vref_dac_spec, cfg.v_cm);
  const TiaResult tia = tia_output(cfg, state, i_pd);
  state.v_out = tia.v_out;
  state.saturated = tia.saturated;
  state.v_dc = tia.v_out;
  state.v_sig = oa2_output(cfg, tia.v_out);
  return state;
}

Volts reference_voltage(const FrontEndConfig& cfg, const FrontEndState& state)
{
  return state.s2_sel == RefSource::v_cm ? cfg.v_cm : dequantize(cfg.vref_dac_spec, state.vref_code);
}

Amperes compensation_current(const FrontEndConfig& cfg, const FrontEndState& state)
{
  return state.s1_closed ? cfg.idac_spec.current(state.idac_code) : 0.0;
}

TiaResult tia_output(const FrontEndConfig& cfg, const FrontEndState& state, Amperes i_pd)
{
  const Volts unclamped = reference_voltage(cfg, state) +
                          cfg.polarity() * (i_pd - compensation_current(cfg, state)) * cfg.rf(state.rf_code);
  if (unclamped > cfg.supply) {
    return {cfg.supply, true};
  }
  if (unclamped < 0.0) {
    return {0.0, true};
  }
  return {unclamped, false};
}

Volts lpf_step(const FrontEndConfig& cfg, Volts v_dc, Volts v_out, Seconds dt)
{
  const Seconds tau = cfg.tau();
  if (!(dt > 0.0) || dt > tau / 10.0) {
    throw ConfigError("lpf_step: dt must be in (0, tau/10]; dt=" + std::to_string(dt) + " tau=" + std::to_string(tau));
  }
  return v_dc + (dt / tau) * (v_out - v_dc);
}

Volts oa2_output(const FrontEndConfig& cfg, Volts v_out)
{
  return std::clamp(cfg.v_cm + cfg.oa2_gain * (v_out - cfg.v_cm), 0.0, cfg.supply);
}

FrontEndState step(const FrontEndConfig& cfg, const FrontEndState& state, Amperes i_pd, Seconds dt)
{
  FrontEndState next = state;
  const TiaResult tia = tia_output(cfg, state, i_pd);
  next.v_out = tia.v_out;
  next.saturated = tia.saturated;
  next.v_dc = lpf_step(cfg, state.v_dc, tia.v_out, dt);
  next.v_sig = oa2_output(cfg, tia.v_out);
  return next;
}

}  // namespace afesim
