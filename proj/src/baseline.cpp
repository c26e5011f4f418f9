#include "afesim/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace afesim {

void ContinuousCancelConfig::validate() const
{
  if (!(fc_hp > 0.0) || !std::isfinite(fc_hp)) {
    throw ConfigError("baseline fc_hp must be positive");
  }
  if (rf_code < 0) {
    throw ConfigError("baseline rf_code must be >= 0");
  }
}

Seconds ContinuousCancelConfig::tau() const { return 1.0 / (2.0 * std::numbers::pi * fc_hp); }

Volts baseline_input(const FrontEndConfig& fe, const ContinuousCancelConfig& cfg, Amperes i_pd)
{
  return fe.v_cm + fe.polarity() * i_pd * fe.rf(cfg.rf_code);
}

ContinuousCancelState settled_baseline(Volts v_in) { return ContinuousCancelState{v_in}; }

ContinuousCancelOutput continuous_cancel_step(const FrontEndConfig& fe, const ContinuousCancelConfig& cfg,
                                              const ContinuousCancelState& state, Volts v_in, Seconds dt)
{
  if (!(dt > 0.0) || dt > 1.0 / (20.0 * cfg.fc_hp)) {
    throw ConfigError("continuous_cancel_step: dt must be in (0, 1/(20 fc_hp)]");
  }
  ContinuousCancelOutput out;
  out.state.tracked = state.tracked + (dt / cfg.tau()) * (v_in - state.tracked);
  out.v_tia = std::clamp(fe.v_cm + (v_in - out.state.tracked), 0.0, fe.supply);
  out.v_sig = oa2_output(fe, out.v_tia);
  return out;
}

}  // namespace afesim
