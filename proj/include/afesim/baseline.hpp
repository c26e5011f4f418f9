#pragma once

#include <cstdint>

#include "afesim/afe.hpp"
#include "afesim/common.hpp"

namespace afesim {

/// Continuous DC servo: a first-order low-pass in the TIA feedback path that
/// keeps nulling whatever sits below fc_hp. Seen from the signal this is a
/// single-pole high-pass.
struct ContinuousCancelConfig
{
  Hertz fc_hp = 0.8;
  std::int64_t rf_code = 255;  // TIA gain used by the baseline chain

  void validate() const;
  Seconds tau() const;
};

struct ContinuousCancelState
{
  Volts tracked = 0.0;  // servo estimate of the open-loop TIA voltage
};

struct ContinuousCancelOutput
{
  ContinuousCancelState state;
  Volts v_tia;  // servo-corrected TIA output, rail-clamped
  Volts v_sig;  // after OA2
};

/// Open-loop TIA voltage v_cm + sign * i_pd * RF; the servo subtracts its
/// tracked copy of this before the rails apply.
Volts baseline_input(const FrontEndConfig& fe, const ContinuousCancelConfig& cfg, Amperes i_pd);

/// State initialised to a settled servo for the given open-loop voltage.
ContinuousCancelState settled_baseline(Volts v_in);

/// tracked += dt/tau * (v_in - tracked); v_sig = OA2(v_cm + v_in - tracked).
/// Throws ConfigError when dt > 1 / (20 fc_hp).
ContinuousCancelOutput continuous_cancel_step(const FrontEndConfig& fe, const ContinuousCancelConfig& cfg,
                                              const ContinuousCancelState& state, Volts v_in, Seconds dt);

}  // namespace afesim
