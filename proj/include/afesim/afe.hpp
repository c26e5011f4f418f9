#pragma once

#include <cstdint>

#include "afesim/common.hpp"
#include "afesim/converters.hpp"

namespace afesim {

/// TIA reference selector (switch S2).
enum class RefSource
{
  v_cm,
  vref_dac,
};

struct FrontEndConfig
{
  Volts supply = 3.3;
  Volts v_cm = 1.65;
  // 8-bit digipot, linear in code, 3.9 k to 1 M.
  QuantizerSpec rf_spec{8, 3.9e3, 1e6, Transfer::linear, Span::endpoints};
  Ohms rl = 20e3;
  Farads cl = 10e-6;
  double oa2_gain = 10.0;
  IdacSpec idac_spec = idac_presets::full_range();
  QuantizerSpec vref_dac_spec{10, 0.0, 3.3, Transfer::linear, Span::full_scale};
  // false: v_out rises with photocurrent.
  bool invert_polarity = false;

  void validate() const;

  Seconds tau() const { return rl * cl; }
  Hertz lpf_cutoff() const;
  Ohms rf(std::int64_t code) const { return dequantize(rf_spec, code); }
  double polarity() const { return invert_polarity ? -1.0 : 1.0; }
};

struct FrontEndState
{
  bool s1_closed = false;
  RefSource s2_sel = RefSource::v_cm;
  std::int64_t rf_code = 0;
  std::int64_t idac_code = 0;
  std::int64_t vref_code = 0;
  Volts v_out = 0.0;
  Volts v_dc = 0.0;
  Volts v_sig = 0.0;
  bool saturated = false;  // TIA clamped on the latest tia_output
};

struct TiaResult
{
  Volts v_out;
  bool saturated;
};

/// Front end with every switch open, S2 on V_cm, RF at `rf_code`, VREF DAC at
/// the code nearest V_cm, and all nodes settled for a constant `i_pd`.
FrontEndState settled_state(const FrontEndConfig& cfg, Amperes i_pd, std::int64_t rf_code);

Volts reference_voltage(const FrontEndConfig& cfg, const FrontEndState& state);
Amperes compensation_current(const FrontEndConfig& cfg, const FrontEndState& state);

/// v_out = clamp(v_ref + sign * (i_pd - i_comp) * RF, 0, supply).
TiaResult tia_output(const FrontEndConfig& cfg, const FrontEndState& state, Amperes i_pd);

/// One forward-Euler step of the RL-CL low-pass. Throws ConfigError when
/// dt > tau / 10.
Volts lpf_step(const FrontEndConfig& cfg, Volts v_dc, Volts v_out, Seconds dt);

/// Non-inverting stage about V_cm.
Volts oa2_output(const FrontEndConfig& cfg, Volts v_out);

/// tia_output, lpf_step and oa2_output composed for one simulation tick.
FrontEndState step(const FrontEndConfig& cfg, const FrontEndState& state, Amperes i_pd, Seconds dt);

}  // namespace afesim
