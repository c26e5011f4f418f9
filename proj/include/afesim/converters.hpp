#pragma once

#include <cstdint>

#include "afesim/common.hpp"

namespace afesim {

enum class Transfer
{
  linear,
  // value = K / (code + c0): a current source whose setting resistor is a
  // linear digipot. Decreasing in code.
  reciprocal,
};

/// Where the top code of a linear quantizer lands.
enum class Span
{
  // LSB = (hi - lo) / 2^bits; hi itself is not reachable (ADC/voltage DAC).
  full_scale,
  // LSB = (hi - lo) / (2^bits - 1); both endpoints are codes (digipot, iDAC).
  endpoints,
};

struct QuantizerSpec
{
  int bits = 10;
  double full_scale_lo = 0.0;
  double full_scale_hi = 3.3;
  Transfer transfer = Transfer::linear;
  Span span = Span::full_scale;

  /// Throws ConfigError unless bits in [1, 24] and lo < hi (lo > 0 for reciprocal).
  void validate() const;

  std::int64_t max_code() const { return (std::int64_t{1} << bits) - 1; }
  std::int64_t code_count() const { return std::int64_t{1} << bits; }

  /// Step of a linear transfer. Meaningless for reciprocal.
  double lsb() const;

  /// Distance between the two codes neighbouring `code`'s value; for linear
  /// transfers this is lsb().
  double local_step(std::int64_t code) const;
};

/// Saturating quantizer. Linear: clamp(round((x - lo) / LSB)). Reciprocal: the
/// code whose dequantized value is nearest x, ties to the lower code.
std::int64_t quantize(const QuantizerSpec& spec, double x);

/// Inverse transfer. Throws std::out_of_range for codes outside [0, 2^bits).
double dequantize(const QuantizerSpec& spec, std::int64_t code);

/// Programmable current sink. Code 0 maps to the bottom of the range for
/// linear transfers and to the top for reciprocal ones; see idac_presets.
struct IdacSpec
{
  QuantizerSpec quant{8, 1e-6, 10e-3, Transfer::linear, Span::endpoints};

  void validate() const;
  Amperes current(std::int64_t code) const { return dequantize(quant, code); }
};

namespace idac_presets {
/// Default: 8-bit digipot-set source, 1 uA to 10 mA.
IdacSpec full_range(Transfer transfer = Transfer::linear);
/// 7-bit 1 uA to 128 uA source as found in integrated PPG front ends.
IdacSpec soc_7bit();
}  // namespace idac_presets

/// Base SAR converter with accumulate-and-shift oversampling.
struct AdcSpec
{
  int base_bits = 12;
  int oversample_factor = 256;  // one of 1, 4, 16, 64, 256
  Volts vref_lo = 0.0;
  Volts vref_hi = 3.3;

  void validate() const;

  /// base_bits + log4(oversample_factor).
  int effective_bits() const;
  Volts base_lsb() const;
  Volts effective_lsb() const;
  QuantizerSpec base_quantizer() const;
  std::int64_t max_code() const { return (std::int64_t{1} << effective_bits()) - 1; }
  /// Voltage represented by an effective-resolution code.
  Volts to_volts(std::int64_t code) const { return vref_lo + static_cast<double>(code) * effective_lsb(); }
};

/// One decimated conversion: `oversample_factor` sub-samples, each with
/// independent Gaussian input noise, quantized at base resolution, summed and
/// right-shifted by log4(factor).
std::int64_t adc_sample(const AdcSpec& spec, Volts v, Volts noise_rms, GaussianRng& rng);

}  // namespace afesim
