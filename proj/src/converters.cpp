#include "afesim/converters.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace afesim {
namespace {

// Parameters of value = k / (code + c0) through both endpoints:
// code 0 -> hi, max code -> lo.
struct ReciprocalLaw
{
  double k;
  double c0;
};

ReciprocalLaw reciprocal_law(const QuantizerSpec& spec)
{
  const double lo = spec.full_scale_lo;
  const double hi = spec.full_scale_hi;
  const double n = static_cast<double>(spec.max_code());
  const double c0 = n * lo / (hi - lo);
  return {hi * c0, c0};
}

}  // namespace

void QuantizerSpec::validate() const
{
  if (bits < 1 || bits > 24) {
    throw ConfigError("quantizer bits must be in [1, 24], got " + std::to_string(bits));
  }
  if (!std::isfinite(full_scale_lo) || !std::isfinite(full_scale_hi) || !(full_scale_lo < full_scale_hi)) {
    throw ConfigError("quantizer full scale must satisfy lo < hi");
  }
  if (transfer == Transfer::reciprocal && !(full_scale_lo > 0.0)) {
    throw ConfigError("reciprocal quantizer needs a positive lower full scale");
  }
}

double QuantizerSpec::lsb() const
{
  const double span_width = full_scale_hi - full_scale_lo;
  return span == Span::endpoints ? span_width / static_cast<double>(max_code())
                                 : span_width / static_cast<double>(code_count());
}

double QuantizerSpec::local_step(std::int64_t code) const
{
  if (transfer == Transfer::linear) {
    return lsb();
  }
  const std::int64_t below = std::max<std::int64_t>(code - 1, 0);
  const std::int64_t above = std::min(code + 1, max_code());
  if (above == below) {
    return 0.0;
  }
  return std::abs(dequantize(*this, below) - dequantize(*this, above)) / static_cast<double>(above - below);
}

std::int64_t quantize(const QuantizerSpec& spec, double x)
{
  if (std::isnan(x)) {
    throw std::invalid_argument("quantize: NaN input");
  }
  const std::int64_t top = spec.max_code();
  if (spec.transfer == Transfer::linear) {
    const double scaled = round_half_away((x - spec.full_scale_lo) / spec.lsb());
    if (scaled <= 0.0) {
      return 0;
    }
    if (scaled >= static_cast<double>(top)) {
      return top;
    }
    return static_cast<std::int64_t>(scaled);
  }

  if (x >= spec.full_scale_hi) {
    return 0;
  }
  if (x <= spec.full_scale_lo) {
    return top;
  }
  const auto [k, c0] = reciprocal_law(spec);
  const double ideal = k / x - c0;
  const auto lower = std::clamp(static_cast<std::int64_t>(std::floor(ideal)), std::int64_t{0}, top);
  const auto upper = std::min(lower + 1, top);
  const double err_lower = std::abs(dequantize(spec, lower) - x);
  const double err_upper = std::abs(dequantize(spec, upper) - x);
  return err_upper < err_lower ? upper : lower;
}

double dequantize(const QuantizerSpec& spec, std::int64_t code)
{
  if (code < 0 || code > spec.max_code()) {
    throw std::out_of_range("dequantize: code " + std::to_string(code) + " outside [0, " +
                            std::to_string(spec.max_code()) + "]");
  }
  if (spec.transfer == Transfer::linear) {
    if (spec.span == Span::endpoints && code == spec.max_code()) {
      return spec.full_scale_hi;
    }
    return spec.full_scale_lo + static_cast<double>(code) * spec.lsb();
  }
  if (code == 0) {
    return spec.full_scale_hi;
  }
  if (code == spec.max_code()) {
    return spec.full_scale_lo;
  }
  const auto [k, c0] = reciprocal_law(spec);
  return k / (static_cast<double>(code) + c0);
}

void IdacSpec::validate() const
{
  quant.validate();
  if (quant.full_scale_lo < 0.0) {
    throw ConfigError("iDAC range must be non-negative");
  }
}

namespace idac_presets {

IdacSpec full_range(Transfer transfer)
{
  return IdacSpec{QuantizerSpec{8, 1e-6, 10e-3, transfer, Span::endpoints}};
}

IdacSpec soc_7bit()
{
  return IdacSpec{QuantizerSpec{7, 1e-6, 128e-6, Transfer::linear, Span::endpoints}};
}

}  // namespace idac_presets

void AdcSpec::validate() const
{
  if (base_bits < 1 || base_bits > 24) {
    throw ConfigError("ADC base bits must be in [1, 24]");
  }
  switch (oversample_factor) {
    case 1:
    case 4:
    case 16:
    case 64:
    case 256:
      break;
    default:
      throw ConfigError("ADC oversample factor must be one of 1, 4, 16, 64, 256, got " +
                        std::to_string(oversample_factor));
  }
  if (effective_bits() > 16) {
    throw ConfigError("ADC effective resolution exceeds 16 bits");
  }
  if (!(vref_lo < vref_hi)) {
    throw ConfigError("ADC reference range must satisfy lo < hi");
  }
}

int AdcSpec::effective_bits() const
{
  const int log2_factor = std::countr_zero(static_cast<unsigned>(oversample_factor));
  return base_bits + log2_factor / 2;
}

Volts AdcSpec::base_lsb() const { return (vref_hi - vref_lo) / static_cast<double>(std::int64_t{1} << base_bits); }

Volts AdcSpec::effective_lsb() const
{
  return (vref_hi - vref_lo) / static_cast<double>(std::int64_t{1} << effective_bits());
}

QuantizerSpec AdcSpec::base_quantizer() const
{
  return QuantizerSpec{base_bits, vref_lo, vref_hi, Transfer::linear, Span::full_scale};
}

std::int64_t adc_sample(const AdcSpec& spec, Volts v, Volts noise_rms, GaussianRng& rng)
{
  const QuantizerSpec base = spec.base_quantizer();
  std::int64_t accumulator = 0;
  for (int i = 0; i < spec.oversample_factor; ++i) {
    accumulator += quantize(base, v + rng.normal(noise_rms));
  }
  const int shift = spec.effective_bits() - spec.base_bits;
  return accumulator >> shift;
}

}  // namespace afesim
