#include "afesim/scenario_file.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <system_error>
#include <type_traits>

namespace afesim {
namespace {

using Getter = std::function<std::string(const SimConfig&)>;
using Setter = std::function<void(SimConfig&, const std::string&)>;

struct Field
{
  std::string section;
  std::string key;
  std::string description;
  Getter get;
  Setter set;
};

std::string trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v)
{
  // Shortest text that parses back to the same double.
  std::array<char, 40> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

double parse_double(const std::string& text, const std::string& where)
{
  const std::string s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("invalid number for " + where + ": '" + text + "'");
  }
  return value;
}

template <class T>
T parse_int(const std::string& text, const std::string& where)
{
  const std::string s = trim(text);
  T value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("invalid integer for " + where + ": '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& where)
{
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") {
    return true;
  }
  if (s == "false" || s == "0" || s == "no") {
    return false;
  }
  throw ConfigError("invalid boolean for " + where + ": '" + text + "'");
}

std::string waveform_name(Waveform w)
{
  switch (w) {
    case Waveform::sinusoid:
      return "sinusoid";
    case Waveform::synthetic_ppg:
      return "synthetic_ppg";
    case Waveform::fnirs_slow:
      return "fnirs_slow";
  }
  return "?";
}

Waveform parse_waveform(const std::string& text, const std::string& where)
{
  const std::string s = trim(text);
  for (Waveform w : {Waveform::sinusoid, Waveform::synthetic_ppg, Waveform::fnirs_slow}) {
    if (waveform_name(w) == s) {
      return w;
    }
  }
  throw ConfigError("invalid waveform for " + where + ": '" + text + "' (sinusoid|synthetic_ppg|fnirs_slow)");
}

Transfer parse_transfer(const std::string& text, const std::string& where)
{
  const std::string s = trim(text);
  if (s == "linear") {
    return Transfer::linear;
  }
  if (s == "reciprocal") {
    return Transfer::reciprocal;
  }
  throw ConfigError("invalid transfer for " + where + ": '" + text + "' (linear|reciprocal)");
}

std::string format_steps(const std::vector<AmbientStep>& steps)
{
  std::string out;
  for (const auto& step : steps) {
    if (!out.empty()) {
      out += ", ";
    }
    out += format_double(step.time) + ":" + format_double(step.baseline);
  }
  return out;
}

std::vector<AmbientStep> parse_steps(const std::string& text, const std::string& where)
{
  std::vector<AmbientStep> steps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      continue;
    }
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("invalid ambient step for " + where + ": '" + item + "' (expected time:amperes)");
    }
    steps.push_back({parse_double(item.substr(0, colon), where), parse_double(item.substr(colon + 1), where)});
  }
  return steps;
}

// Field constructors for the common value kinds.
template <class Ref>
Field real(std::string section, std::string key, std::string description, Ref ref)
{
  const std::string where = section + "." + key;
  return {section, key, description, [ref](const SimConfig& c) { return format_double(ref(c)); },
          [ref, where](SimConfig& c, const std::string& v) { ref(c) = parse_double(v, where); }};
}

template <class Ref>
Field integer(std::string section, std::string key, std::string description, Ref ref)
{
  const std::string where = section + "." + key;
  return {section, key, description,
          [ref](const SimConfig& c) { return std::to_string(ref(c)); },
          [ref, where](SimConfig& c, const std::string& v) {
            using T = std::remove_cvref_t<decltype(ref(c))>;
            ref(c) = parse_int<T>(v, where);
          }};
}

template <class Ref>
Field boolean(std::string section, std::string key, std::string description, Ref ref)
{
  const std::string where = section + "." + key;
  return {section, key, description,
          [ref](const SimConfig& c) { return std::string(ref(c) ? "true" : "false"); },
          [ref, where](SimConfig& c, const std::string& v) { ref(c) = parse_bool(v, where); }};
}

template <class Ref>
Field text(std::string section, std::string key, std::string description, Ref ref)
{
  return {section, key, description, [ref](const SimConfig& c) { return ref(c); },
          [ref](SimConfig& c, const std::string& v) { ref(c) = trim(v); }};
}

const std::vector<Field>& fields()
{
  // clang-format off
  static const std::vector<Field> table = {
    real("sim", "duration", "simulated time [s]", [](auto& c) -> auto& { return c.scenario.duration; }),
    real("sim", "dt", "simulation step [s]", [](auto& c) -> auto& { return c.scenario.dt; }),
    integer("sim", "seed", "seed for current noise and ADC noise", [](auto& c) -> auto& { return c.scenario.rng_seed; }),

    {"signal", "family", "sinusoid | synthetic_ppg | fnirs_slow",
     [](const SimConfig& c) { return waveform_name(c.scenario.ac.family); },
     [](SimConfig& c, const std::string& v) { c.scenario.ac.family = parse_waveform(v, "signal.family"); }},
    real("signal", "f0", "fundamental / heart rate [Hz]", [](auto& c) -> auto& { return c.scenario.ac.f0; }),
    real("signal", "amplitude", "half peak-to-peak AC current [A]", [](auto& c) -> auto& { return c.scenario.ac.amplitude_peak; }),
    real("signal", "systolic_center", "systolic peak position [beat fraction]", [](auto& c) -> auto& { return c.scenario.ac.systolic_center; }),
    real("signal", "systolic_width", "systolic Gaussian sigma [beat fraction]", [](auto& c) -> auto& { return c.scenario.ac.systolic_width; }),
    real("signal", "dicrotic_ratio", "dicrotic / systolic height", [](auto& c) -> auto& { return c.scenario.ac.dicrotic_ratio; }),
    real("signal", "dicrotic_delay", "dicrotic delay after systolic peak [beat fraction]", [](auto& c) -> auto& { return c.scenario.ac.dicrotic_delay; }),
    real("signal", "dicrotic_width", "dicrotic Gaussian sigma [beat fraction]", [](auto& c) -> auto& { return c.scenario.ac.dicrotic_width; }),
    real("signal", "noise_rms", "white photocurrent noise [A rms]", [](auto& c) -> auto& { return c.scenario.noise_rms; }),

    real("offset", "dark", "photodiode dark current [A]", [](auto& c) -> auto& { return c.scenario.dark_current; }),
    real("offset", "ambient", "ambient-light baseline [A]", [](auto& c) -> auto& { return c.scenario.ambient.baseline; }),
    real("offset", "ambient_drift", "ambient linear drift [A/s]", [](auto& c) -> auto& { return c.scenario.ambient.drift; }),
    real("offset", "flicker_amplitude", "mains flicker amplitude [A]", [](auto& c) -> auto& { return c.scenario.ambient.flicker_amplitude; }),
    real("offset", "flicker_frequency", "mains flicker frequency [Hz]", [](auto& c) -> auto& { return c.scenario.ambient.flicker_frequency; }),
    {"offset", "ambient_steps", "ambient baseline steps, 'time:amperes, ...'",
     [](const SimConfig& c) { return format_steps(c.scenario.ambient.steps); },
     [](SimConfig& c, const std::string& v) { c.scenario.ambient.steps = parse_steps(v, "offset.ambient_steps"); }},
    real("offset", "reflection", "tissue reflection current [A]", [](auto& c) -> auto& { return c.scenario.reflection_offset; }),

    real("frontend", "supply", "single supply [V]; also the ADC and VREF DAC full scale", [](auto& c) -> auto& { return c.front_end.supply; }),
    real("frontend", "v_cm", "common-mode reference [V]", [](auto& c) -> auto& { return c.front_end.v_cm; }),
    real("frontend", "rl", "LPF resistor [ohm]", [](auto& c) -> auto& { return c.front_end.rl; }),
    real("frontend", "cl", "LPF capacitor [F]", [](auto& c) -> auto& { return c.front_end.cl; }),
    real("frontend", "oa2_gain", "output stage gain about v_cm", [](auto& c) -> auto& { return c.front_end.oa2_gain; }),
    boolean("frontend", "invert_polarity", "v_out falls with photocurrent", [](auto& c) -> auto& { return c.front_end.invert_polarity; }),
    integer("frontend", "rf_bits", "feedback digipot resolution", [](auto& c) -> auto& { return c.front_end.rf_spec.bits; }),
    real("frontend", "rf_min", "feedback digipot code 0 [ohm]", [](auto& c) -> auto& { return c.front_end.rf_spec.full_scale_lo; }),
    real("frontend", "rf_max", "feedback digipot top code [ohm]", [](auto& c) -> auto& { return c.front_end.rf_spec.full_scale_hi; }),
    integer("frontend", "idac_bits", "iDAC resolution", [](auto& c) -> auto& { return c.front_end.idac_spec.quant.bits; }),
    real("frontend", "idac_min", "iDAC lowest current [A]", [](auto& c) -> auto& { return c.front_end.idac_spec.quant.full_scale_lo; }),
    real("frontend", "idac_max", "iDAC highest current [A]", [](auto& c) -> auto& { return c.front_end.idac_spec.quant.full_scale_hi; }),
    {"frontend", "idac_transfer", "linear | reciprocal",
     [](const SimConfig& c) { return std::string(c.front_end.idac_spec.quant.transfer == Transfer::linear ? "linear" : "reciprocal"); },
     [](SimConfig& c, const std::string& v) { c.front_end.idac_spec.quant.transfer = parse_transfer(v, "frontend.idac_transfer"); }},
    integer("frontend", "vref_bits", "VREF DAC resolution", [](auto& c) -> auto& { return c.front_end.vref_dac_spec.bits; }),
    integer("frontend", "adc_bits", "ADC base resolution", [](auto& c) -> auto& { return c.adc.base_bits; }),
    integer("frontend", "adc_oversample", "ADC oversampling factor (1, 4, 16, 64, 256)", [](auto& c) -> auto& { return c.adc.oversample_factor; }),
    real("frontend", "adc_noise_rms", "ADC input noise per sub-sample [V rms]", [](auto& c) -> auto& { return c.adc_noise_rms; }),

    boolean("controller", "enabled", "run the calibration firmware", [](auto& c) -> auto& { return c.controller.enabled; }),
    real("controller", "threshold", "watchdog |v_dc - v_cm| limit [V]", [](auto& c) -> auto& { return c.controller.v_dc_threshold; }),
    real("controller", "settle_factor", "LPF time constants waited before each v_dc read", [](auto& c) -> auto& { return c.controller.settle_factor; }),
    integer("controller", "rf_initial_code", "RF code for offset measurement", [](auto& c) -> auto& { return c.controller.rf_initial_code; }),
    integer("controller", "rf_target_code", "highest RF code the gain raise may reach", [](auto& c) -> auto& { return c.controller.rf_target_code; }),
    real("controller", "tick", "controller tick [s]", [](auto& c) -> auto& { return c.controller.controller_tick; }),
    integer("controller", "fine_max_iters", "VREF trim read limit", [](auto& c) -> auto& { return c.controller.fine_loop_max_iters; }),
    boolean("controller", "debounce", "require a persistent excursion before RECAL", [](auto& c) -> auto& { return c.controller.debounce; }),
    real("controller", "debounce_factor", "excursion hold time [LPF time constants]", [](auto& c) -> auto& { return c.controller.debounce_factor; }),

    real("baseline", "fc_hp", "continuous servo corner [Hz]", [](auto& c) -> auto& { return c.baseline.fc_hp; }),
    integer("baseline", "rf_code", "RF code of the baseline TIA", [](auto& c) -> auto& { return c.baseline.rf_code; }),

    text("output", "trace", "trace CSV file name", [](auto& c) -> auto& { return c.output.trace; }),
    text("output", "metrics", "metrics file name", [](auto& c) -> auto& { return c.output.metrics; }),
    text("output", "events", "event log file name", [](auto& c) -> auto& { return c.output.events; }),
  };
  // clang-format on
  return table;
}

const Field& find_field(const std::string& section, const std::string& key)
{
  const auto& table = fields();
  const auto it = std::find_if(table.begin(), table.end(),
                               [&](const Field& f) { return f.section == section && f.key == key; });
  if (it == table.end()) {
    const bool known_section =
        std::any_of(table.begin(), table.end(), [&](const Field& f) { return f.section == section; });
    if (!known_section) {
      throw ConfigError("unknown section [" + section + "]");
    }
    throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
  }
  return *it;
}

std::vector<std::string> section_order()
{
  std::vector<std::string> order;
  for (const auto& f : fields()) {
    if (std::find(order.begin(), order.end(), f.section) == order.end()) {
      order.push_back(f.section);
    }
  }
  return order;
}

}  // namespace

std::vector<ScenarioKey> scenario_keys()
{
  SimConfig defaults;
  defaults.sync_references();
  std::vector<ScenarioKey> keys;
  for (const auto& f : fields()) {
    keys.push_back({f.section, f.key, f.get(defaults), f.description});
  }
  return keys;
}

std::vector<std::string> required_sections() { return {"sim", "signal", "offset"}; }

void set_value(SimConfig& config, const std::string& section, const std::string& key, const std::string& value)
{
  find_field(section, key).set(config, value);
  config.sync_references();
}

SimConfig parse_scenario(std::istream& in)
{
  // boost's INI reader only knows ';' comments and drops empty sections, so
  // headers are collected here.
  std::ostringstream cleaned;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t.front() == '#') {
      continue;
    }
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
      const std::string section = trim(t.substr(1, t.size() - 2));
      const auto& known = section_order();
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        throw ConfigError("unknown section [" + section + "]");
      }
      seen.insert(section);
    }
    cleaned << line << '\n';
  }

  boost::property_tree::ptree tree;
  try {
    std::istringstream cleaned_in(cleaned.str());
    boost::property_tree::ini_parser::read_ini(cleaned_in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("scenario syntax error: ") + e.what());
  }

  SimConfig config;
  for (const auto& [section, body] : tree) {
    // A key above the first header parses as a childless node with data.
    if (!seen.contains(section) || (body.empty() && !body.data().empty())) {
      throw ConfigError("key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : body) {
      if (!value.empty()) {
        throw ConfigError("nested key '" + key + "' in section [" + section + "]");
      }
      find_field(section, key).set(config, value.data());
    }
  }
  for (const auto& section : required_sections()) {
    if (!seen.contains(section)) {
      throw ConfigError("missing section [" + section + "]");
    }
  }
  config.sync_references();
  return config;
}

SimConfig parse_scenario_text(const std::string& text)
{
  std::istringstream in(text);
  return parse_scenario(in);
}

SimConfig load_scenario(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read scenario file '" + path + "'");
  }
  return parse_scenario(in);
}

std::string serialize_scenario(const SimConfig& config)
{
  std::ostringstream out;
  bool first = true;
  for (const auto& section : section_order()) {
    if (!first) {
      out << '\n';
    }
    first = false;
    out << '[' << section << "]\n";
    for (const auto& f : fields()) {
      if (f.section == section) {
        out << f.key << " = " << f.get(config) << '\n';
      }
    }
  }
  return out.str();
}

void apply_override(SimConfig& config, std::string_view assignment)
{
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
    throw ConfigError("override must look like section.key=value, got '" + std::string(assignment) + "'");
  }
  set_value(config, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
            std::string(assignment.substr(eq + 1)));
}

}  // namespace afesim
