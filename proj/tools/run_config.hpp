#ifndef YUKAWA1D_TOOLS_RUN_CONFIG_HPP
#define YUKAWA1D_TOOLS_RUN_CONFIG_HPP

// Flat key=value configuration for the command-line tool. Later sources
// override earlier ones: defaults, then --config, then individual flags.

#include <yukawa1d/model.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace yukawa1d::cli {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig
{
  double m{1.0};
  double mu{1.0};
  double lambda{1.0};
  InverseTemperature beta{InverseTemperature::finite(4.0)};
  RegularizationScheme scheme{RegularizationScheme::TimeSplitting};
  int n_max{60};
  int n_tau{64};
  std::int64_t sweeps{1000000};
  std::int64_t thermalization{20000};
  std::uint64_t seed{1};
  std::uint64_t stream{0};
  int winding_cutoff{4000};
  std::string out; // empty: standard output

  // command-specific
  int levels{10};                     // spectrum
  int points{33};                     // correlator: uniform grid on [0, beta]
  std::vector<double> taus;           // correlator: explicit grid, overrides points
  bool mc{false};                     // correlator: add Monte Carlo columns
  int j{0};                           // loops: 0 means len(momenta)
  std::vector<std::int64_t> momenta;  // loops: bosonic grid indices
  std::string kind{"fermion"};        // selfenergy: fermion | boson
  int frequencies{8};                 // selfenergy boson: |n| <= frequencies
  std::string samples;                // mc: raw measurement stream

  ModelParams params() const { return {m, mu, lambda, beta}; }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
  auto const first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  auto const last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] inline void bad_value(std::string_view field, std::string_view text, std::string_view why = {})
{
  std::string msg = "invalid value for " + std::string(field) + ": '" + std::string(text) + "'";
  if (!why.empty())
    msg += " (" + std::string(why) + ")";
  throw ConfigError(msg);
}

template <typename T>
T parse_number(std::string_view field, std::string_view text)
{
  text = trim(text);
  T v{};
  auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    bad_value(field, text);
  return v;
}

inline double parse_finite(std::string_view field, std::string_view text)
{
  double const v = parse_number<double>(field, text);
  if (!std::isfinite(v))
    bad_value(field, text, "must be finite");
  return v;
}

inline bool parse_bool(std::string_view field, std::string_view text)
{
  text = trim(text);
  if (text == "true" || text == "1")
    return true;
  if (text == "false" || text == "0")
    return false;
  bad_value(field, text, "expected true or false");
}

template <typename T>
std::vector<T> parse_list(std::string_view field, std::string_view text)
{
  std::vector<T> out;
  text = trim(text);
  while (!text.empty()) {
    auto const comma = text.find(',');
    out.push_back(parse_number<T>(field, text.substr(0, comma)));
    if (comma == std::string_view::npos)
      break;
    text = text.substr(comma + 1);
  }
  if (out.empty())
    bad_value(field, text, "empty list");
  return out;
}

} // namespace detail

/// "inf" is the only non-numeric value accepted anywhere.
inline InverseTemperature parse_beta(std::string_view text)
{
  text = detail::trim(text);
  if (text == "inf")
    return InverseTemperature::infinite();
  double const v = detail::parse_number<double>("beta", text);
  if (!(v > 0.0) || !std::isfinite(v))
    detail::bad_value("beta", text, "must be positive, or inf");
  return InverseTemperature::finite(v);
}

inline RegularizationScheme parse_scheme(std::string_view text)
{
  text = detail::trim(text);
  if (text == "time-splitting")
    return RegularizationScheme::TimeSplitting;
  if (text == "symmetric")
    return RegularizationScheme::Symmetric;
  detail::bad_value("scheme", text, "expected time-splitting or symmetric");
}

inline void apply(RunConfig& c, std::string_view key, std::string_view value)
{
  using namespace detail;
  key = trim(key);
  if (key == "m")
    c.m = parse_finite("m", value);
  else if (key == "mu")
    c.mu = parse_finite("mu", value);
  else if (key == "lambda")
    c.lambda = parse_finite("lambda", value);
  else if (key == "beta")
    c.beta = parse_beta(value);
  else if (key == "scheme")
    c.scheme = parse_scheme(value);
  else if (key == "n_max")
    c.n_max = parse_number<int>("n_max", value);
  else if (key == "n_tau")
    c.n_tau = parse_number<int>("n_tau", value);
  else if (key == "sweeps")
    c.sweeps = parse_number<std::int64_t>("sweeps", value);
  else if (key == "thermalization")
    c.thermalization = parse_number<std::int64_t>("thermalization", value);
  else if (key == "seed")
    c.seed = parse_number<std::uint64_t>("seed", value);
  else if (key == "stream")
    c.stream = parse_number<std::uint64_t>("stream", value);
  else if (key == "winding_cutoff")
    c.winding_cutoff = parse_number<int>("winding_cutoff", value);
  else if (key == "out")
    c.out = std::string(trim(value));
  else if (key == "levels")
    c.levels = parse_number<int>("levels", value);
  else if (key == "points")
    c.points = parse_number<int>("points", value);
  else if (key == "tau")
    c.taus = parse_list<double>("tau", value);
  else if (key == "mc")
    c.mc = parse_bool("mc", value);
  else if (key == "j")
    c.j = parse_number<int>("j", value);
  else if (key == "momenta")
    c.momenta = parse_list<std::int64_t>("momenta", value);
  else if (key == "kind") {
    auto const v = trim(value);
    if (v != "fermion" && v != "boson")
      bad_value("kind", v, "expected fermion or boson");
    c.kind = std::string(v);
  } else if (key == "frequencies")
    c.frequencies = parse_number<int>("frequencies", value);
  else if (key == "samples")
    c.samples = std::string(trim(value));
  else
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

/// Reads key=value lines; '#' starts a comment.
inline void load_config(RunConfig& c, std::istream& in, std::string const& source)
{
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view v = line;
    if (auto const hash = v.find('#'); hash != std::string_view::npos)
      v = v.substr(0, hash);
    v = detail::trim(v);
    if (v.empty())
      continue;
    auto const eq = v.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(source + ":" + std::to_string(number) + ": expected key=value");
    try {
      apply(c, v.substr(0, eq), v.substr(eq + 1));
    } catch (ConfigError const& e) {
      throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

inline void load_config_file(RunConfig& c, std::string const& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  load_config(c, in, path);
}

/// Cross-field checks, reported with the offending field's name.
inline void validate(RunConfig const& c)
{
  if (!(c.m > 0.0))
    throw ConfigError("invalid value for m: must be positive");
  if (c.n_max < 1)
    throw ConfigError("invalid value for n_max: must be >= 1");
  if (c.n_tau < 8 || c.n_tau % 2 != 0)
    throw ConfigError("invalid value for n_tau: must be even and >= 8");
  if (c.sweeps < 0)
    throw ConfigError("invalid value for sweeps: must be >= 0");
  if (c.thermalization < 1)
    throw ConfigError("invalid value for thermalization: must be >= 1");
  if (c.winding_cutoff < 1)
    throw ConfigError("invalid value for winding_cutoff: must be >= 1");
  if (c.levels < 1)
    throw ConfigError("invalid value for levels: must be >= 1");
  if (c.points < 2)
    throw ConfigError("invalid value for points: must be >= 2");
  if (c.frequencies < 0)
    throw ConfigError("invalid value for frequencies: must be >= 0");
}

} // namespace yukawa1d::cli

#endif
