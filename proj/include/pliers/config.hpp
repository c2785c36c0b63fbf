#pragma once

#include <charconv>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pliers/download_policy.hpp"
#include "pliers/graph_io.hpp"
#include "pliers/simulator.hpp"

namespace pliers {

/// Invalid simulation configuration: unknown key, bad value or an
/// inconsistent combination.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline bool parse_real(std::string_view text, double& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

inline bool is_unset(std::string_view v) { return v == "none" || v == "off" || v == "inf"; }

}  // namespace detail

/// Applies one `key = value` setting to `c`. Throws ConfigError.
inline void apply_setting(SimConfig& c, std::string_view key, std::string_view value) {
  std::int64_t n = 0;
  double x = 0.0;
  auto fail = [&]() -> void {
    throw ConfigError("bad value '" + std::string(value) + "' for " + std::string(key));
  };
  auto integer = [&](std::int64_t min) {
    if (!detail::parse_int(value, n) || n < min) fail();
    return n;
  };
  if (key == "step_length") {
    c.step_length = integer(1);
  } else if (key == "lambda") {
    if (!detail::parse_real(value, x) || x < 0.0 || x > 1.0) fail();
    c.lambda = x;
  } else if (key == "expiry_window") {
    c.expiry_window = detail::is_unset(value) ? std::nullopt : std::optional<Seconds>(integer(1));
  } else if (key == "metric_cadence") {
    c.metric_cadence = static_cast<std::size_t>(integer(1));
  } else if (key == "top_n") {
    c.top_n = detail::is_unset(value) ? std::nullopt : std::optional<std::size_t>(integer(0));
  } else if (key == "spearman_mode") {
    if (value == "corrected") {
      c.spearman_mode = SpearmanMode::Corrected;
    } else if (value == "literal") {
      c.spearman_mode = SpearmanMode::Literal;
    } else {
      fail();
    }
  } else if (key == "rng_seed") {
    c.rng_seed = static_cast<std::uint64_t>(integer(0));
  } else if (key == "download_policy") {
    if (detail::is_unset(value)) {
      c.download_policy.reset();
    } else {
      c.download_policy = parse_download_policy(value);
      if (!c.download_policy) fail();
    }
  } else if (key == "start_time") {
    c.start_time = integer(0);
  } else if (key == "duration") {
    c.duration = detail::is_unset(value) ? std::nullopt : std::optional<Seconds>(integer(1));
  } else if (key == "threads") {
    c.threads = static_cast<std::size_t>(integer(0));
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'");
  }
}

/// Reads `key = value` lines; `#` starts a comment. Later keys override
/// earlier ones. Errors name the source and line.
inline SimConfig read_sim_config(std::istream& in, const std::string& source = "config") {
  SimConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::strip_cr(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(c, detail::trim(view.substr(0, eq)), detail::trim(view.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    c.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

/// Every setting as `key -> value`, in the syntax read_sim_config accepts.
inline std::map<std::string, std::string> describe(const SimConfig& c) {
  auto opt = [](const auto& v) { return v ? std::to_string(*v) : std::string("none"); };
  char lambda[32];
  std::snprintf(lambda, sizeof lambda, "%.9g", c.lambda);
  return {
      {"step_length", std::to_string(c.step_length)},
      {"lambda", lambda},
      {"expiry_window", opt(c.expiry_window)},
      {"metric_cadence", std::to_string(c.metric_cadence)},
      {"top_n", opt(c.top_n)},
      {"spearman_mode", c.spearman_mode == SpearmanMode::Corrected ? "corrected" : "literal"},
      {"rng_seed", std::to_string(c.rng_seed)},
      {"download_policy", c.download_policy ? to_string(*c.download_policy) : "none"},
      {"start_time", std::to_string(c.start_time)},
      {"duration", opt(c.duration)},
      {"threads", std::to_string(c.threads)},
  };
}

}  // namespace pliers
