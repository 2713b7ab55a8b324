// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fdfm/errors.hpp"
#include "fdfm/text.hpp"

namespace fdfm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t to_unsigned(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool to_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected true or false, got '" + std::string(s) + "'");
}

std::vector<double> to_doubles(std::string_view s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (auto part : split(s, ',')) out.push_back(to_double(part));
  return out;
}

std::vector<std::size_t> to_sizes(std::string_view s) {
  std::vector<std::size_t> out;
  if (s.empty()) return out;
  for (auto part : split(s, ',')) out.push_back(to_unsigned(part));
  return out;
}

std::pair<double, double> to_pair(std::string_view s) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) {
    throw ConfigError("expected a low:high pair, got '" + std::string(s) + "'");
  }
  return {to_double(parts[0]), to_double(parts[1])};
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset", [](RunConfig& c, std::string_view v) { c.train.dataset.kind = parse_dataset_kind(std::string(v)); }},
      {"channels", [](RunConfig& c, std::string_view v) { c.train.dataset.channels = to_unsigned(v); }},
      {"height", [](RunConfig& c, std::string_view v) { c.train.dataset.height = to_unsigned(v); }},
      {"width", [](RunConfig& c, std::string_view v) { c.train.dataset.width = to_unsigned(v); }},
      {"mixture_values", [](RunConfig& c, std::string_view v) { c.train.dataset.mixture_values = to_doubles(v); }},
      {"mixture_weights", [](RunConfig& c, std::string_view v) { c.train.dataset.mixture_weights = to_doubles(v); }},
      {"labeled", [](RunConfig& c, std::string_view v) { c.train.dataset.labeled = to_bool(v); }},
      {"texture_noise", [](RunConfig& c, std::string_view v) { c.train.dataset.texture_noise = to_double(v); }},
      {"gamma_low", [](RunConfig& c, std::string_view v) { c.train.gamma_low = to_double(v); }},
      {"gamma_high", [](RunConfig& c, std::string_view v) { c.train.gamma_high = to_double(v); }},
      {"eps_smooth", [](RunConfig& c, std::string_view v) { c.train.eps_smooth = to_double(v); }},
      {"omega", [](RunConfig& c, std::string_view v) { c.train.omega = to_double(v); }},
      {"time_mu", [](RunConfig& c, std::string_view v) { c.train.time_sampler.mu = to_double(v); }},
      {"time_sigma", [](RunConfig& c, std::string_view v) { c.train.time_sampler.sigma = to_double(v); }},
      {"normalization", [](RunConfig& c, std::string_view v) {
         if (v == "shared") c.train.normalization = BandNormalization::shared;
         else if (v == "per_band") c.train.normalization = BandNormalization::per_band;
         else throw ConfigError("normalization must be shared or per_band");
       }},
      {"t_max", [](RunConfig& c, std::string_view v) { c.train.t_max = c.sampling.t_max = to_double(v); }},
      {"hidden", [](RunConfig& c, std::string_view v) { c.train.hidden = to_sizes(v); }},
      {"lr", [](RunConfig& c, std::string_view v) { c.train.lr = to_double(v); }},
      {"batch", [](RunConfig& c, std::string_view v) { c.train.batch = to_unsigned(v); }},
      {"steps", [](RunConfig& c, std::string_view v) { c.train.steps = to_unsigned(v); }},
      {"cond_dropout", [](RunConfig& c, std::string_view v) { c.train.cond_dropout = to_double(v); }},
      {"seed", [](RunConfig& c, std::string_view v) { c.train.seed = c.sampling.seed = to_unsigned(v); }},
      {"ema", [](RunConfig& c, std::string_view v) { c.train.ema = to_bool(v); }},
      {"ema_decay", [](RunConfig& c, std::string_view v) { c.train.ema_decay = to_double(v); }},
      {"optimizer", [](RunConfig& c, std::string_view v) {
         if (v == "adam") c.train.optimizer = Optimizer::adam;
         else if (v == "sgd") c.train.optimizer = Optimizer::sgd;
         else throw ConfigError("optimizer must be adam or sgd");
       }},
      {"beta1", [](RunConfig& c, std::string_view v) { c.train.beta1 = to_double(v); }},
      {"beta2", [](RunConfig& c, std::string_view v) { c.train.beta2 = to_double(v); }},
      {"adam_eps", [](RunConfig& c, std::string_view v) { c.train.adam_eps = to_double(v); }},
      {"weight_decay", [](RunConfig& c, std::string_view v) { c.train.weight_decay = to_double(v); }},
      {"n", [](RunConfig& c, std::string_view v) { c.sample_count = to_unsigned(v); }},
      {"sample_steps", [](RunConfig& c, std::string_view v) { c.sampling.steps = to_unsigned(v); }},
      {"variant", [](RunConfig& c, std::string_view v) { c.sampling.variant = parse_variant(std::string(v)); }},
      {"cfg_scale", [](RunConfig& c, std::string_view v) { c.sampling.cfg_scale = to_double(v); }},
      {"cfg_lo", [](RunConfig& c, std::string_view v) { c.sampling.cfg_interval.lo = to_double(v); }},
      {"cfg_hi", [](RunConfig& c, std::string_view v) { c.sampling.cfg_interval.hi = to_double(v); }},
      {"timeshift", [](RunConfig& c, std::string_view v) { c.sampling.timeshift = to_double(v); }},
      {"cond", [](RunConfig& c, std::string_view v) {
         if (v == "none") c.condition.reset();
         else c.condition = to_unsigned(v);
       }},
      {"grid", [](RunConfig& c, std::string_view v) { c.curve_points = to_unsigned(v); }},
      {"sweep_gammas", [](RunConfig& c, std::string_view v) {
         c.sweep.gammas.clear();
         for (auto part : split(v, ',')) c.sweep.gammas.push_back(to_pair(part));
       }},
      {"sweep_omegas", [](RunConfig& c, std::string_view v) { c.sweep.omegas = to_doubles(v); }},
      {"sweep_cross", [](RunConfig& c, std::string_view v) { c.sweep.cross = to_bool(v); }},
      {"sweep_anchor", [](RunConfig& c, std::string_view v) { c.sweep.anchor = to_pair(v); }},
      {"sweep_samples", [](RunConfig& c, std::string_view v) { c.sweep.sample_count = to_unsigned(v); }},
  };
  return table;
}

}  // namespace

std::vector<ConfigEntry> parse_config_entries(std::string_view text, const std::string& origin) {
  std::vector<ConfigEntry> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line =
        text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string_view key = eq == std::string_view::npos ? line : trim(line.substr(0, eq));
    if (eq == std::string_view::npos || key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value', got '" +
                        std::string(line) + "'");
    }
    entries.push_back({std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return entries;
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

RunConfig parse_run_config(std::string_view text, const std::string& origin) {
  RunConfig config;
  std::set<std::string> seen;
  for (const auto& e : parse_config_entries(text, origin)) {
    const std::string where = origin + ":" + std::to_string(e.line) + ": ";
    const auto it = setters().find(e.key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + e.key + "'");
    if (!seen.insert(e.key).second) throw ConfigError(where + "duplicate key '" + e.key + "'");
    try {
      it->second(config, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(where + e.key + ": " + err.what());
    }
  }
  config.sampling.schedule = config.train.schedule();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

std::vector<std::pair<std::string, std::string>> sample_echo(const RunConfig& c) {
  return {
      {"n", std::to_string(c.sample_count)},
      {"sample_steps", std::to_string(c.sampling.steps)},
      {"variant", variant_name(c.sampling.variant)},
      {"t_max", format_double(c.sampling.t_max)},
      {"cfg_scale", format_double(c.sampling.cfg_scale)},
      {"cfg_lo", format_double(c.sampling.cfg_interval.lo)},
      {"cfg_hi", format_double(c.sampling.cfg_interval.hi)},
      {"timeshift", format_double(c.sampling.timeshift)},
      {"cond", c.condition ? std::to_string(*c.condition) : "none"},
      {"seed", std::to_string(c.sampling.seed)},
  };
}

}  // namespace fdfm
