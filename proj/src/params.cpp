#include "isac_aoi/params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>

#include <fmt/format.h>

#include "isac_aoi/errors.hpp"
#include "isac_aoi/fbc.hpp"

namespace isac_aoi {
namespace {

enum class Unit { linear, db, dbm };

struct KeySpec {
  const char* key;
  double SystemParams::*field;  // null for the int/optional fields handled by hand
  std::vector<std::string_view> suffixes;
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"P_t", &SystemParams::total_power, {"dbm"}},
      {"alpha", &SystemParams::alpha, {}},
      {"W", &SystemParams::bandwidth, {}},
      {"T", &SystemParams::scan_period, {}},
      {"L", nullptr, {}},
      {"N", nullptr, {}},
      {"epsilon", &SystemParams::epsilon, {}},
      {"N_c", &SystemParams::comm_noise, {"dbm"}},
      {"D", &SystemParams::max_range, {}},
      {"kappa", &SystemParams::path_loss_exp, {}},
      {"sigma_wl", &SystemParams::wavelength, {}},
      {"G_t", &SystemParams::gain_tx, {"dbi", "db"}},
      {"G_r", &SystemParams::gain_rx, {"dbi", "db"}},
      {"rho_bar", &SystemParams::mean_rcs, {"dbsm"}},
      {"varsigma", &SystemParams::boltzmann, {}},
      {"chi", &SystemParams::temperature, {}},
      {"varphi", &SystemParams::loss_factor, {"db"}},
      {"tau", &SystemParams::accept_snr, {"db"}},
      {"d", &SystemParams::detect_snr, {"db"}},
      {"varpi", &SystemParams::deferral, {}},
      {"zeta", &SystemParams::paoi_threshold, {}},
      {"theta", nullptr, {}},
  };
  return specs;
}

const KeySpec* find_spec(std::string_view base) {
  for (const auto& s : key_specs()) {
    if (base == s.key) return &s;
  }
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ConfigError(fmt::format("field '{}': cannot parse '{}' as a number", key, text));
  }
  return v;
}

// Resolves `rho_bar_dbsm` -> ("rho_bar", db) and so on.
std::pair<const KeySpec*, Unit> resolve_key(std::string_view key) {
  if (const auto* s = find_spec(key)) return {s, Unit::linear};
  const auto us = key.rfind('_');
  if (us != std::string_view::npos) {
    const auto base = key.substr(0, us);
    const auto suffix = key.substr(us + 1);
    if (const auto* s = find_spec(base)) {
      if (std::find(s->suffixes.begin(), s->suffixes.end(), suffix) != s->suffixes.end()) {
        return {s, suffix == "dbm" ? Unit::dbm : Unit::db};
      }
    }
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

void require(bool ok, std::string_view field, double value, std::string_view range) {
  if (!ok) {
    throw ConfigError(
        fmt::format("field '{}' = {} out of range, allowed {}", field, value, range));
  }
}

void validate(const SystemParams& p) {
  constexpr auto pos = "(0, inf)";
  auto positive = [&](std::string_view f, double v) {
    require(std::isfinite(v) && v > 0.0, f, v, pos);
  };
  positive("P_t", p.total_power);
  require(p.alpha >= 0.0 && p.alpha <= 1.0, "alpha", p.alpha, "[0, 1]");
  positive("W", p.bandwidth);
  positive("T", p.scan_period);
  require(p.packet_bits >= 1, "L", p.packet_bits, "integer >= 1");
  require(p.blocklength >= 1, "N", p.blocklength, "integer >= 1");
  require(p.epsilon > 0.0 && p.epsilon < 1.0, "epsilon", p.epsilon, "(0, 1)");
  positive("N_c", p.comm_noise);
  positive("D", p.max_range);
  positive("kappa", p.path_loss_exp);
  positive("sigma_wl", p.wavelength);
  positive("G_t", p.gain_tx);
  positive("G_r", p.gain_rx);
  positive("rho_bar", p.mean_rcs);
  positive("varsigma", p.boltzmann);
  positive("chi", p.temperature);
  positive("varphi", p.loss_factor);
  require(std::isfinite(p.accept_snr) && p.accept_snr >= 0.0, "tau", p.accept_snr, "[0, inf)");
  require(std::isfinite(p.detect_snr) && p.detect_snr >= 0.0, "d", p.detect_snr, "[0, inf)");
  positive("varpi", p.deferral);
  positive("zeta", p.paoi_threshold);
  if (p.theta) positive("theta", *p.theta);
}

int to_count(std::string_view field, double v) {
  require(std::isfinite(v) && v >= 1.0 && v == std::floor(v) &&
              v <= static_cast<double>(std::numeric_limits<int>::max()),
          field, v, "integer >= 1");
  return static_cast<int>(v);
}

}  // namespace

double sensing_noise(const SystemParams& p) {
  return p.bandwidth * p.boltzmann * p.temperature * p.loss_factor;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
double dbm_to_watts(double dbm) { return db_to_linear(dbm) * 1e-3; }
double watts_to_dbm(double watts) { return linear_to_db(watts * 1e3); }

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto sep = line.find_first_of("=:");
    if (sep == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
    }
    auto key = trim(line.substr(0, sep));
    auto value = trim(line.substr(sep + 1));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", line_no));
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

ParamSet& ParamSet::set(std::string_view key, std::string_view value) {
  const auto [spec, unit] = resolve_key(trim(key));
  double v = parse_number(key, value);
  switch (unit) {
    case Unit::db: v = db_to_linear(v); break;
    case Unit::dbm: v = dbm_to_watts(v); break;
    case Unit::linear: break;
  }
  values_.insert_or_assign(std::string(spec->key), v);
  return *this;
}

ParamSet& ParamSet::merge_text(std::string_view text) {
  for (const auto& [k, v] : parse_key_values(text)) {
    if (k.starts_with("sweep.")) continue;
    set(k, v);
  }
  return *this;
}

ParamSet& ParamSet::merge_env(std::string_view prefix) {
  for (const auto& s : key_specs()) {
    std::vector<std::string> names{s.key};
    for (auto suffix : s.suffixes) names.push_back(fmt::format("{}_{}", s.key, suffix));
    for (const auto& name : names) {
      const auto var = fmt::format("{}{}", prefix, name);
      if (const char* v = std::getenv(var.c_str())) set(name, v);
    }
  }
  return *this;
}

ParamSet& ParamSet::merge_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
  }
  return set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

bool ParamSet::contains(std::string_view base_key) const {
  return values_.find(base_key) != values_.end();
}

SystemParams ParamSet::build() const {
  SystemParams p;
  p.comm_noise = dbm_to_watts(-23.0);
  for (const auto& [key, v] : values_) {
    const auto* spec = find_spec(key);
    if (spec->field) {
      p.*(spec->field) = v;
    } else if (key == "L") {
      p.packet_bits = to_count("L", v);
    } else if (key == "N") {
      p.blocklength = to_count("N", v);
    } else if (key == "theta") {
      p.theta = v;
    }
  }
  if (!contains("tau")) {
    // tau depends on W-independent FBC terms only, so validate the rest first.
    validate(p);
    p.accept_snr = default_accept_snr(p);
  }
  validate(p);
  return p;
}

SystemParams load_params(std::string_view text) { return ParamSet{}.merge_text(text).build(); }

double default_accept_snr(const SystemParams& p) {
  return std::max(kDefaultAcceptSnr, 1.05 * fbc::min_positive_snr(p));
}

const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : key_specs()) k.emplace_back(s.key);
    return k;
  }();
  return keys;
}

std::string serialize(const SystemParams& p) {
  std::string out;
  for (const auto& s : key_specs()) {
    const std::string_view key = s.key;
    if (s.field) {
      out += fmt::format("{} = {:.17g}\n", key, p.*(s.field));
    } else if (key == "L") {
      out += fmt::format("L = {}\n", p.packet_bits);
    } else if (key == "N") {
      out += fmt::format("N = {}\n", p.blocklength);
    } else if (key == "theta" && p.theta) {
      out += fmt::format("theta = {:.17g}\n", *p.theta);
    }
  }
  return out;
}

}  // namespace isac_aoi
