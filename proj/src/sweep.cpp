#include "isac_aoi/sweep.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "isac_aoi/bound.hpp"
#include "isac_aoi/errors.hpp"
#include "isac_aoi/parallel.hpp"
#include "isac_aoi/random.hpp"
#include "isac_aoi/sensing.hpp"
#include "isac_aoi/sim.hpp"
#include "isac_aoi/stats.hpp"

namespace isac_aoi::sweep {
namespace {

constexpr std::array<std::string_view, 8> kVariables = {"D",       "W", "alpha", "zeta",
                                                        "varpi", "epsilon", "d", "rho_bar"};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

double to_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("field '{}': cannot parse '{}' as a number", key, text));
  }
  return v;
}

std::vector<double> to_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(to_double(key, text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

long long to_count(std::string_view key, std::string_view text, long long min) {
  const double v = to_double(key, text);
  if (!(v >= static_cast<double>(min) && v == std::floor(v) && v < 9e18)) {
    throw ConfigError(fmt::format("field '{}' = {} out of range, allowed integer >= {}", key, v, min));
  }
  return static_cast<long long>(v);
}

// Base parameter key behind a possibly dB-suffixed key, e.g. rho_bar_dbsm -> rho_bar.
std::string_view base_key(std::string_view key) {
  for (auto v : kVariables) {
    if (key == v) return v;
    if (key.starts_with(v) && key.size() > v.size() && key[v.size()] == '_' &&
        key.substr(v.size() + 1).starts_with("db")) {
      return v;
    }
  }
  return key;
}

std::string fmt_num(double v) { return fmt::format("{:.10g}", v); }

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string{}; }

}  // namespace

DetectionEstimate simulate_detection(const SystemParams& p, std::uint64_t draws,
                                     std::uint64_t seed, std::uint64_t stream) {
  Rng rng = make_stream(seed, stream);
  DetectionEstimate e;
  e.draws = draws;
  for (std::uint64_t i = 0; i < draws; ++i) {
    if (sensing::sample_detection(p, rng)) ++e.detections;
  }
  return e;
}

void set_field(SweepSpec& spec, std::string_view key, std::string_view value) {
  if (key.starts_with("sweep.")) key.remove_prefix(6);
  value = trim(value);
  if (key == "variable") {
    spec.variable = std::string(value);
  } else if (key == "grid") {
    spec.grid = to_list("sweep.grid", value);
  } else if (key == "outputs") {
    if (value == "bound") spec.outputs = Outputs::bound;
    else if (value == "sim") spec.outputs = Outputs::sim;
    else if (value == "both") spec.outputs = Outputs::both;
    else throw ConfigError(fmt::format("sweep.outputs: '{}' is not bound|sim|both", value));
  } else if (key == "metric") {
    if (value == "pavp") spec.metric = Metric::pavp;
    else if (value == "sdp") spec.metric = Metric::sdp;
    else throw ConfigError(fmt::format("sweep.metric: '{}' is not pavp|sdp", value));
  } else if (key == "series") {
    const auto colon = value.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError(fmt::format("sweep.series: expected 'key:v1,v2', got '{}'", value));
    }
    spec.series_key = std::string(trim(value.substr(0, colon)));
    spec.series_values = to_list("sweep.series", value.substr(colon + 1));
  } else if (key == "optimize_alpha") {
    if (value == "true" || value == "1") spec.optimize_alpha = true;
    else if (value == "false" || value == "0") spec.optimize_alpha = false;
    else throw ConfigError(fmt::format("sweep.optimize_alpha: '{}' is not a boolean", value));
  } else if (key == "packets") {
    spec.packets = to_count("sweep.packets", value, 1);
  } else if (key == "replications") {
    spec.replications = static_cast<int>(to_count("sweep.replications", value, 0));
  } else if (key == "seed") {
    spec.seed = static_cast<std::uint64_t>(to_count("sweep.seed", value, 0));
  } else if (key == "gain_mode") {
    if (value == "per-packet") spec.gain_mode = service::GainMode::per_packet;
    else if (value == "per-attempt") spec.gain_mode = service::GainMode::per_attempt;
    else throw ConfigError(fmt::format("sweep.gain_mode: '{}' is not per-packet|per-attempt", value));
  } else {
    throw ConfigError(fmt::format("unknown sweep key 'sweep.{}'", key));
  }
}

SweepSpec parse_sweep_spec(std::string_view text) {
  SweepSpec spec;
  for (const auto& [k, v] : parse_key_values(text)) {
    if (k.starts_with("sweep.")) set_field(spec, k, v);
  }
  return spec;
}

void validate(const SweepSpec& spec) {
  if (std::find(kVariables.begin(), kVariables.end(), base_key(spec.variable)) ==
      kVariables.end()) {
    throw ConfigError(fmt::format(
        "sweep.variable '{}' not one of D, W, alpha, zeta, varpi, epsilon, d, rho_bar",
        spec.variable));
  }
  if (spec.grid.empty()) throw ConfigError("sweep.grid is empty");
  const bool up = spec.grid.size() < 2 || spec.grid[1] > spec.grid[0];
  for (std::size_t i = 1; i < spec.grid.size(); ++i) {
    if (up ? !(spec.grid[i] > spec.grid[i - 1]) : !(spec.grid[i] < spec.grid[i - 1])) {
      throw ConfigError("sweep.grid must be strictly monotone");
    }
  }
  if (spec.wants_sim() && spec.replications < 1) {
    throw ConfigError("sweep.replications must be >= 1 when simulation output is requested");
  }
  if (!spec.series_key.empty() && spec.series_values.empty()) {
    throw ConfigError("sweep.series has a key but no values");
  }
}

std::vector<SweepRow> run_sweep(const ParamSet& base, const SweepSpec& spec, unsigned workers) {
  validate(spec);
  const std::size_t n_series = spec.series_key.empty() ? 1 : spec.series_values.size();
  const std::size_t n_grid = spec.grid.size();
  std::vector<SweepRow> rows(n_series * n_grid);

  // Build every parameter set up front so config errors surface before work starts.
  std::vector<SystemParams> params(rows.size());
  for (std::size_t s = 0; s < n_series; ++s) {
    for (std::size_t g = 0; g < n_grid; ++g) {
      ParamSet ps = base;
      auto& row = rows[s * n_grid + g];
      if (!spec.series_key.empty()) {
        ps.set(spec.series_key, fmt::format("{:.17g}", spec.series_values[s]));
        row.series = spec.series_values[s];
      }
      ps.set(spec.variable, fmt::format("{:.17g}", spec.grid[g]));
      row.value = spec.grid[g];
      params[s * n_grid + g] = ps.build();
    }
  }

  parallel_for(
      rows.size(),
      [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        auto& row = rows[i];
        SystemParams p = params[i];
        if (spec.metric == Metric::sdp) {
          if (spec.wants_bound()) row.analytic = sensing::sdp(p);
          row.alpha = p.alpha;
          if (spec.wants_sim()) {
            DetectionEstimate total;
            for (int r = 0; r < spec.replications; ++r) {
              const auto e = simulate_detection(p, static_cast<std::uint64_t>(spec.packets),
                                                spec.seed, i * 1000003ULL + r);
              total.detections += e.detections;
              total.draws += e.draws;
            }
            row.empirical = static_cast<double>(total.detections) / static_cast<double>(total.draws);
            const auto ci = wilson_interval(total.detections, total.draws);
            row.ci_lo = ci.lo;
            row.ci_hi = ci.hi;
            row.std_error = binomial_std_error(total.detections, total.draws);
            row.samples = total.draws;
          }
        } else {
          bound::BoundResult b;
          const bool need_alpha = spec.optimize_alpha;
          if (spec.wants_bound() || need_alpha) {
            if (need_alpha) {
              b = bound::optimize_alpha(p, {.workers = 1}).best;
              p.alpha = b.alpha;
            } else if (p.theta) {
              b = bound::pavp_bound(*p.theta, p);
            } else {
              b = bound::optimize_theta(p, p.alpha);
            }
            row.analytic = b.pavp_bound;
            row.theta_star = b.theta_star;
            row.divergence = b.divergence == bound::Divergence::none ? "" : to_string(b.divergence);
          }
          row.alpha = p.alpha;
          if (spec.wants_sim()) {
            sim::SimOptions o;
            o.n_packets = spec.packets;
            o.seed = spec.seed;
            o.gain_mode = spec.gain_mode;
            const auto st = sim::run_replications(p, o, spec.replications, 1);
            row.empirical = st.pavp_hat;
            row.ci_lo = st.pavp_ci.lo;
            row.ci_hi = st.pavp_ci.hi;
            row.std_error = st.pavp_std_error;
            row.samples = st.paoi_samples.size();
          }
        }
        row.runtime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      },
      workers);
  return rows;
}

void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows,
               bool timing) {
  const std::string series = spec.series_key.empty() ? "series" : spec.series_key;
  const std::string analytic = spec.metric == Metric::sdp ? "sdp" : "bound";
  const std::string empirical = spec.metric == Metric::sdp ? "sdp_sim" : "pavp_sim";
  out << fmt::format("{},{},{},{}_clamped,theta_star,alpha,divergence,{},ci_lo,ci_hi,std_error,samples",
                     series, spec.variable, analytic, analytic, empirical);
  if (timing) out << ",runtime_s";
  out << '\n';
  for (const auto& r : rows) {
    std::optional<double> clamped;
    if (r.analytic) clamped = std::min(1.0, *r.analytic);
    out << fmt_opt(r.series) << ',' << fmt_num(r.value) << ',' << fmt_opt(r.analytic) << ','
        << fmt_opt(clamped) << ',';
    if (r.analytic && spec.metric == Metric::pavp) out << fmt_num(r.theta_star);
    out << ',' << fmt_num(r.alpha) << ',' << r.divergence << ',';
    if (r.empirical) {
      out << fmt_num(*r.empirical) << ',' << fmt_num(r.ci_lo) << ',' << fmt_num(r.ci_hi) << ','
          << fmt_num(r.std_error) << ',' << r.samples;
    } else {
      out << ",,,,";
    }
    if (timing) out << ',' << fmt::format("{:.3f}", r.runtime_s);
    out << '\n';
  }
}

}  // namespace isac_aoi::sweep
