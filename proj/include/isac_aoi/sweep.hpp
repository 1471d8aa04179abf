#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "isac_aoi/params.hpp"
#include "isac_aoi/service.hpp"

namespace isac_aoi::sweep {

enum class Outputs { bound, sim, both };

/// `pavp`: analytic bound vs simulated PAVP. `sdp`: Swerling-I detection
/// probability vs a Monte Carlo scan count.
enum class Metric { pavp, sdp };

/// One experiment sweep, read from `sweep.*` keys of a recipe file:
///
///   sweep.variable       D | W | alpha | zeta | varpi | epsilon | d | rho_bar
///   sweep.grid           comma-separated values, strictly monotone
///   sweep.outputs        bound | sim | both
///   sweep.metric         pavp | sdp
///   sweep.series         optional `key:v1,v2,...`, one curve per value
///   sweep.optimize_alpha true | false (pavp only; re-optimize alpha per point)
///   sweep.packets, sweep.replications, sweep.seed, sweep.gain_mode
struct SweepSpec {
  std::string variable;
  std::vector<double> grid;
  Outputs outputs = Outputs::bound;
  Metric metric = Metric::pavp;
  std::string series_key;
  std::vector<double> series_values;
  bool optimize_alpha = false;
  long long packets = 100000;
  int replications = 1;
  std::uint64_t seed = 1;
  service::GainMode gain_mode = service::GainMode::per_packet;

  bool wants_bound() const { return outputs != Outputs::sim; }
  bool wants_sim() const { return outputs != Outputs::bound; }
};

/// Applies one `sweep.*` key (prefix optional). Throws ConfigError.
void set_field(SweepSpec& spec, std::string_view key, std::string_view value);

/// Reads every `sweep.*` key from recipe text; other keys are ignored.
SweepSpec parse_sweep_spec(std::string_view text);

/// Throws ConfigError on an empty or non-monotone grid, an unknown variable,
/// or zero replications with sim output.
void validate(const SweepSpec& spec);

struct SweepRow {
  std::optional<double> series;
  double value = 0.0;
  // analytic side
  std::optional<double> analytic;  // raw bound or SDP
  double theta_star = 0.0;
  double alpha = 0.0;
  std::string divergence;
  // empirical side
  std::optional<double> empirical;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  double runtime_s = 0.0;
};

/// Evaluates every (series value, grid value) pair on a worker pool; rows are
/// ordered by series then grid index. Deterministic for a fixed spec.
std::vector<SweepRow> run_sweep(const ParamSet& base, const SweepSpec& spec, unsigned workers = 0);

/// CSV with a header row. The runtime column is only written when `timing`
/// is set, since it breaks byte-stability across runs.
void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows,
               bool timing = false);

/// Swerling-I Monte Carlo: fraction of `draws` scans whose echo SNR exceeds d.
struct DetectionEstimate {
  std::uint64_t detections = 0;
  std::uint64_t draws = 0;
};
DetectionEstimate simulate_detection(const SystemParams& p, std::uint64_t draws,
                                     std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace isac_aoi::sweep
