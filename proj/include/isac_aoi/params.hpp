#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace isac_aoi {

/// Physical constants fixed by the radar noise model.
inline constexpr double kBoltzmann = 1.38e-23;  // W*s/K
inline constexpr double kStandardTemperature = 290.0;  // K
inline constexpr double kDefaultAcceptSnr = 1e5;

/// Every model parameter, normalized to SI units and linear scale.
///
/// Config keys use the model symbols (P_t, W, varpi, ...); the mapping to
/// members is listed next to each field. Immutable once built; share freely
/// between threads.
struct SystemParams {
  double total_power = 10.0;        // P_t [W]
  double alpha = 0.5;               // alpha, fraction of P_t given to comm
  double bandwidth = 25e3;          // W [Hz]
  double scan_period = 1e-3;        // T [s]
  int packet_bits = 100;            // L
  int blocklength = 100;            // N [symbols]
  double epsilon = 1e-3;            // decoding error probability
  double comm_noise = 0.0;          // N_c [W], default from -23 dBm
  double max_range = 100.0;         // D [m]
  double path_loss_exp = 2.0;       // kappa
  double wavelength = 4e-3;         // sigma_wl [m]
  double gain_tx = 10.0;            // G_t, linear
  double gain_rx = 10.0;            // G_r, linear
  double mean_rcs = 10.0;           // rho_bar [m^2]
  double boltzmann = kBoltzmann;    // varsigma
  double temperature = kStandardTemperature;  // chi [K]
  double loss_factor = 10.0;        // varphi, linear
  double accept_snr = kDefaultAcceptSnr;  // tau, linear
  double detect_snr = 10.0;         // d, linear
  double deferral = 0.5e-3;         // varpi [s]
  double paoi_threshold = 6e-3;     // zeta [s]
  std::optional<double> theta;      // Chernoff parameter [1/s]; optimized when absent

  double comm_power() const { return alpha * total_power; }
  double sensing_power() const { return (1.0 - alpha) * total_power; }

  bool operator==(const SystemParams&) const = default;
};

/// N_s = W * varsigma * chi * varphi.
double sensing_noise(const SystemParams& p);

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Layered parameter assembly: defaults < config text < environment < --set.
///
/// Each `set` converts dB-suffixed keys (`_db`, `_dbm`, `_dbi`, `_dbsm`) to
/// the linear base key immediately, so later layers override earlier ones
/// regardless of which unit either layer used.
class ParamSet {
 public:
  /// Assigns one key. Throws ConfigError on unknown keys or unparsable values.
  ParamSet& set(std::string_view key, std::string_view value);

  /// Parses `key = value` lines (`:` also accepted, `#` starts a comment).
  /// Keys under the `sweep.` namespace are skipped.
  ParamSet& merge_text(std::string_view text);

  /// Applies every environment variable named `<prefix><key>`.
  ParamSet& merge_env(std::string_view prefix = "ISAC_AOI_");

  /// Applies a `key=value` override string.
  ParamSet& merge_assignment(std::string_view assignment);

  bool contains(std::string_view base_key) const;

  /// Resolves defaults, derives tau when unset, and validates every range.
  SystemParams build() const;

 private:
  std::map<std::string, double, std::less<>> values_;
};

SystemParams load_params(std::string_view text);

/// Writes every parameter as `key = value` in linear SI units with full
/// precision, so that `load_params(serialize(p)) == p`.
std::string serialize(const SystemParams& p);

/// Base config keys in canonical order.
const std::vector<std::string>& param_keys();

/// Default SNR acceptance threshold: 50 dB, raised to 1.05 times the smallest
/// SNR with a positive FBC rate if that is higher.
double default_accept_snr(const SystemParams& p);

/// Splits config text into trimmed (key, value) pairs; comments and blank
/// lines dropped. Throws ConfigError on a line without a separator.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

}  // namespace isac_aoi
