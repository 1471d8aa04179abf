#include "isac_aoi/sensing.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "isac_aoi/errors.hpp"

namespace isac_aoi::sensing {
namespace {

double four_pi_cubed() {
  const double f = 4.0 * std::numbers::pi;
  return f * f * f;
}

// P_s G_t G_r sigma^2 / ((4 pi)^3 D^{2 kappa}), the echo power per unit RCS.
double echo_gain(const SystemParams& p) {
  return p.sensing_power() * p.gain_tx * p.gain_rx * p.wavelength * p.wavelength /
         (four_pi_cubed() * std::pow(p.max_range, 2.0 * p.path_loss_exp));
}

}  // namespace

double echo_power(const SystemParams& p, double rcs) {
  if (!(rcs >= 0.0)) throw std::invalid_argument(fmt::format("echo_power: negative RCS {}", rcs));
  return echo_gain(p) * rcs;
}

double sdp(const SystemParams& p) {
  if (p.detect_snr == 0.0) return 1.0;
  if (p.alpha >= 1.0) {
    throw AllPowerToComm("alpha = 1 leaves no sensing power; detection probability is zero");
  }
  return std::exp(-p.detect_snr * sensing_noise(p) / (echo_gain(p) * p.mean_rcs));
}

ArrivalModel make_arrival_model(const SystemParams& p) {
  const double ps = sdp(p);
  if (!(ps > 0.0)) {
    throw AllPowerToComm(fmt::format(
        "detection probability underflows to zero at alpha = {}; no packets are generated",
        p.alpha));
  }
  return {p.scan_period, ps};
}

double arrival_theta_limit(const ArrivalModel& m) {
  if (m.detect_prob >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::log1p(-m.detect_prob) / m.scan_period;
}

double arrival_mgf(double theta, const ArrivalModel& m) {
  if (theta > 0.0) {
    const double limit = arrival_theta_limit(m);
    if (!(theta < limit)) throw MgfDiverges(MgfConstraint::arrival_geometric, limit);
  }
  const double x = -theta * m.scan_period;
  // expm1 keeps small |theta| T exact; once e^{x} is small the "+1" would cancel it.
  const double denom = x > -0.5 ? std::expm1(x) / m.detect_prob + 1.0
                                : (std::exp(x) - (1.0 - m.detect_prob)) / m.detect_prob;
  return 1.0 / denom;
}

double arrival_mgf_series_form(double theta, const ArrivalModel& m) {
  const double e = std::exp(theta * m.scan_period);
  const double denom = 1.0 - (1.0 - m.detect_prob) * e;
  if (!(denom > 0.0)) throw MgfDiverges(MgfConstraint::arrival_geometric, arrival_theta_limit(m));
  return m.detect_prob * e / denom;
}

long long sample_scans(const ArrivalModel& m, Rng& rng) {
  if (m.detect_prob >= 1.0) return 1;
  std::geometric_distribution<long long> failures(m.detect_prob);
  return failures(rng) + 1;
}

double sample_interarrival(const ArrivalModel& m, Rng& rng) {
  return static_cast<double>(sample_scans(m, rng)) * m.scan_period;
}

bool sample_detection(const SystemParams& p, Rng& rng) {
  std::exponential_distribution<double> rcs(1.0 / p.mean_rcs);
  return echo_power(p, rcs(rng)) / sensing_noise(p) > p.detect_snr;
}

}  // namespace isac_aoi::sensing
