#include "isac_aoi/service.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace isac_aoi::service {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// n * ln(y) with 0 * ln(0) = 0.
double n_log(double n, double y) {
  if (n == 0.0) return 0.0;
  return y > 0.0 ? n * std::log(y) : -kInf;
}

// 1 - e^{varpi theta} (1 - p)
double deferral_factor(const ServiceModel& m, double theta) {
  return 1.0 - std::exp(m.deferral * theta) * (1.0 - m.p_accept);
}

// Denominator of the per-gain MGF at airtime phi.
double retry_denominator(const ServiceModel& m, double theta, double phi) {
  return deferral_factor(m, theta) * std::exp(-phi * theta) - m.p_accept * (1.0 - m.eta);
}

double deferral_limit(const ServiceModel& m) {
  if (m.p_accept >= 1.0) return kInf;
  return -std::log1p(-m.p_accept) / m.deferral;
}

}  // namespace

double acceptance_probability(const SystemParams& p) { return std::exp(-gain_floor(p)); }

double gain_floor(const SystemParams& p) {
  if (!(p.alpha > 0.0)) {
    throw AllPowerToSensing("alpha = 0 leaves no communication power");
  }
  return p.accept_snr * p.comm_noise / p.comm_power();
}

ServiceModel build_service_model(const SystemParams& p) {
  const double h_min = gain_floor(p);
  if (!(std::exp(-h_min) > 0.0)) {
    throw AllPowerToSensing(fmt::format(
        "communication power {} W never clears the acceptance threshold", p.comm_power()));
  }
  ServiceModel m{std::exp(-h_min),
                 std::pow(1.0 - p.epsilon, static_cast<double>(p.packet_bits)),
                 h_min,
                 p.deferral,
                 p.comm_power() / p.comm_noise,
                 fbc::FbcLink(p)};
  const double r = m.link.rate(m.snr(h_min)).rate;
  if (!(r > 0.0)) {
    throw TauTooLow(fmt::format(
        "FBC rate at the acceptance threshold tau = {} is {} bit/s; tau must exceed {}",
        p.accept_snr, r, fbc::min_positive_snr(p)));
  }
  return m;
}

ServiceOutcome service_pmf(const ServiceModel& m, long long b, long long c, double gain) {
  if (b < 0 || c < 0) throw std::invalid_argument("service_pmf: negative count");
  if (!(gain >= m.h_min)) {
    throw std::invalid_argument(
        fmt::format("service_pmf: gain {} below the floor {}", gain, m.h_min));
  }
  const double bd = static_cast<double>(b);
  const double cd = static_cast<double>(c);
  const double log_binom = std::lgamma(bd + cd + 1.0) - std::lgamma(cd + 1.0) - std::lgamma(bd + 1.0);
  const double log_prob = log_binom + n_log(cd, 1.0 - m.p_accept) + n_log(bd + 1.0, m.p_accept) +
                          n_log(bd, 1.0 - m.eta) + std::log(m.eta);
  return {std::exp(log_prob), cd * m.deferral + (bd + 1.0) * m.airtime(gain)};
}

ServiceDomain service_domain(const ServiceModel& m) {
  const double defer = deferral_limit(m);
  const double retry_mass = m.p_accept * (1.0 - m.eta);
  if (retry_mass <= 0.0) return {defer, MgfConstraint::service_deferral};

  // The denominator at the gain floor decreases in theta, is p eta at 0 and
  // negative at both the deferral limit and ln(1 / retry_mass) / phi_max.
  const double phi_max = m.airtime(m.h_min);
  double hi = std::min(defer, -std::log(retry_mass) / phi_max);
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (retry_denominator(m, mid, phi_max) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, MgfConstraint::service_retransmission};
}

MgfEstimate integrate_service_mgf(double theta, const ServiceModel& m,
                                  const QuadratureOptions& opts) {
  if (!(theta >= 0.0)) {
    throw std::invalid_argument(fmt::format("service_mgf: theta = {} must be >= 0", theta));
  }
  const double a = deferral_factor(m, theta);
  if (!(a > 0.0)) throw MgfDiverges(MgfConstraint::service_deferral, deferral_limit(m));
  const double phi_max = m.airtime(m.h_min);
  if (!(retry_denominator(m, theta, phi_max) > 0.0)) {
    throw MgfDiverges(MgfConstraint::service_retransmission, service_domain(m).theta_limit);
  }

  const double numer = m.p_accept * m.eta;
  // u in (0, 1] maps to h = h_min - ln u, so the gain density times dh is du.
  auto integrand = [&](double u) {
    const double h = m.h_min - std::log(u);
    return numer / retry_denominator(m, theta, m.airtime(h));
  };

  // The integrand increases in u; on (0, u0) it lies between its h -> inf
  // limit (zero airtime) and its value at u0.
  constexpr double u0 = 1e-12;
  const double f_inf = numer / retry_denominator(m, theta, 0.0);
  const double f_u0 = integrand(u0);
  const double sliver = 0.5 * u0 * (f_inf + f_u0);
  const double tail_bound = 0.5 * u0 * std::abs(f_u0 - f_inf);

  // Double-exponential quadrature clusters nodes at both ends, where the
  // integrand varies fastest (the gain floor and the h -> inf tail).
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  double err = 0.0;
  const double body = rule.integrate(integrand, u0, 1.0, opts.tolerance, &err);

  double value = body + sliver;
  if (opts.form == IntegrandForm::untruncated_weight) {
    value *= m.p_accept;
    err *= m.p_accept;
  }
  return {value, err, tail_bound};
}

double service_mgf(double theta, const ServiceModel& m, const QuadratureOptions& opts) {
  return integrate_service_mgf(theta, m, opts).value;
}

double sample_gain(const ServiceModel& m, Rng& rng) {
  std::exponential_distribution<double> excess(1.0);
  return m.h_min + excess(rng);
}

ServiceSample sample_service(const ServiceModel& m, Rng& rng, GainMode mode) {
  std::bernoulli_distribution decoded(m.eta);
  ServiceSample s{0.0, 0, 0};
  double gain = mode == GainMode::per_packet ? sample_gain(m, rng) : 0.0;
  double phi = mode == GainMode::per_packet ? m.airtime(gain) : 0.0;
  while (true) {
    if (m.p_accept < 1.0) {
      std::geometric_distribution<long long> waits(m.p_accept);
      const long long c = waits(rng);
      s.deferrals += c;
      s.duration += static_cast<double>(c) * m.deferral;
    }
    if (mode == GainMode::per_attempt) {
      gain = sample_gain(m, rng);
      phi = m.airtime(gain);
    }
    s.duration += phi;
    ++s.attempts;
    if (decoded(rng)) return s;
  }
}

}  // namespace isac_aoi::service
