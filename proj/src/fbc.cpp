#include "isac_aoi/fbc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "isac_aoi/errors.hpp"

namespace isac_aoi::fbc {

double q_func(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inv(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::domain_error(fmt::format("q_inv: eps = {} outside (0, 1)", eps));
  }
  // Q(-38.5) rounds to 1 and Q(38.5) is below the smallest subnormal.
  // Newton runs on ln Q(x) - ln eps, which is close to quadratic in the tails.
  double lo = -38.5;
  double hi = 38.5;
  const double target = std::log(eps);
  double x = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double q = q_func(x);
    if (q == 0.0) {
      hi = x;
      x = 0.5 * (lo + hi);
      continue;
    }
    const double g = std::log(q) - target;
    if (g == 0.0) return x;
    if (g > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    double next = x + g * q / pdf;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

double dispersion(double gamma) {
  if (!(gamma >= 0.0)) {
    throw std::invalid_argument(fmt::format("dispersion: negative SNR {}", gamma));
  }
  const double inv = 1.0 / (1.0 + gamma);
  return 1.0 - inv * inv;
}

FbcLink::FbcLink(const SystemParams& p)
    : bandwidth_(p.bandwidth),
      blocklength_(static_cast<double>(p.blocklength)),
      packet_bits_(static_cast<double>(p.packet_bits)),
      q_inv_eps_(q_inv(p.epsilon)) {}

RateResult FbcLink::rate(double gamma) const {
  const double v = dispersion(gamma);
  const double nats = std::log1p(gamma) - std::sqrt(v / blocklength_) * q_inv_eps_;
  return {bandwidth_ / std::numbers::ln2 * nats, gamma, v};
}

double FbcLink::airtime(double gamma) const {
  const double r = rate(gamma).rate;
  if (!(r > 0.0)) {
    throw NonPositiveRate(fmt::format(
        "FBC rate {} bit/s at SNR {} is not positive; raise the acceptance threshold tau", r,
        gamma));
  }
  return packet_bits_ / r;
}

double fbc_rate(double gamma, const SystemParams& p) { return FbcLink(p).rate(gamma).rate; }

double airtime(double gamma, const SystemParams& p) { return FbcLink(p).airtime(gamma); }

double min_positive_snr(const SystemParams& p) {
  const FbcLink link(p);
  if (link.q_inv_eps() <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (link.rate(hi).rate <= 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (link.rate(mid).rate > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace isac_aoi::fbc
