#pragma once

#include "isac_aoi/params.hpp"

namespace isac_aoi::fbc {

/// Gaussian tail P[Z > x] for standard normal Z.
double q_func(double x);

/// Inverse of q_func on (0, 1), by safeguarded Newton iteration on q_func.
/// Throws std::domain_error outside (0, 1).
double q_inv(double eps);

/// Channel dispersion V(gamma) = 1 - (1 + gamma)^-2.
double dispersion(double gamma);

struct RateResult {
  double rate;        // bit/s, may be <= 0
  double snr;         // linear
  double dispersion;  // [0, 1)
};

/// Normal-approximation rate model with Q^-1(epsilon) evaluated once.
class FbcLink {
 public:
  explicit FbcLink(const SystemParams& p);

  /// (W / ln 2) [ln(1 + gamma) - sqrt(V(gamma) / N) Q^-1(epsilon)].
  RateResult rate(double gamma) const;

  /// L / R(gamma). Throws NonPositiveRate when R(gamma) <= 0.
  double airtime(double gamma) const;

  double q_inv_eps() const { return q_inv_eps_; }

 private:
  double bandwidth_;
  double blocklength_;
  double packet_bits_;
  double q_inv_eps_;
};

double fbc_rate(double gamma, const SystemParams& p);
double airtime(double gamma, const SystemParams& p);

/// The SNR at which the FBC rate crosses zero (0 when epsilon >= 0.5).
double min_positive_snr(const SystemParams& p);

}  // namespace isac_aoi::fbc
