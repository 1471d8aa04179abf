#pragma once

#include "isac_aoi/errors.hpp"
#include "isac_aoi/fbc.hpp"
#include "isac_aoi/params.hpp"
#include "isac_aoi/random.hpp"

namespace isac_aoi::service {

/// Scope of a channel-gain draw across retransmissions.
enum class GainMode {
  per_packet,  // one gain for every attempt of a packet (matches the MGF)
  per_attempt  // fresh gain on each attempt
};

/// Which integrand the service MGF quadrature uses.
///
/// `density_consistent` takes the expectation under the truncated
/// unit-exponential gain density e^{-(h - h_min)}. `untruncated_weight` keeps the
/// extra factor p that appears when e^{-h} is used as the weight, so it equals
/// p times the density-consistent value and gives M(0) = p.
enum class IntegrandForm { density_consistent, untruncated_weight };

/// Communication-side service model built from a parameter snapshot.
struct ServiceModel {
  double p_accept;       // P[gamma > tau] = exp(-tau N_c / P_c)
  double eta;            // (1 - epsilon)^L
  double h_min;          // tau N_c / P_c
  double deferral;       // varpi [s]
  double snr_per_gain;   // P_c / N_c
  fbc::FbcLink link;

  double snr(double gain) const { return snr_per_gain * gain; }
  /// phi(gamma(h)) = L / R(gamma(h)).
  double airtime(double gain) const { return link.airtime(snr(gain)); }
};

double acceptance_probability(const SystemParams& p);
double gain_floor(const SystemParams& p);

/// Throws AllPowerToSensing for alpha = 0 and TauTooLow when the rate at the
/// gain floor is not positive.
ServiceModel build_service_model(const SystemParams& p);

struct ServiceOutcome {
  double probability;  // P[b failed attempts and c deferrals in total]
  double duration;     // c varpi + (b + 1) phi(gamma(h)) [s]
};

/// Joint law of failed attempts b and total deferrals c for a packet whose
/// gain is h: C(c + b, c) (1 - p)^c p^{b + 1} (1 - eta)^b eta.
ServiceOutcome service_pmf(const ServiceModel& m, long long b, long long c, double gain);

struct ServiceDomain {
  double theta_limit;       // supremum of the service MGF domain [1/s]
  MgfConstraint binding;    // which convergence constraint sets it
};

/// The service MGF converges exactly on [0, theta_limit).
ServiceDomain service_domain(const ServiceModel& m);

struct QuadratureOptions {
  double tolerance = 1e-9;
  IntegrandForm form = IntegrandForm::density_consistent;
};

struct MgfEstimate {
  double value;
  double error_estimate;  // tanh-sinh estimate on [u0, 1]
  double tail_bound;      // bound on the error of the (0, u0) sliver
};

/// E_h[p eta / ((1 - e^{varpi theta}(1 - p)) e^{-phi theta} - p (1 - eta))]
/// over h ~ h_min + Exp(1), after substituting h = h_min - ln u.
/// Throws MgfDiverges outside [0, theta_limit) and std::invalid_argument for
/// theta < 0.
MgfEstimate integrate_service_mgf(double theta, const ServiceModel& m,
                                  const QuadratureOptions& opts = {});

double service_mgf(double theta, const ServiceModel& m, const QuadratureOptions& opts = {});

struct ServiceSample {
  double duration;       // [s]
  int attempts;          // b + 1
  long long deferrals;   // c
};

/// Draws the gain from the truncated unit exponential on [h_min, inf).
double sample_gain(const ServiceModel& m, Rng& rng);

/// One service time: per attempt, Geometric(p) deferrals on {0, 1, ...}, one
/// airtime, then a Bernoulli(eta) decode.
ServiceSample sample_service(const ServiceModel& m, Rng& rng,
                             GainMode mode = GainMode::per_packet);

}  // namespace isac_aoi::service
