#pragma once

#include "isac_aoi/params.hpp"
#include "isac_aoi/random.hpp"

namespace isac_aoi::sensing {

/// Radar-side arrival process: one Bernoulli(detect_prob) trial per scan.
struct ArrivalModel {
  double scan_period;  // T [s]
  double detect_prob;  // P_s(d), in (0, 1]
};

/// Received echo power for a target with radar cross section `rcs` [m^2].
double echo_power(const SystemParams& p, double rcs);

/// Swerling-I successful detection probability, exp(-d N_s / mean echo power).
/// Throws AllPowerToComm when alpha = 1 and d > 0.
double sdp(const SystemParams& p);

/// Throws AllPowerToComm when the detection probability is zero (including
/// underflow for vanishing sensing power).
ArrivalModel make_arrival_model(const SystemParams& p);

/// Supremum of the arrival MGF domain, -ln(1 - P_s) / T (infinite for P_s = 1).
double arrival_theta_limit(const ArrivalModel& m);

/// MGF of the inter-arrival time, ((e^{-theta T} - 1) / P_s + 1)^-1.
/// Throws MgfDiverges when theta >= arrival_theta_limit(m).
double arrival_mgf(double theta, const ArrivalModel& m);

/// Same MGF via the geometric-series form P_s e^{theta T} / (1 - (1 - P_s) e^{theta T}).
double arrival_mgf_series_form(double theta, const ArrivalModel& m);

/// Number of scans up to and including the first detection, support {1, 2, ...}.
long long sample_scans(const ArrivalModel& m, Rng& rng);

/// Inter-arrival time K * T with K ~ Geometric(P_s) on {1, 2, ...}.
double sample_interarrival(const ArrivalModel& m, Rng& rng);

/// One Swerling-I scan: draws the RCS from Exp(mean rho_bar) and tests the
/// echo SNR against d.
bool sample_detection(const SystemParams& p, Rng& rng);

}  // namespace isac_aoi::sensing
