#pragma once

#include <limits>
#include <string>
#include <vector>

#include "isac_aoi/params.hpp"
#include "isac_aoi/sensing.hpp"
#include "isac_aoi/service.hpp"

namespace isac_aoi::bound {

inline constexpr double kSentinel = std::numeric_limits<double>::infinity();

/// Which constraint caps the admissible theta interval.
enum class ThetaLimit {
  arrival,                 // arrival MGF convergence
  service_deferral,        // service MGF, deferral series
  service_retransmission,  // service MGF, retry series at the gain floor
  stability,               // M_A(-theta) M_S(theta) = 1
  chernoff_cap,            // e^{-theta zeta} would underflow
};

/// Why a bound is vacuous: the arrival side (packets too rare) or the
/// queue side (stability lost).
enum class Divergence { none, numerator, denominator };

std::string to_string(ThetaLimit l);
std::string to_string(Divergence d);

struct BoundDiagnostics {
  double arrival_mgf_pos = 0.0;   // M_A(theta)
  double arrival_mgf_neg = 0.0;   // M_A(-theta)
  double service_mgf = 0.0;       // M_S(theta)
  double stability_product = 0.0; // M_A(-theta) M_S(theta)
};

struct BoundResult {
  double pavp_bound = kSentinel;  // raw value, +inf when no stable theta
  double theta_star = 0.0;
  double alpha = 0.0;
  bool stable = false;
  BoundDiagnostics diagnostics;
  Divergence divergence = Divergence::none;
  std::string note;

  /// The bound as a probability: clamped to 1.
  double reported() const { return pavp_bound < 1.0 ? pavp_bound : 1.0; }
  bool vacuous() const { return !(pavp_bound < 1.0); }
};

/// Both MGF models and the remaining scalars for one power split.
struct BoundModel {
  sensing::ArrivalModel arrival;
  service::ServiceModel service;
  double paoi_threshold;  // zeta [s]
  double alpha;
  service::QuadratureOptions quadrature{};
};

/// Throws AllPowerToComm / AllPowerToSensing / TauTooLow from the sub-models.
BoundModel make_bound_model(const SystemParams& p);

/// e^{-theta zeta} M_A(theta) / (M_S(theta)^-1 - M_A(-theta)), or the
/// sentinel with stable = false when M_A(-theta) M_S(theta) >= 1.
/// Throws MgfDiverges from either MGF and std::invalid_argument for theta <= 0.
BoundResult pavp_bound(double theta, const BoundModel& m);
BoundResult pavp_bound(double theta, const SystemParams& p);

struct ThetaRange {
  bool feasible = false;     // some theta in (0, upper) is stable
  double upper = 0.0;        // tightest limit
  ThetaLimit binding = ThetaLimit::stability;
  double arrival_limit = 0.0;
  double service_limit = 0.0;
  double stability_limit = 0.0;  // +inf when stable up to the other limits
  double chernoff_cap = 0.0;
};

/// The admissible theta interval (0, upper) for a model.
ThetaRange theta_range(const BoundModel& m);

/// min over theta of pavp_bound: 64-point log grid over four decades below
/// the tightest limit, then golden-section refinement to 1e-6 relative.
/// Returns the sentinel when no stable theta exists.
BoundResult optimize_theta(const BoundModel& m);
/// Also maps AllPowerToComm / AllPowerToSensing at this alpha to a sentinel;
/// TauTooLow does not depend on alpha and propagates.
BoundResult optimize_theta(const SystemParams& p, double alpha);

struct AlphaSearchOptions {
  int grid_points = 128;
  double tolerance = 1e-4;  // absolute, in alpha
  unsigned workers = 0;     // 0 = hardware concurrency
};

struct AlphaSearch {
  BoundResult best;
  std::vector<BoundResult> grid;  // one entry per grid alpha, ascending
};

/// min over alpha in (0, 1) of optimize_theta: uniform grid, then
/// golden-section refinement around the best cell. Throws NoFeasibleAlpha.
AlphaSearch optimize_alpha(const SystemParams& p, const AlphaSearchOptions& opts = {});

}  // namespace isac_aoi::bound
