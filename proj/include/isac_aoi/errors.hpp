#pragma once

#include <stdexcept>
#include <string>

namespace isac_aoi {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed config text or an out-of-range parameter value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The FBC rate is not positive at the requested SNR, so airtime is undefined.
class NonPositiveRate : public Error {
 public:
  using Error::Error;
};

/// alpha = 1 leaves no sensing power while a detection threshold is set.
class AllPowerToComm : public Error {
 public:
  using Error::Error;
};

/// alpha = 0 leaves no communication power.
class AllPowerToSensing : public Error {
 public:
  using Error::Error;
};

/// The SNR acceptance threshold does not give a positive rate at the gain floor.
class TauTooLow : public Error {
 public:
  using Error::Error;
};

/// The simulated queue grew without bound.
class NonProgress : public Error {
 public:
  using Error::Error;
};

/// Every power split on the search grid is infeasible.
class NoFeasibleAlpha : public Error {
 public:
  using Error::Error;
};

enum class MgfConstraint {
  arrival_geometric,     // e^{theta T} (1 - P_s) < 1
  service_deferral,      // e^{varpi theta} (1 - p) < 1
  service_retransmission // retry series converges at the gain floor
};

std::string to_string(MgfConstraint c);

/// An MGF was evaluated outside its convergence domain.
class MgfDiverges : public Error {
 public:
  MgfDiverges(MgfConstraint which, double critical_theta);

  MgfConstraint constraint() const noexcept { return constraint_; }
  /// Supremum of the convergence domain for the violated constraint.
  double critical_theta() const noexcept { return critical_theta_; }

 private:
  MgfConstraint constraint_;
  double critical_theta_;
};

}  // namespace isac_aoi
