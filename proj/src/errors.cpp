#include "isac_aoi/errors.hpp"

#include <fmt/format.h>

namespace isac_aoi {

std::string to_string(MgfConstraint c) {
  switch (c) {
    case MgfConstraint::arrival_geometric: return "arrival-geometric";
    case MgfConstraint::service_deferral: return "service-deferral";
    case MgfConstraint::service_retransmission: return "service-retransmission";
  }
  return "unknown";
}

MgfDiverges::MgfDiverges(MgfConstraint which, double critical_theta)
    : Error(fmt::format("MGF diverges: {} constraint violated, critical theta = {:.9g} 1/s",
                        to_string(which), critical_theta)),
      constraint_(which),
      critical_theta_(critical_theta) {}

}  // namespace isac_aoi
