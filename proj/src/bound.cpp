#include "isac_aoi/bound.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "isac_aoi/errors.hpp"
#include "isac_aoi/parallel.hpp"

namespace isac_aoi::bound {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kThetaGrid = 64;
constexpr double kThetaDecades = 4.0;
constexpr double kThetaRelTol = 1e-6;
// e^{-700} is still a normal double.
constexpr double kChernoffExponentCap = 700.0;

// Golden-section search for a minimum of f on [a, b]. f may return +inf.
template <class F, class Tol>
std::pair<double, double> golden_section(F&& f, double a, double b, Tol&& tol) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - r * (b - a);
  double x2 = a + r * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int iter = 0; iter < 200 && (b - a) > tol(a, b); ++iter) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

bool is_stable(double theta, const BoundModel& m) {
  try {
    const double ms = service::service_mgf(theta, m.service, m.quadrature);
    return sensing::arrival_mgf(-theta, m.arrival) * ms < 1.0;
  } catch (const MgfDiverges&) {
    return false;
  }
}

BoundResult evaluate(double theta, const BoundModel& m) {
  try {
    return pavp_bound(theta, m);
  } catch (const MgfDiverges&) {
    BoundResult r;
    r.theta_star = theta;
    r.alpha = m.alpha;
    return r;
  }
}

Divergence classify(ThetaLimit binding) {
  switch (binding) {
    case ThetaLimit::arrival: return Divergence::numerator;
    case ThetaLimit::chernoff_cap: return Divergence::none;
    default: return Divergence::denominator;
  }
}

BoundResult infeasible(double alpha, Divergence why, std::string note) {
  BoundResult r;
  r.alpha = alpha;
  r.divergence = why;
  r.note = std::move(note);
  return r;
}

}  // namespace

std::string to_string(ThetaLimit l) {
  switch (l) {
    case ThetaLimit::arrival: return "arrival";
    case ThetaLimit::service_deferral: return "service-deferral";
    case ThetaLimit::service_retransmission: return "service-retransmission";
    case ThetaLimit::stability: return "stability";
    case ThetaLimit::chernoff_cap: return "chernoff-cap";
  }
  return "unknown";
}

std::string to_string(Divergence d) {
  switch (d) {
    case Divergence::none: return "none";
    case Divergence::numerator: return "numerator divergence";
    case Divergence::denominator: return "denominator divergence";
  }
  return "unknown";
}

BoundModel make_bound_model(const SystemParams& p) {
  return {sensing::make_arrival_model(p), service::build_service_model(p), p.paoi_threshold,
          p.alpha};
}

BoundResult pavp_bound(double theta, const BoundModel& m) {
  if (!(theta > 0.0)) {
    throw std::invalid_argument(fmt::format("pavp_bound: theta = {} must be > 0", theta));
  }
  BoundResult r;
  r.theta_star = theta;
  r.alpha = m.alpha;
  auto& d = r.diagnostics;
  d.arrival_mgf_neg = sensing::arrival_mgf(-theta, m.arrival);
  d.service_mgf = service::service_mgf(theta, m.service, m.quadrature);
  d.arrival_mgf_pos = sensing::arrival_mgf(theta, m.arrival);
  d.stability_product = d.arrival_mgf_neg * d.service_mgf;
  r.stable = d.stability_product < 1.0;
  if (!r.stable) {
    r.divergence = Divergence::denominator;
    r.note = "stability condition violated";
    return r;
  }
  r.pavp_bound = std::exp(-theta * m.paoi_threshold) * d.arrival_mgf_pos /
                 (1.0 / d.service_mgf - d.arrival_mgf_neg);
  return r;
}

BoundResult pavp_bound(double theta, const SystemParams& p) {
  return pavp_bound(theta, make_bound_model(p));
}

ThetaRange theta_range(const BoundModel& m) {
  ThetaRange r;
  r.arrival_limit = sensing::arrival_theta_limit(m.arrival);
  const auto svc = service::service_domain(m.service);
  r.service_limit = svc.theta_limit;
  r.chernoff_cap = kChernoffExponentCap / m.paoi_threshold;

  r.upper = r.chernoff_cap;
  r.binding = ThetaLimit::chernoff_cap;
  if (r.arrival_limit < r.upper) {
    r.upper = r.arrival_limit;
    r.binding = ThetaLimit::arrival;
  }
  if (r.service_limit < r.upper) {
    r.upper = r.service_limit;
    r.binding = svc.binding == MgfConstraint::service_deferral ? ThetaLimit::service_deferral
                                                               : ThetaLimit::service_retransmission;
  }
  if (!(r.upper > 0.0)) return r;

  // ln(M_A(-theta) M_S(theta)) is convex and zero at theta = 0, so the
  // stable set is an interval starting at 0.
  const double probe = r.upper * (1.0 - 1e-9);
  if (is_stable(probe, m)) {
    r.stability_limit = kInf;
    r.feasible = true;
    return r;
  }
  double lo = 0.0;
  double hi = probe;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (is_stable(mid, m)) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (lo > 0.0 && hi - lo <= 1e-10 * hi) break;
    if (lo == 0.0 && hi <= 1e-12 * probe) break;
  }
  r.stability_limit = lo;
  r.feasible = lo > 0.0;
  r.upper = lo;
  r.binding = ThetaLimit::stability;
  return r;
}

BoundResult optimize_theta(const BoundModel& m) {
  const auto range = theta_range(m);
  if (!range.feasible) {
    return infeasible(m.alpha, Divergence::denominator,
                      "no theta satisfies the stability condition");
  }

  const bool open_end = range.binding != ThetaLimit::chernoff_cap;
  const double top = open_end ? range.upper * (1.0 - 1e-9) : range.upper;
  std::vector<double> thetas(kThetaGrid);
  for (int i = 0; i < kThetaGrid; ++i) {
    const double expo = -kThetaDecades * (1.0 - static_cast<double>(i) / (kThetaGrid - 1));
    thetas[i] = std::min(top, range.upper * std::pow(10.0, expo));
  }

  BoundResult best;
  int best_i = -1;
  for (int i = 0; i < kThetaGrid; ++i) {
    auto r = evaluate(thetas[i], m);
    if (best_i < 0 || r.pavp_bound < best.pavp_bound) {
      best = std::move(r);
      best_i = i;
    }
  }

  if (std::isfinite(best.pavp_bound)) {
    const double a = thetas[std::max(0, best_i - 1)];
    const double b = best_i + 1 < kThetaGrid ? thetas[best_i + 1] : top;
    auto [theta, value] = golden_section(
        [&](double t) { return evaluate(t, m).pavp_bound; }, a, b,
        [](double lo, double hi) { return kThetaRelTol * 0.5 * (lo + hi); });
    if (value < best.pavp_bound) best = evaluate(theta, m);
  }

  best.alpha = m.alpha;
  if (!std::isfinite(best.pavp_bound)) {
    best.divergence = classify(range.binding);
    best.note = fmt::format("no finite bound below the {} limit", to_string(range.binding));
  } else if (best.vacuous()) {
    best.divergence = classify(range.binding);
    best.note = fmt::format("bound >= 1; theta capped by the {} limit {:.6g} 1/s",
                            to_string(range.binding), range.upper);
  }
  return best;
}

BoundResult optimize_theta(const SystemParams& p, double alpha) {
  SystemParams q = p;
  q.alpha = alpha;
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return infeasible(alpha, alpha >= 1.0 ? Divergence::numerator : Divergence::denominator,
                      "alpha must lie strictly between 0 and 1");
  }
  try {
    return optimize_theta(make_bound_model(q));
  } catch (const AllPowerToComm& e) {
    return infeasible(alpha, Divergence::numerator, e.what());
  } catch (const AllPowerToSensing& e) {
    return infeasible(alpha, Divergence::denominator, e.what());
  }
}

AlphaSearch optimize_alpha(const SystemParams& p, const AlphaSearchOptions& opts) {
  const int n = opts.grid_points;
  if (n < 1) throw std::invalid_argument("optimize_alpha: grid_points must be >= 1");
  AlphaSearch out;
  out.grid.resize(static_cast<std::size_t>(n));
  auto grid_alpha = [n](int i) { return static_cast<double>(i + 1) / (n + 1); };
  parallel_for(
      out.grid.size(),
      [&](std::size_t i) { out.grid[i] = optimize_theta(p, grid_alpha(static_cast<int>(i))); },
      opts.workers);

  int best_i = -1;
  for (int i = 0; i < n; ++i) {
    const double v = out.grid[i].pavp_bound;
    if (std::isfinite(v) && (best_i < 0 || v < out.grid[best_i].pavp_bound)) best_i = i;
  }
  if (best_i < 0) {
    throw NoFeasibleAlpha(
        fmt::format("no power split on the {}-point alpha grid yields a stable bound", n));
  }
  out.best = out.grid[best_i];

  const double a = best_i > 0 ? grid_alpha(best_i - 1) : 0.5 * grid_alpha(0);
  const double b = best_i + 1 < n ? grid_alpha(best_i + 1) : 0.5 * (1.0 + grid_alpha(n - 1));
  auto [alpha, value] = golden_section(
      [&](double x) { return optimize_theta(p, x).pavp_bound; }, a, b,
      [&](double, double) { return opts.tolerance; });
  // Unimodality is not guaranteed; keep the grid point unless refinement beats it.
  if (value < out.best.pavp_bound) out.best = optimize_theta(p, alpha);
  return out;
}

}  // namespace isac_aoi::bound
