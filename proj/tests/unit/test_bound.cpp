#include <doctest.h>

#include <cmath>
#include <random>

#include "isac_aoi/bound.hpp"
#include "isac_aoi/errors.hpp"
#include "isac_aoi/sim.hpp"

using namespace isac_aoi;
using namespace isac_aoi::bound;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

SystemParams params(const std::string& text = "") { return load_params(text); }

}  // namespace

TEST_CASE("bound at fixed theta matches the high-precision composition") {
  const auto p = params();
  CHECK(rel(pavp_bound(300.0, p).pavp_bound, 1.2608992635912788) < 1e-9);
  CHECK(rel(pavp_bound(1500.0, p).pavp_bound, 0.0015685381811654029) < 1e-9);
  const auto r = pavp_bound(1500.0, p);
  CHECK(r.stable);
  CHECK(r.diagnostics.stability_product < 1.0);
  CHECK(rel(r.diagnostics.stability_product,
            r.diagnostics.arrival_mgf_neg * r.diagnostics.service_mgf) < 1e-14);
  CHECK_THROWS_AS(pavp_bound(0.0, p), std::invalid_argument);
}

TEST_CASE("huge threshold drives the bound to zero") {
  const auto r = pavp_bound(1000.0, params("zeta = 1e6"));
  CHECK(r.stable);
  CHECK(r.pavp_bound < 1e-300);
}

TEST_CASE("unstable theta returns the sentinel") {
  auto p = params("alpha = 0.3");
  const auto range = theta_range(make_bound_model(p));
  REQUIRE(range.binding == ThetaLimit::stability);
  REQUIRE(range.stability_limit * 1.001 < range.service_limit);
  const auto r = pavp_bound(range.stability_limit * 1.001, p);
  CHECK_FALSE(r.stable);
  CHECK(r.pavp_bound == kSentinel);
  CHECK(r.diagnostics.stability_product >= 1.0);

  // At fixed theta, lowering alpha starves the link until M_A(-theta) M_S(theta) = 1.
  const double theta = 2000.0;
  auto stable_at = [&](double a) {
    p.alpha = a;
    return pavp_bound(theta, p).stable;
  };
  double lo = 0.1, hi = 0.5;
  REQUIRE(stable_at(hi));
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    try {
      (stable_at(mid) ? hi : lo) = mid;
    } catch (const MgfDiverges&) {
      lo = mid;
    }
  }
  p.alpha = lo - 1e-9;
  const auto below = pavp_bound(theta, p);
  CHECK_FALSE(below.stable);
  CHECK(below.pavp_bound == kSentinel);
  p.alpha = hi + 1e-9;
  CHECK(pavp_bound(theta, p).stable);
}

TEST_CASE("optimized theta beats random feasible theta") {
  const auto m = make_bound_model(params());
  const auto best = optimize_theta(m);
  const auto range = theta_range(m);
  REQUIRE(best.stable);
  CHECK(best.theta_star > 0.0);
  CHECK(best.theta_star < range.upper);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 128; ++i) {
    const double theta = range.upper * (1e-4 + (1.0 - 2e-4) * u(rng));
    const auto r = pavp_bound(theta, m);
    if (r.stable) CHECK(best.pavp_bound <= r.pavp_bound * (1.0 + 1e-9));
  }
}

TEST_CASE("bound blows up toward the edge of the theta interval") {
  const auto m = make_bound_model(params());
  const auto best = optimize_theta(m);
  const auto range = theta_range(m);
  double prev = best.pavp_bound;
  for (double f : {0.9, 0.99, 0.999, 0.9999}) {
    const double theta = best.theta_star + f * (range.upper - best.theta_star);
    const auto r = pavp_bound(theta, m);
    CHECK((!r.stable || r.pavp_bound > prev));
    if (r.stable) prev = r.pavp_bound;
  }
  CHECK(prev > 1e3 * best.pavp_bound);
}

TEST_CASE("deterministic queue: minimizer sits at the Chernoff cap") {
  const auto p = params();
  BoundModel m{sensing::ArrivalModel{p.scan_period, 1.0},
               service::ServiceModel{1.0, 1.0, 1e12, p.deferral, 1.0, fbc::FbcLink(p)},
               p.paoi_threshold, 0.5};
  const auto range = theta_range(m);
  CHECK(range.binding == ThetaLimit::chernoff_cap);
  CHECK(rel(range.upper, 700.0 / p.paoi_threshold) < 1e-14);
  const auto r = optimize_theta(m);
  REQUIRE(r.stable);
  // Bound e^{-theta (zeta - T - phi)} / (1 - e^{-theta (T - phi)}) keeps falling.
  CHECK(r.theta_star > range.upper * std::pow(10.0, -4.0 / 63.0));
  CHECK(r.pavp_bound < 1e-100);
}

TEST_CASE("extreme power splits give sentinels") {
  const auto starved = optimize_theta(params(), 1e-9);
  CHECK_FALSE(starved.stable);
  CHECK(starved.pavp_bound == kSentinel);
  CHECK(starved.divergence == Divergence::denominator);

  const auto blind = optimize_theta(params(), 0.9999);
  CHECK(blind.vacuous());
  CHECK(blind.reported() == 1.0);
  CHECK(blind.divergence == Divergence::numerator);
  CHECK_FALSE(blind.note.empty());
}

TEST_CASE("alpha search") {
  AlphaSearchOptions opts;
  opts.workers = 1;
  const auto s = optimize_alpha(params(), opts);
  REQUIRE(s.grid.size() == 128);
  for (const auto& g : s.grid) CHECK(s.best.pavp_bound <= g.pavp_bound);
  CHECK(s.best.alpha > 0.0);
  CHECK(s.best.alpha < 1.0);
  CHECK(s.grid.front().vacuous());
  CHECK(s.grid.back().vacuous());
  CHECK(s.best.pavp_bound < 1e-6);

  CHECK_THROWS_AS(optimize_alpha(params("T = 1e-5"), opts), NoFeasibleAlpha);
}

TEST_CASE("optimal alpha moves toward sensing as the threshold grows") {
  AlphaSearchOptions opts;
  opts.workers = 1;
  const double a4 = optimize_alpha(params("zeta = 0.004"), opts).best.alpha;
  const double a8 = optimize_alpha(params("zeta = 0.008"), opts).best.alpha;
  CHECK(a4 > a8);
}

TEST_CASE("re-optimized bound is non-increasing in the threshold") {
  AlphaSearchOptions opts;
  opts.workers = 1;
  opts.grid_points = 32;
  double prev = 1.0;
  for (double zeta : {0.003, 0.004, 0.005, 0.006, 0.008, 0.01}) {
    auto p = params();
    p.paoi_threshold = zeta;
    const double b = optimize_alpha(p, opts).best.reported();
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("bound dominates a simulated estimate") {
  const auto p = params("zeta = 0.003");
  const auto r = optimize_theta(p, p.alpha);
  sim::SimOptions o;
  o.n_packets = 200000;
  o.seed = 12;
  const auto st = sim::run_sim(p, o).stats;
  CHECK(r.pavp_bound >= st.pavp_hat - 3.0 * st.pavp_std_error);
}

TEST_CASE("labels") {
  CHECK(to_string(Divergence::numerator) == "numerator divergence");
  CHECK(to_string(Divergence::denominator) == "denominator divergence");
  CHECK(to_string(ThetaLimit::chernoff_cap) != to_string(ThetaLimit::stability));
}
