#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "isac_aoi/errors.hpp"
#include "isac_aoi/fbc.hpp"

using namespace isac_aoi;
using namespace isac_aoi::fbc;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Plain bisection on q_func; slow but shares nothing with q_inv.
double q_inv_bisect(double eps) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (q_func(mid) > eps ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return g;
}

}  // namespace

TEST_CASE("Q function") {
  CHECK(q_func(0.0) == 0.5);
  CHECK(rel(q_func(8.0), 6.2209605742717841e-16) < 1e-12);
  CHECK(rel(q_func(1.0), 0.15865525393145705) < 1e-14);
  CHECK(std::abs(q_func(1.3) + q_func(-1.3) - 1.0) < 1e-15);
  CHECK(rel(q_func(1.3), 0.096800484585610333) < 1e-14);
  double prev = q_func(-8.0);
  for (double x = -7.9; x < 10.0; x += 0.1) {
    CHECK(q_func(x) < prev);
    prev = q_func(x);
  }
}

TEST_CASE("inverse Q") {
  CHECK(std::abs(q_inv(0.5)) < 1e-12);
  CHECK(std::abs(q_inv(1e-3) - 3.0902323061678135) < 1e-10);
  CHECK(std::abs(q_inv(0.158655) - 1.000001049431045) < 1e-9);
  CHECK_THROWS_AS(q_inv(0.0), std::domain_error);
  CHECK_THROWS_AS(q_inv(1.0), std::domain_error);
  CHECK_THROWS_AS(q_inv(-0.1), std::domain_error);
}

TEST_CASE("inverse Q round-trip over (1e-9, 1 - 1e-9)") {
  for (double eps : log_grid(1e-9, 0.5, 200)) {
    CHECK(std::abs(q_func(q_inv(eps)) - eps) <= 1e-9 * eps);
    CHECK(std::abs(q_inv(eps) - q_inv_bisect(eps)) < 1e-9);
    const double upper = 1.0 - eps;
    CHECK(std::abs(q_func(q_inv(upper)) - upper) <= 1e-9);
  }
  for (double x = -4.9; x < 8.0; x += 0.37) CHECK(std::abs(q_inv(q_func(x)) - x) < 1e-9);
}

TEST_CASE("dispersion") {
  CHECK(dispersion(0.0) == 0.0);
  CHECK(dispersion(1.0) == 0.75);
  CHECK(std::abs(dispersion(1e9) - 1.0) < 1e-9);
  CHECK_THROWS_AS(dispersion(-0.5), std::invalid_argument);
}

TEST_CASE("FBC rate") {
  const auto p = load_params("");
  CHECK(fbc_rate(0.0, p) == 0.0);
  CHECK(rel(fbc_rate(10.0, p), 75386.285394978729) < 1e-10);
  const FbcLink link(p);
  CHECK(link.rate(10.0).snr == 10.0);
  CHECK(link.rate(1.0).dispersion == 0.75);
  // The rate is increasing once the dispersion penalty flattens out.
  double prev = fbc_rate(0.05, p);
  for (double g : log_grid(0.06, 1e3, 100)) {
    const double r = fbc_rate(g, p);
    CHECK(r > prev);
    prev = r;
  }
  const double shannon_scale = p.bandwidth / std::log(2.0);
  for (double g : log_grid(1e-3, 1e3, 30)) CHECK(fbc_rate(g, p) < shannon_scale * std::log1p(g));
}

TEST_CASE("airtime") {
  const auto p = load_params("");
  CHECK(rel(airtime(10.0, p), 0.001326501225999666) < 1e-10);
  CHECK(rel(airtime(10.0, load_params("L = 200")), 2.0 * airtime(10.0, p)) < 1e-14);
  const double g_min = min_positive_snr(p);
  CHECK(airtime(g_min + 5e-10, p) > 1.0);
  CHECK_THROWS_AS(airtime(0.1, p), NonPositiveRate);
  double prev = airtime(0.2, p);
  for (double g : log_grid(0.21, 1e3, 50)) {
    CHECK(airtime(g, p) < prev);
    prev = airtime(g, p);
  }
}

TEST_CASE("smallest SNR with positive rate") {
  const auto p = load_params("");
  const double g = min_positive_snr(p);
  CHECK(rel(g, 0.17701987792742239) < 1e-11);
  CHECK(fbc_rate(1.01 * g, p) > 0.0);
  CHECK(fbc_rate(0.99 * g, p) < 0.0);
  CHECK(min_positive_snr(load_params("epsilon = 0.5")) == 0.0);
  CHECK(min_positive_snr(load_params("epsilon = 0.7")) == 0.0);
}
