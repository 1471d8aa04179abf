#include <doctest.h>

#include <cmath>
#include <random>

#include "isac_aoi/errors.hpp"
#include "isac_aoi/sensing.hpp"
#include "isac_aoi/stats.hpp"

using namespace isac_aoi;
using namespace isac_aoi::sensing;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Geometric on {1, 2, ...} by inverse CDF.
long long geometric_inverse_cdf(double ps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (ps >= 1.0) return 1;
  return static_cast<long long>(std::ceil(std::log1p(-u(rng)) / std::log1p(-ps)));
}

}  // namespace

TEST_CASE("echo power") {
  const auto p = load_params("");
  CHECK(echo_power(p, 0.0) == 0.0);
  CHECK(echo_power(load_params("alpha = 1"), 10.0) == 0.0);
  CHECK(rel(echo_power(p, 10.0), 4.0314418041499361e-13) < 1e-12);
}

TEST_CASE("detection probability") {
  const auto p = load_params("");
  CHECK(sdp(load_params("d = 0")) == 1.0);
  CHECK(rel(sdp(p), 0.97548799660884036) < 1e-12);
  CHECK(rel(sdp(load_params("rho_bar = 20")), std::sqrt(sdp(p))) < 1e-12);
  CHECK_THROWS_AS(sdp(load_params("alpha = 1")), AllPowerToComm);
  CHECK(sdp(load_params("alpha = 1\nd = 0")) == 1.0);
  CHECK_THROWS_AS(make_arrival_model(load_params("alpha = 1")), AllPowerToComm);

  const double ln1 = std::log(sdp(load_params("d = 1")));
  for (double d : {0.5, 2.0, 7.0, 30.0}) {
    ParamSet s;
    s.set("d", std::to_string(d));
    CHECK(rel(std::log(sdp(s.build())), d * ln1) < 1e-12);
  }
}

TEST_CASE("detection probability monotonicity") {
  const double base = sdp(load_params(""));
  CHECK(sdp(load_params("d = 20")) < base);
  CHECK(sdp(load_params("D = 150")) < base);
  CHECK(sdp(load_params("W = 50e3")) < base);
  CHECK(sdp(load_params("varphi = 20")) < base);
  CHECK(sdp(load_params("alpha = 0.3")) > base);
  CHECK(sdp(load_params("G_t = 20")) > base);
  CHECK(sdp(load_params("G_r = 20")) > base);
  CHECK(sdp(load_params("sigma_wl = 8e-3")) > base);
  CHECK(sdp(load_params("rho_bar = 20")) > base);
}

TEST_CASE("Swerling-I draws match the closed form") {
  const auto p = load_params("D = 250");
  const double expected = sdp(p);
  Rng rng = make_stream(3, 0);
  const std::uint64_t n = 2'000'000;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < n; ++i) hits += sample_detection(p, rng);
  const double se = std::sqrt(expected * (1 - expected) / n);
  CHECK(std::abs(double(hits) / n - expected) < 3.0 * se);
}

TEST_CASE("arrival MGF") {
  const ArrivalModel m{1e-3, 0.5};
  CHECK(arrival_mgf(0.0, m) == 1.0);
  CHECK(rel(arrival_mgf(300.0, ArrivalModel{1e-3, 1.0}), std::exp(0.3)) < 1e-14);
  CHECK(rel(arrival_theta_limit(m), std::log(2.0) / 1e-3) < 1e-14);
  CHECK(std::isinf(arrival_theta_limit(ArrivalModel{1e-3, 1.0})));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const ArrivalModel mi{1e-3, 0.05 + 0.95 * u(rng)};
    const double lim = arrival_theta_limit(mi);
    const double theta = -5000.0 + (0.99 * std::min(lim, 1e5) + 5000.0) * u(rng);
    CHECK(rel(arrival_mgf(theta, mi), arrival_mgf_series_form(theta, mi)) < 1e-12);
  }

  try {
    arrival_mgf(arrival_theta_limit(m) * 1.001, m);
    FAIL("expected MgfDiverges");
  } catch (const MgfDiverges& e) {
    CHECK(e.constraint() == MgfConstraint::arrival_geometric);
    CHECK(rel(e.critical_theta(), arrival_theta_limit(m)) < 1e-14);
  }
}

TEST_CASE("arrival MGF against inverse-CDF sampling") {
  const ArrivalModel m{1e-3, 0.5};
  std::mt19937_64 rng(17);
  for (double theta : {200.0, -500.0}) {
    MeanAccumulator acc;
    for (int i = 0; i < 10'000'000; ++i)
      acc.add(std::exp(theta * m.scan_period * double(geometric_inverse_cdf(0.5, rng))));
    CHECK(rel(acc.mean(), arrival_mgf(theta, m)) < 1e-3);
  }
}

TEST_CASE("inter-arrival sampler") {
  Rng rng = make_stream(9, 0);
  for (int i = 0; i < 100; ++i) CHECK(sample_interarrival(ArrivalModel{1e-3, 1.0}, rng) == 1e-3);
  const ArrivalModel m{1e-3, 0.3};
  MeanAccumulator mean, mgf;
  for (int i = 0; i < 1'000'000; ++i) {
    const double x = sample_interarrival(m, rng);
    mean.add(x);
    mgf.add(std::exp(-500.0 * x));
    CHECK(sample_scans(m, rng) >= 1);
  }
  CHECK(std::abs(mean.mean() - 1e-3 / 0.3) < 3.0 * mean.std_error());
  CHECK(std::abs(mgf.mean() - arrival_mgf(-500.0, m)) < 3.0 * mgf.std_error());
}
