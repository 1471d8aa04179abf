#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#include "isac_aoi/errors.hpp"
#include "isac_aoi/fbc.hpp"
#include "isac_aoi/params.hpp"

using namespace isac_aoi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string message_of(const std::string& text) {
  try {
    load_params(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults") {
  const auto p = load_params("");
  CHECK(p.total_power == 10.0);
  CHECK(p.alpha == 0.5);
  CHECK(p.bandwidth == 25e3);
  CHECK(p.scan_period == 1e-3);
  CHECK(p.packet_bits == 100);
  CHECK(p.blocklength == 100);
  CHECK(p.epsilon == 1e-3);
  CHECK(rel(p.comm_noise, 5.0118723362727229e-6) < 1e-14);
  CHECK(p.max_range == 100.0);
  CHECK(p.path_loss_exp == 2.0);
  CHECK(p.wavelength == 4e-3);
  CHECK(p.gain_tx == 10.0);
  CHECK(p.gain_rx == 10.0);
  CHECK(p.mean_rcs == 10.0);
  CHECK(p.detect_snr == 10.0);
  CHECK(p.deferral == 5e-4);
  CHECK(p.paoi_threshold == 6e-3);
  CHECK_FALSE(p.theta.has_value());
  CHECK(p.accept_snr == kDefaultAcceptSnr);
  CHECK(fbc::fbc_rate(p.accept_snr, p) > 0.0);
}

TEST_CASE("decibel keys convert to linear SI") {
  CHECK(load_params("rho_bar_dbsm = 0").mean_rcs == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rel(load_params("N_c_dbm = -23").comm_noise, 5.0118723362727229e-6) < 1e-14);
  CHECK(rel(load_params("G_t_dbi = 10").gain_tx, 10.0) < 1e-14);
  CHECK(rel(load_params("P_t_dbm = 40").total_power, 10.0) < 1e-14);
  CHECK(rel(load_params("d_db = 10").detect_snr, 10.0) < 1e-14);
  CHECK(rel(load_params("tau_db = 50").accept_snr, 1e5) < 1e-14);
}

TEST_CASE("sensing noise") {
  const auto p = load_params("");
  CHECK(rel(sensing_noise(p), 1.0005e-15) < 1e-12);
  CHECK(rel(sensing_noise(load_params("W = 50e3")), 2.0 * sensing_noise(p)) < 1e-14);
  const auto q = load_params("varphi_db = 0");
  CHECK(rel(sensing_noise(q), q.bandwidth * q.boltzmann * q.temperature) < 1e-14);
}

TEST_CASE("dB conversions round-trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    CHECK(std::abs(linear_to_db(db_to_linear(x)) - x) <= 1e-12 * std::max(1.0, std::abs(x)));
    const double lin = db_to_linear(x);
    CHECK(rel(db_to_linear(linear_to_db(lin)), lin) <= 1e-12);
    CHECK(rel(dbm_to_watts(watts_to_dbm(lin)), lin) <= 1e-12);
  }
}

TEST_CASE("serialize then load reproduces the snapshot") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 50; ++i) {
    ParamSet set;
    set.set("alpha", std::to_string(u(rng)));
    set.set("W", std::to_string(1e4 + 1e5 * u(rng)));
    set.set("D", std::to_string(20 + 200 * u(rng)));
    set.set("zeta", std::to_string(1e-2 * u(rng)));
    if (i % 2) set.set("theta", std::to_string(1e3 * u(rng)));
    const auto p = set.build();
    CHECK(load_params(serialize(p)) == p);
  }
}

TEST_CASE("config syntax") {
  const auto p = load_params("# comment\n\nalpha: 0.25\nW = 1e4   # trailing\n"
                             "sweep.variable = D\n");
  CHECK(p.alpha == 0.25);
  CHECK(p.bandwidth == 1e4);
}

TEST_CASE("errors name the field and the allowed range") {
  CHECK_THROWS_AS(load_params("nonsense = 1"), ConfigError);
  CHECK_THROWS_AS(load_params("alpha = abc"), ConfigError);
  CHECK_THROWS_AS(load_params("just a line"), ConfigError);
  const auto msg = message_of("alpha = 1.5");
  CHECK(msg.find("alpha") != std::string::npos);
  CHECK(msg.find("1.5") != std::string::npos);
  CHECK(msg.find("[0, 1]") != std::string::npos);
  CHECK(message_of("epsilon = 1").find("epsilon") != std::string::npos);
  CHECK(message_of("L = 2.5").find("L") != std::string::npos);
  CHECK_THROWS_AS(load_params("W = -1"), ConfigError);
  CHECK_THROWS_AS(load_params("tau = -1"), ConfigError);
  CHECK_THROWS_AS(load_params("theta = 0"), ConfigError);
}

TEST_CASE("layer precedence: text < environment < assignment") {
  ParamSet set;
  set.merge_text("alpha = 0.3\nrho_bar = 5\n");
  ::setenv("ISAC_AOI_TEST_alpha", "0.4", 1);
  ::setenv("ISAC_AOI_TEST_rho_bar_dbsm", "0", 1);
  set.merge_env("ISAC_AOI_TEST_");
  ::unsetenv("ISAC_AOI_TEST_alpha");
  ::unsetenv("ISAC_AOI_TEST_rho_bar_dbsm");
  auto p = set.build();
  CHECK(p.alpha == 0.4);
  CHECK(p.mean_rcs == doctest::Approx(1.0));
  set.merge_assignment("alpha=0.7");
  set.merge_assignment("rho_bar=3");
  p = set.build();
  CHECK(p.alpha == 0.7);
  CHECK(p.mean_rcs == 3.0);
  CHECK_THROWS_AS(set.merge_assignment("alpha"), ConfigError);
}

TEST_CASE("explicit tau is kept, default follows the FBC zero crossing") {
  CHECK(load_params("tau = 10").accept_snr == 10.0);
  const auto p = load_params("");
  CHECK(default_accept_snr(p) == std::max(kDefaultAcceptSnr, 1.05 * fbc::min_positive_snr(p)));
}
