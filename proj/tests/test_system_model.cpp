#include <doctest.h>

#include <Eigen/Core>

#include <cmath>
#include <random>

#include "coopnoma/errors.hpp"
#include "coopnoma/system_model.hpp"

using namespace coopnoma;

namespace {

SystemParams unit_params(double m) {
  SystemParams p;
  p.m_shape = m;
  p.omega_su_n = p.omega_su_f = p.omega_se = p.omega_un_e = p.omega_un_uf = 1.0;
  return p;
}

}  // namespace

TEST_CASE("dB conversions round-trip") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  for (int i = 0; i < 1000; ++i) {
    const double db = u(rng);
    CHECK(std::abs(linear_to_db(db_to_linear(db)) - db) <= 1e-12);
    const double lin = db_to_linear(db);
    CHECK(std::abs(db_to_linear(linear_to_db(lin)) - lin) <= 1e-12 * lin);
  }
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("Rayleigh gains: unit mean and exponential tail") {
  const auto p = unit_params(1.0);
  Rng rng = make_stream(11, 0);
  const int n = 1'000'000;
  double sum = 0.0;
  int above = 0;
  for (int i = 0; i < n; ++i) {
    const double g = sample_channels(p, rng).g_su_f;
    sum += g;
    above += g > 1.0;
  }
  CHECK(std::abs(sum / n - 1.0) <= 0.01);
  const double tail = std::exp(-1.0);
  const double se = std::sqrt(tail * (1.0 - tail) / n);
  CHECK(std::abs(static_cast<double>(above) / n - tail) <= 3.0 * se);
}

TEST_CASE("Nakagami m=2 gains: variance omega^2/m") {
  const auto p = unit_params(2.0);
  Rng rng = make_stream(12, 0);
  const int n = 1'000'000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = sample_channels(p, rng).g_se;
    s += g;
    s2 += g * g;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(var - 0.5) <= 0.02 * 0.5);
}

TEST_CASE("link SINRs at the nominal point") {
  SystemParams p;
  const auto alloc = PowerAllocation::from_far(0.8);
  const auto split = PowerSplit::uniform(0.3);

  SUBCASE("far user, first phase") {
    const auto s = compute_sinrs(p, alloc, split, {1.0, 0.5, 1.0, 1.0, 1.0});
    CHECK(s.snr_f1 == doctest::Approx(2.8 / 1.7).epsilon(1e-14));
  }
  SUBCASE("relay hop to the far user") {
    const auto s = compute_sinrs(p, alloc, split, {1.0, 1.0, 1.0, 1.0, 1.0});
    CHECK(s.snr_rf2 == doctest::Approx(1.47).epsilon(1e-14));
  }
  SUBCASE("dead direct link") {
    const auto s = compute_sinrs(p, alloc, split, {1.0, 0.0, 1.0, 1.0, 1.0});
    CHECK(s.snr_f1 == 0.0);
  }
}

TEST_CASE("link formulas accept Eigen array expressions") {
  Eigen::ArrayXd g(4);
  g << 0.0, 0.5, 1.0, 4.0;
  const Eigen::ArrayXd v = superposed_sinr(g, 0.3, 0.8, 0.2, 10.0);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    CHECK(v(i) == doctest::Approx(superposed_sinr(g(i), 0.3, 0.8, 0.2, 10.0)));
  CHECK(v(1) == doctest::Approx(2.8 / 1.7));
}

TEST_CASE("superposed SINR never exceeds alpha_F / alpha_N") {
  for (double g : {1e-3, 1.0, 1e3, 1e9}) CHECK(superposed_sinr(g, 0.3, 0.8, 0.2, 10.0) < 4.0);
}

TEST_CASE("parameter validation") {
  SystemParams p;
  p.eta = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_THROWS_AS(PowerAllocation::from_far(0.4).validate(), ValidationError);
  CHECK_THROWS_AS(PowerSplit::uniform(1.0).validate(), ValidationError);
  CHECK_NOTHROW(PowerSplit::uniform(0.3).validate());
}
