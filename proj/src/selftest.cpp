#include <Eigen/Core>

#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include "coopnoma/errors.hpp"
#include "coopnoma/experiments.hpp"
#include "coopnoma/mlp.hpp"
#include "coopnoma/quadrature.hpp"
#include "coopnoma/secrecy.hpp"
#include "coopnoma/specfun.hpp"

namespace coopnoma {

namespace {

using specfun::SpecFunConfig;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

SelftestItem check_specfun(const SpecFunConfig& cfg) {
  SelftestItem item{"specfun identities", true, {}};
  std::ostringstream detail;
  auto expect = [&](const char* what, const specfun::SpecFunResult& r, double ref, double tol) {
    const bool ok = r.converged && std::abs(r.value - ref) <= tol;
    if (!ok) {
      item.passed = false;
      detail << what << " = " << fmt(r.value) << " (reference " << fmt(ref)
             << (r.converged ? "" : ", not converged") << "); ";
    }
  };
  // Q(3, 3) as a finite sum for integer shape.
  expect("Q(3,3)", specfun::regularized_gamma_q_eval(3.0, 3.0, cfg), std::exp(-3.0) * (1.0 + 3.0 + 4.5),
         1e-12);
  // Gamma(2, 1) = 2 / e, cross-checked by quadrature.
  const auto quad = integrate_to_infinity([](double t) { return t * std::exp(-t); }, 1.0, 1.0,
                                          {1e-13, 1e-12, 200});
  expect("Gamma(2,1)", specfun::upper_incomplete_gamma_eval(2.0, 1.0, cfg), quad.value, 1e-10);
  for (double m : {0.5, 1.0, 2.5, 4.0}) {
    for (double x : {0.1, 1.0, 5.0, 20.0}) {
      const auto p = specfun::regularized_gamma_p_eval(m, x, cfg);
      const auto q = specfun::regularized_gamma_q_eval(m, x, cfg);
      expect("P+Q", {p.value + q.value, p.converged && q.converged, 0}, 1.0, 1e-12);
    }
  }
  // Ei(-x) = -int_x^inf e^-t / t dt
  for (double x : {0.5, 1.0, 3.0}) {
    const auto ref = integrate_to_infinity([](double t) { return -std::exp(-t) / t; }, x, 1.0,
                                           {1e-14, 1e-12, 200});
    expect("Ei", specfun::exp_integral_ei_eval(-x, cfg), ref.value, 1e-10);
  }
  item.detail = item.passed ? "all identities hold" : detail.str();
  return item;
}

SelftestItem check_enumeration(std::uint64_t seed) {
  // Each gain takes one of three values with equal probability, so the
  // exact intercept probability is a count over 3^5 outcomes.
  static constexpr std::array<double, 3> kLevels{0.2, 1.0, 3.0};
  SystemParams p;
  const auto alloc = PowerAllocation::from_far(0.8);
  const auto split = PowerSplit::uniform(0.3);

  int hits = 0;
  for (int code = 0; code < 243; ++code) {
    int c = code;
    std::array<double, 5> g{};
    for (auto& v : g) {
      v = kLevels[static_cast<std::size_t>(c % 3)];
      c /= 3;
    }
    const ChannelRealization ch{g[0], g[1], g[2], g[3], g[4]};
    hits += intercept_event(compute_sinrs(p, alloc, split, ch)) ? 1 : 0;
  }
  const double exact = hits / 243.0;

  const ChannelSampler sampler = [](const SystemParams&, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, 2);
    std::array<double, 5> g{};
    for (auto& v : g) v = kLevels[static_cast<std::size_t>(pick(rng))];
    return ChannelRealization{g[0], g[1], g[2], g[3], g[4]};
  };
  const auto mc = intercept_probability_mc(p, alloc, split, {100000, seed, 0}, sampler);
  const double tol = 3.0 * std::sqrt(exact * (1.0 - exact) / 100000.0) + 1e-12;
  SelftestItem item{"monte carlo vs enumeration", std::abs(mc.value - exact) <= tol, {}};
  item.detail = "estimate " + fmt(mc.value) + ", exact " + fmt(exact) + ", tolerance " + fmt(tol);
  return item;
}

SelftestItem check_gradient(std::uint64_t seed) {
  const std::array<int, 2> hidden{6, 4};
  auto net = Mlp<double>::he_initialized(3, hidden, seed);
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.55, 0.95);
  Matrix<double> x(3, 8);
  Vector<double> y(8);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = nd(rng);
    y(j) = ud(rng);
  }
  for (auto& l : net.layers()) l.bias.setConstant(0.05);
  const double worst = gradient_check(net, x, y);
  return {"gradient check", worst <= 1e-5, "max relative error = " + fmt(worst)};
}

}  // namespace

std::vector<SelftestItem> run_selftest(const SelftestOptions& opts, std::ostream& report) {
  SpecFunConfig cfg;
  if (opts.specfun_tolerance > 0.0) cfg.rel_tol = opts.specfun_tolerance;

  report << "coopnoma selftest\n";
  report << "tool_version: " << kToolVersion << "\n";
  report << "eigen: " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION
         << "\n";
  report << "seed: " << opts.seed << "\n";
  report << "specfun_rel_tol: " << cfg.rel_tol << "\n";

  std::vector<SelftestItem> items;
  auto guarded = [&](const char* name, auto&& fn) {
    try {
      items.push_back(fn());
    } catch (const std::exception& e) {
      items.push_back({name, false, e.what()});
    }
  };
  guarded("specfun identities", [&] { return check_specfun(cfg); });
  guarded("monte carlo vs enumeration", [&] { return check_enumeration(opts.seed); });
  guarded("gradient check", [&] { return check_gradient(opts.seed); });

  for (const auto& it : items)
    report << (it.passed ? "PASS " : "FAIL ") << it.name << ": " << it.detail << "\n";
  return items;
}

}  // namespace coopnoma
