#include "coopnoma/secrecy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "coopnoma/specfun.hpp"

namespace coopnoma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const QuadratureConfig kInnerQuadrature{1e-12, 1e-10, 400};

double rate_of(double snr) { return 0.5 * std::log2(1.0 + snr); }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Density of a gamma power gain with shape m and mean omega.
double gain_pdf(double x, double m, double omega) {
  if (x <= 0.0) return (m == 1.0) ? 1.0 / omega : 0.0;
  const double rate = m / omega;
  return std::exp(m * std::log(rate) + (m - 1.0) * std::log(x) - rate * x - std::lgamma(m));
}

/// Gain threshold g above which a superposed first-phase SINR exceeds x:
/// x / (snr (1 - rho) (alpha_F - alpha_N x)); +inf beyond the SINR ceiling.
double superposed_threshold(double x, double rho, const AnalyticalModel& mdl) {
  const double room = mdl.alloc.alpha_f - mdl.alloc.alpha_n * x;
  if (room <= 0.0) return kInf;
  return x / (mdl.params.tx_snr() * (1.0 - rho) * room);
}

/// CDF of a superposed first-phase SINR on a link with mean gain omega.
double superposed_cdf(double x, double rho, double omega, const AnalyticalModel& mdl) {
  if (x <= 0.0) return 0.0;
  const double g = superposed_threshold(x, rho, mdl);
  if (!std::isfinite(g)) return 1.0;
  const double m = mdl.params.m_shape;
  return specfun::regularized_gamma_p(m, m / omega * g);
}

double superposed_pdf(double y, double rho, double omega, const AnalyticalModel& mdl) {
  if (y < 0.0) return 0.0;
  const double room = mdl.alloc.alpha_f - mdl.alloc.alpha_n * y;
  if (room <= 0.0) return 0.0;
  const double g = superposed_threshold(y, rho, mdl);
  const double dg = mdl.alloc.alpha_f / (mdl.params.tx_snr() * (1.0 - rho) * room * room);
  return gain_pdf(g, mdl.params.m_shape, omega) * dg;
}

double relay_gain_factor(double rho_hop, const AnalyticalModel& mdl) {
  return (1.0 - rho_hop) * mdl.split.rho_n1 * mdl.params.eta * mdl.params.tx_snr();
}

/// int_lo^inf Q(m, m/omega_hop * x / (c x1)) f_SUN(x1) dx1
///   = Pr(|h_SUN|^2 > lo, relay SNR >= x).
double relay_survival_integral(double x, double lo, double omega_hop, double c,
                               const AnalyticalModel& mdl) {
  const double m = mdl.params.m_shape;
  const double omega1 = mdl.params.omega_su_n;
  if (x <= 0.0) return specfun::regularized_gamma_q(m, m / omega1 * lo);
  auto integrand = [&](double x1) {
    const double arg = m / omega_hop * x / (c * x1);
    return specfun::regularized_gamma_q(m, std::min(arg, 1e300)) * gain_pdf(x1, m, omega1);
  };
  const auto r = integrate_to_infinity(integrand, lo, omega1, kInnerQuadrature);
  if (!r.converged) {
    std::ostringstream os;
    os << "relay CDF quadrature did not converge at x=" << x << " (error " << r.abs_error << ")";
    throw NumericalError(os.str());
  }
  return r.value;
}

double reciprocal_factorial(int n) {
  return n < 0 ? 0.0 : 1.0 / std::tgamma(static_cast<double>(n) + 1.0);
}

/// Literal evaluation of the printed closed form for Psi2, summed over
/// s = 0..m-1 with the free index k bound to the trailing sum. For every
/// s < m the factor 1/(s-m)! sits on a pole and the trailing sum is empty,
/// so the value is identically zero.
double psi2_printed(double x, double theta, const AnalyticalModel& mdl) {
  const int m = static_cast<int>(std::lround(mdl.params.m_shape));
  const double lambda1 = mdl.params.m_shape / mdl.params.omega_su_n;
  const double snr = mdl.params.tx_snr();
  const double rho = mdl.split.rho_n1;
  const double an = mdl.alloc.alpha_n;
  const double room = mdl.alloc.alpha_f - an * x;
  if (x <= 0.0 || room <= 0.0) return 0.0;
  const double ratio = lambda1 / ((1.0 - rho) * an);
  const double ei_arg = -lambda1 * x / (snr * (1.0 - rho) * an * (1.0 - rho) * room);
  const double decay = std::exp(-lambda1 * x / (snr * (1.0 - rho) * an));
  double total = 0.0;
  for (int s = 0; s < m; ++s) {
    const int order = s - m;
    const double sign = ((order + 1) % 2 == 0) ? 1.0 : -1.0;
    total += sign * std::pow(ratio, order) * specfun::exp_integral_ei(ei_arg) *
             reciprocal_factorial(order);
    double falling = 1.0;
    for (int k = 0; k <= order - 1; ++k) {
      falling *= static_cast<double>(order - k);
      total += std::pow(ratio * theta, k) * decay / std::pow(theta, order) *
               ((k % 2 == 0) ? 1.0 : -1.0) / falling;
    }
  }
  return total;
}

double psi1_of(double theta, const AnalyticalModel& mdl) {
  if (!std::isfinite(theta)) return 0.0;
  const double m = mdl.params.m_shape;
  return specfun::regularized_gamma_q(m, m / mdl.params.omega_su_n * theta);
}

double psi2_of(double x, double theta, const AnalyticalModel& mdl) {
  if (!std::isfinite(theta)) return 0.0;
  if (mdl.opts.relay == RelayCdfForm::printed_closed_form) return psi2_printed(x, theta, mdl);
  return relay_survival_integral(x, theta, mdl.params.omega_un_uf,
                                 relay_gain_factor(mdl.split.rho_f2, mdl), mdl);
}

void require_integer_shape(const SystemParams& p) {
  const double m = p.m_shape;
  require(m >= 1.0 && std::abs(m - std::round(m)) < 1e-12,
          "m_shape: the analytical route supports integer fading shapes only");
}

}  // namespace

double secrecy_rate_df(const SinrSet& s) {
  return std::max(0.0, rate_of(legitimate_snr(s)) - rate_of(eavesdropper_snr(s)));
}

bool intercept_event(const SinrSet& s) { return legitimate_snr(s) < eavesdropper_snr(s); }

InterceptEstimate intercept_probability_mc(const SystemParams& params,
                                           const PowerAllocation& alloc,
                                           const PowerSplit& split, const McOptions& opts,
                                           const ChannelSampler& sampler) {
  params.validate();
  alloc.validate();
  split.validate();
  require(opts.n_trials >= 1000, "trials: at least 1000 Monte-Carlo trials are required");

  const std::int64_t n_blocks = block_count(opts.n_trials);
  std::vector<std::int64_t> hits(static_cast<std::size_t>(n_blocks), 0);
  parallel_blocks(n_blocks, opts.workers, [&](std::int64_t b) {
    Rng rng = make_stream(opts.seed, static_cast<std::uint64_t>(b));
    const std::int64_t begin = b * kBlockSize;
    const std::int64_t end = std::min(opts.n_trials, begin + kBlockSize);
    std::int64_t count = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      const auto ch = sampler ? sampler(params, rng) : sample_channels(params, rng);
      count += intercept_event(compute_sinrs(params, alloc, split, ch)) ? 1 : 0;
    }
    hits[static_cast<std::size_t>(b)] = count;
  });

  std::int64_t total = 0;
  for (auto h : hits) total += h;
  InterceptEstimate est;
  est.n_trials = opts.n_trials;
  est.value = static_cast<double>(total) / static_cast<double>(opts.n_trials);
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(opts.n_trials));
  est.method = EstimateMethod::monte_carlo;
  return est;
}

IntegrandTerms integrand_terms(double y, const AnalyticalModel& mdl) {
  IntegrandTerms t;
  t.theta = superposed_threshold(y, mdl.split.rho_n1, mdl);
  t.psi1 = psi1_of(t.theta, mdl);
  t.psi2 = (y <= 0.0) ? t.psi1 : psi2_of(y, t.theta, mdl);
  const double snr = mdl.params.tx_snr();
  t.phi1 = 1.0 / (mdl.params.omega_su_n * mdl.params.omega_un_e * (1.0 - mdl.split.rho_e2) *
                  mdl.split.rho_n1 * mdl.params.eta * snr);
  const double room = mdl.alloc.alpha_f - mdl.alloc.alpha_n * y;
  t.phi2 = room > 0.0 ? 1.0 / (mdl.params.omega_se * (1.0 - mdl.split.rho_e1) * room * snr) : kInf;
  return t;
}

double cdf_far_direct(double x, const AnalyticalModel& mdl) {
  return superposed_cdf(x, mdl.split.rho_f1, mdl.params.omega_su_f, mdl);
}

double cdf_far_relay(double x, const AnalyticalModel& mdl) {
  if (x <= 0.0) return 0.0;
  if (mdl.opts.relay == RelayCdfForm::unconditioned) {
    return clamp01(1.0 - relay_survival_integral(x, 0.0, mdl.params.omega_un_uf,
                                                 relay_gain_factor(mdl.split.rho_f2, mdl), mdl));
  }
  const double theta = superposed_threshold(x, mdl.split.rho_n1, mdl);
  return clamp01(psi1_of(theta, mdl) - psi2_of(x, theta, mdl));
}

double cdf_eve_direct(double y, const AnalyticalModel& mdl) {
  return superposed_cdf(y, mdl.split.rho_e1, mdl.params.omega_se, mdl);
}

double pdf_eve_direct(double y, const AnalyticalModel& mdl) {
  return superposed_pdf(y, mdl.split.rho_e1, mdl.params.omega_se, mdl);
}

double cdf_eve_relay(double y, const AnalyticalModel& mdl) {
  if (y <= 0.0) return 0.0;
  if (mdl.opts.eve_relay == EveRelayCdfForm::printed_linear) {
    return clamp01(1.0 - integrand_terms(0.0, mdl).phi1 * y);
  }
  return clamp01(1.0 - relay_survival_integral(y, 0.0, mdl.params.omega_un_e,
                                               relay_gain_factor(mdl.split.rho_e2, mdl), mdl));
}

double pdf_eve_relay(double y, const AnalyticalModel& mdl) {
  const double m = mdl.params.m_shape;
  if (mdl.opts.eve_relay == EveRelayCdfForm::printed_linear) {
    const double phi1 = integrand_terms(0.0, mdl).phi1;
    const double v = 1.0 - phi1 * y;
    return (y > 0.0 && v > 0.0 && v < 1.0) ? -phi1 : 0.0;
  }
  if (y < 0.0) return 0.0;
  if (y == 0.0) return m == 1.0 ? kInf : 0.0;
  const double c = relay_gain_factor(mdl.split.rho_e2, mdl);
  const double omega_hop = mdl.params.omega_un_e;
  auto integrand = [&](double x1) {
    const double u = y / (c * x1);
    return gain_pdf(u, m, omega_hop) / (c * x1) * gain_pdf(x1, m, mdl.params.omega_su_n);
  };
  const auto r = integrate_to_infinity(integrand, 0.0, mdl.params.omega_su_n, kInnerQuadrature);
  if (!r.converged) {
    std::ostringstream os;
    os << "relay density quadrature did not converge at y=" << y << " (error " << r.abs_error
       << ")";
    throw NumericalError(os.str());
  }
  return r.value;
}

double cdf_x(double x, const AnalyticalModel& mdl) {
  if (x <= 0.0) return 0.0;
  if (x >= mdl.alloc.sinr_ceiling()) return 1.0;
  const double f1 = cdf_far_direct(x, mdl);
  const double f2 = cdf_far_relay(x, mdl);
  return clamp01(1.0 - (1.0 - f1) * (1.0 - f2));
}

double cdf_y(double y, const AnalyticalModel& mdl) {
  return clamp01(cdf_eve_direct(y, mdl) * cdf_eve_relay(y, mdl));
}

double pdf_y(double y, const AnalyticalModel& mdl) {
  if (y <= 0.0) return 0.0;
  const double f_se = pdf_eve_direct(y, mdl);
  const double big_f_se = cdf_eve_direct(y, mdl);
  const double big_f_une = cdf_eve_relay(y, mdl);
  const double relay_term = big_f_se > 0.0 ? big_f_se * pdf_eve_relay(y, mdl) : 0.0;
  return f_se * big_f_une + relay_term;
}

double cdf_x(double x, const SystemParams& params, const PowerAllocation& alloc,
             const PowerSplit& split) {
  return cdf_x(x, AnalyticalModel{params, alloc, split, {}});
}

double pdf_y(double y, const SystemParams& params, const PowerAllocation& alloc,
             const PowerSplit& split) {
  return pdf_y(y, AnalyticalModel{params, alloc, split, {}});
}

InterceptEstimate intercept_probability_analytical(const SystemParams& params,
                                                   const PowerAllocation& alloc,
                                                   const PowerSplit& split,
                                                   const AnalyticalOptions& opts) {
  params.validate();
  alloc.validate();
  split.validate();
  opts.quadrature.validate();
  require_integer_shape(params);

  const AnalyticalModel mdl{params, alloc, split, opts};
  const double ceiling = alloc.sinr_ceiling();
  // y = ceiling (1 - e^-t) keeps the integrand smooth where the SINR
  // thresholds blow up at the ceiling.
  auto integrand = [&](double t) {
    const double y = -ceiling * std::expm1(-t);
    const double dy = ceiling * std::exp(-t);
    if (dy == 0.0) return 0.0;
    const double fy = pdf_y(y, mdl);
    if (fy == 0.0) return 0.0;
    return cdf_x(y, mdl) * fy * dy;
  };
  const auto r = integrate_to_infinity(integrand, 0.0, 1.0, opts.quadrature);
  if (!r.converged) {
    const double u = 0.5 * (r.worst_lo + r.worst_hi);
    const double y = -ceiling * std::expm1(-u / (1.0 - u));
    std::ostringstream os;
    os << "intercept quadrature did not converge within " << opts.quadrature.max_subdivisions
       << " subdivisions (estimate " << r.value << ", error " << r.abs_error
       << "); worst abscissa y=" << y;
    throw AnalysisFailure(os.str(), y, integrand_terms(y, mdl), cdf_x(y, mdl), pdf_y(y, mdl));
  }
  const double tail = 1.0 - cdf_y(ceiling, mdl);

  InterceptEstimate est;
  est.value = clamp01(r.value + tail);
  est.std_error = 0.0;
  est.n_trials = 0;
  est.method = EstimateMethod::analytical;
  return est;
}

// ---------------------------------------------------------------------------

namespace {

/// Fraction of sorted samples strictly below v.
double ecdf(const std::vector<double>& sorted, double v) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

std::vector<double> probe_points(const std::vector<double>& sorted, int count) {
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(count));
  const auto n = sorted.size();
  for (int k = 1; k <= count; ++k) {
    const auto idx = std::min(n - 1, static_cast<std::size_t>(
                                         static_cast<double>(k) / (count + 1) * static_cast<double>(n)));
    const double v = sorted[idx];
    if (v > 0.0 && (pts.empty() || v > pts.back())) pts.push_back(v);
  }
  return pts;
}

template <class Cdf>
double ks_distance(const std::vector<double>& sorted, const std::vector<double>& probes,
                   Cdf&& cdf) {
  double worst = 0.0;
  for (double p : probes) worst = std::max(worst, std::abs(cdf(p) - ecdf(sorted, p)));
  return worst;
}

}  // namespace

DiscrepancyReport diagnose_discrepancy(const SystemParams& params, const PowerAllocation& alloc,
                                       const PowerSplit& split, const AnalyticalOptions& opts,
                                       const McOptions& mc, double ks_tolerance) {
  params.validate();
  alloc.validate();
  split.validate();
  require(mc.n_trials >= 1000, "trials: at least 1000 Monte-Carlo trials are required");
  const AnalyticalModel mdl{params, alloc, split, opts};

  const auto n = static_cast<std::size_t>(mc.n_trials);
  std::vector<double> far_direct(n), far_relay(n), eve(n), legit(n);
  const std::int64_t n_blocks = block_count(mc.n_trials);
  parallel_blocks(n_blocks, mc.workers, [&](std::int64_t b) {
    Rng rng = make_stream(mc.seed, static_cast<std::uint64_t>(b));
    const std::int64_t begin = b * kBlockSize;
    const std::int64_t end = std::min(mc.n_trials, begin + kBlockSize);
    for (std::int64_t i = begin; i < end; ++i) {
      const auto s = compute_sinrs(params, alloc, split, sample_channels(params, rng));
      const auto k = static_cast<std::size_t>(i);
      far_direct[k] = s.snr_f1;
      far_relay[k] = s.snr_rf2;
      eve[k] = eavesdropper_snr(s);
      legit[k] = legitimate_snr(s);
    }
  });

  std::size_t joint_hits = 0;
  for (std::size_t i = 0; i < n; ++i) joint_hits += legit[i] < eve[i] ? 1 : 0;

  DiscrepancyReport rep;
  rep.monte_carlo = static_cast<double>(joint_hits) / static_cast<double>(n);
  rep.mc_std_error = std::sqrt(rep.monte_carlo * (1.0 - rep.monte_carlo) / static_cast<double>(n));
  try {
    rep.analytical = intercept_probability_analytical(params, alloc, split, opts).value;
  } catch (const NumericalError&) {
    rep.analytical = std::numeric_limits<double>::quiet_NaN();
  }

  std::sort(far_direct.begin(), far_direct.end());
  std::sort(far_relay.begin(), far_relay.end());
  std::sort(eve.begin(), eve.end());
  std::sort(legit.begin(), legit.end());
  constexpr int kProbes = 200;

  auto add = [&](std::string name, double dist, double tol) {
    rep.checks.push_back({std::move(name), dist, tol, dist <= tol});
  };

  add("F1",
      ks_distance(far_direct, probe_points(far_direct, kProbes),
                  [&](double x) { return cdf_far_direct(x, mdl); }),
      ks_tolerance);
  add("F2",
      ks_distance(far_relay, probe_points(far_relay, kProbes),
                  [&](double x) { return cdf_far_relay(x, mdl); }),
      ks_tolerance);

  // CDF of Y recovered from f_Y by piecewise quadrature between probes.
  const auto y_probes = probe_points(eve, kProbes);
  double acc = 0.0;
  double prev = 0.0;
  double worst_y = 0.0;
  const QuadratureConfig piece{1e-10, 1e-8, 200};
  for (double p : y_probes) {
    acc += integrate([&](double y) { return pdf_y(y, mdl); }, prev, p, piece).value;
    prev = p;
    worst_y = std::max(worst_y, std::abs(acc - ecdf(eve, p)));
  }
  add("f_Y", worst_y, ks_tolerance);

  // Pr[X < Y] if X and Y were independent with the observed marginals.
  double indep = 0.0;
  for (double y : eve) indep += ecdf(legit, y);
  indep /= static_cast<double>(n);
  add("independence", std::abs(indep - rep.monte_carlo),
      std::max(0.005, 4.0 * rep.mc_std_error));

  for (const auto& c : rep.checks) {
    if (!c.agrees) {
      rep.first_divergent = c.factor;
      break;
    }
  }
  return rep;
}

std::string format_report(const DiscrepancyReport& r) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "analytical=" << r.analytical << " monte_carlo=" << r.monte_carlo << " (se "
     << r.mc_std_error << ")\n";
  for (const auto& c : r.checks) {
    os << "  " << std::left << std::setw(13) << c.factor << " distance=" << c.distance
       << " tol=" << c.tolerance << (c.agrees ? "  ok" : "  DIVERGES") << "\n";
  }
  os << "  first divergent factor: " << r.first_divergent.value_or("none") << "\n";
  return os.str();
}

}  // namespace coopnoma
