#pragma once

namespace coopnoma::specfun {

/// Outcome of an iterative evaluation. `converged` means the last relative
/// increment fell below the configured tolerance within the budget.
struct SpecFunResult {
  double value = 0.0;
  bool converged = false;
  int terms_used = 0;
};

struct SpecFunConfig {
  double rel_tol = 1e-15;
  int max_terms = 2000;
};

/// Regularized lower/upper incomplete gamma P(m, x), Q(m, x). Series below
/// x = m + 1, Lentz continued fraction above.
SpecFunResult regularized_gamma_p_eval(double m, double x, const SpecFunConfig& cfg = {});
SpecFunResult regularized_gamma_q_eval(double m, double x, const SpecFunConfig& cfg = {});

/// Gamma(m, x) = integral from x to infinity of t^(m-1) e^-t dt.
SpecFunResult upper_incomplete_gamma_eval(double m, double x, const SpecFunConfig& cfg = {});

/// Ei(x) for x < 0, via E1(-x).
SpecFunResult exp_integral_ei_eval(double x, const SpecFunConfig& cfg = {});

// Throwing wrappers: a non-converged evaluation raises NumericalError,
// invalid arguments raise ValidationError.
double regularized_gamma_p(double m, double x, const SpecFunConfig& cfg = {});
double regularized_gamma_q(double m, double x, const SpecFunConfig& cfg = {});
double upper_incomplete_gamma(double m, double x, const SpecFunConfig& cfg = {});
double exp_integral_ei(double x, const SpecFunConfig& cfg = {});

}  // namespace coopnoma::specfun
