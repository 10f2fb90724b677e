#pragma once

namespace delaycode::dist {

/// Regularized lower incomplete gamma P(a, x). Series below x < a + 1,
/// Lentz continued fraction above; both iterate to relative 1e-15 (at most 10000 terms).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b) by continued fraction, using the
/// symmetry I_x(a,b) = 1 - I_{1-x}(b,a) when x > (a+1)/(a+b+2).
double beta_i(double a, double b, double x);

double chi2_sf(double x, double df);
double chi2_cdf(double x, double df);

/// Upper tail P(T > t) of Student's t.
double t_sf(double t, double df);
/// P(|T| >= |t|).
double t_two_sided(double t, double df);

double normal_pdf(double z);
double normal_cdf(double z);

/// CDF of the studentized range of k standard normals (infinite degrees of
/// freedom): k * integral phi(z) [Phi(z) - Phi(z - q)]^(k-1) dz.
double studentized_range_cdf(double q, int k);
/// Inverse of studentized_range_cdf by bracketing and bisection.
double studentized_range_quantile(double p, int k);

/// Tabulated Nemenyi critical values q_alpha (studentized range / sqrt 2) for
/// 2 <= k <= 10 and alpha in {0.05, 0.10}; returns 0 when not tabulated.
double nemenyi_table_q(double alpha, int k);

/// q_alpha / sqrt(2) for the Nemenyi test: numerical, falling back to the table.
double nemenyi_q(double alpha, int k);

}  // namespace delaycode::dist
