#pragma once

#include <cstdint>

namespace cfcert {

enum class DistKind { StdNormal, ChiSquared };

// Limiting law G: standard normal or chi-squared with integer dof.
// Immutable value type; all operations on it are pure.
struct LimitDistribution {
    DistKind kind = DistKind::StdNormal;
    int dof = 0;  // only meaningful for ChiSquared, dof >= 1

    static LimitDistribution std_normal() { return {DistKind::StdNormal, 0}; }
    static LimitDistribution chi_squared(int q);
};

double density(const LimitDistribution& dist, double x);
double cdf(const LimitDistribution& dist, double x);

// Inverse CDF to |cdf(x) - p| <= 1e-12 via bracketed safeguarded Newton.
// Normal start: rational approximation; chi-squared start: Wilson-Hilferty.
double quantile(const LimitDistribution& dist, double p);

// d/dx log g(x): -x for the normal, (q/2 - 1)/x - 1/2 for chi-squared.
double log_density_slope(const LimitDistribution& dist, double x);

// Exact minimum of the density on [lo, hi]. Both densities are unimodal,
// so the minimum sits at an endpoint.
double density_min_on_interval(const LimitDistribution& dist, double lo, double hi);

namespace special {

// Regularized lower incomplete gamma P(a, x). Series for x < a + 1,
// continued fraction otherwise.
double gamma_p(double a, double x);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double beta_i(double a, double b, double x);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace special

}  // namespace cfcert
