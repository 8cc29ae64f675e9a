#include "cfcert/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cfcert/errors.hpp"

namespace cfcert {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kSqrt2 = 1.4142135623730950488;

}  // namespace

LimitDistribution LimitDistribution::chi_squared(int q) {
    if (q < 1) throw DomainError("chi-squared dof must be >= 1, got " + std::to_string(q));
    return {DistKind::ChiSquared, q};
}

namespace special {

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) {
        // Lower series: P(a,x) = x^a e^-x / Gamma(a+1) * sum x^k / (a+1)...(a+k)
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int k = 0; k < 500; ++k) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    // Upper continued fraction (modified Lentz), Q(a,x) = prefactor * cf.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-17) break;
    }
    double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    return 1.0 - q;
}

namespace {

double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        double dm = m;
        double aa = dm * (b - dm) * x / ((qam + 2.0 * dm) * (a + 2.0 * dm));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + dm) * (qab + dm) * x / ((a + 2.0 * dm) * (qap + 2.0 * dm));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h;
}

}  // namespace

double beta_i(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must be in (0,1)");
    // Acklam's rational approximation as the initial guess.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Two Halley refinements push the residual to machine precision.
    for (int i = 0; i < 3; ++i) {
        double e = normal_cdf(x) - p;
        double u = e / normal_pdf(x);
        x = x - u / (1.0 + x * u / 2.0);
    }
    return x;
}

}  // namespace special

double density(const LimitDistribution& dist, double x) {
    if (dist.kind == DistKind::StdNormal) return special::normal_pdf(x);
    if (x <= 0.0) return 0.0;
    double h = 0.5 * dist.dof;
    constexpr double ln2 = 0.6931471805599453094;
    return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * ln2 - std::lgamma(h));
}

double cdf(const LimitDistribution& dist, double x) {
    if (dist.kind == DistKind::StdNormal) return special::normal_cdf(x);
    if (x <= 0.0) return 0.0;
    return special::gamma_p(0.5 * dist.dof, 0.5 * x);
}

namespace {

// Safeguarded Newton on the CDF residual inside a maintained bracket.
double solve_quantile(const LimitDistribution& dist, double p, double x0, double lo, double hi) {
    const double tol = 1e-12;
    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < 200; ++it) {
        double f = cdf(dist, x) - p;
        if (std::fabs(f) <= tol) return x;
        if (f > 0.0) hi = x; else lo = x;
        double g = density(dist, x);
        double step = (g > 0.0) ? f / g : 0.0;
        double next = x - step;
        if (!(next > lo && next < hi) || step == 0.0) {
            next = 0.5 * (lo + hi);
        }
        if (next == x) return x;
        x = next;
    }
    return x;
}

}  // namespace

double quantile(const LimitDistribution& dist, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must be in (0,1)");
    if (dist.kind == DistKind::StdNormal) {
        double x = special::normal_quantile(p);
        return solve_quantile(dist, p, x, x - 1.0, x + 1.0);
    }
    double q = dist.dof;
    // Wilson-Hilferty cube-root start.
    double z = special::normal_quantile(p);
    double t = 1.0 - 2.0 / (9.0 * q) + z * std::sqrt(2.0 / (9.0 * q));
    double x0 = q * t * t * t;
    if (x0 <= 0.0) x0 = q * std::exp((z - std::sqrt(q)) / std::sqrt(q));  // deep lower tail
    // Grow a bracket around the start.
    double lo = 0.0, hi = x0;
    while (cdf(dist, hi) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e8) break;
    }
    return solve_quantile(dist, p, x0, lo, hi);
}

double log_density_slope(const LimitDistribution& dist, double x) {
    if (dist.kind == DistKind::StdNormal) return -x;
    if (x <= 0.0) throw DomainError("log_density_slope: x must be > 0 for chi-squared");
    return (0.5 * dist.dof - 1.0) / x - 0.5;
}

double density_min_on_interval(const LimitDistribution& dist, double lo, double hi) {
    if (!(lo <= hi)) throw DomainError("density_min_on_interval: lo > hi");
    if (dist.kind == DistKind::ChiSquared && lo <= 0.0) {
        throw DomainError("density_min_on_interval: interval exits chi-squared support (0, inf)");
    }
    // Unimodal density: the minimum over a closed interval is at an endpoint.
    return std::min(density(dist, lo), density(dist, hi));
}

}  // namespace cfcert
