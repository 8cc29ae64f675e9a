#pragma once

#include <functional>
#include <limits>
#include <tuple>
#include <variant>

#include <json.hpp>

#include "cfcert/distributions.hpp"

namespace cfcert {

// Closed interval of validity; endpoints may be infinite.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x >= lo && x <= hi; }
    bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }
};

struct IdentityKind {};

// T(z) = z + z^3 / (4N); inverse is the real Cardano root, odd in z.
struct CorrelationCubicKind {
    double big_n = 0.0;  // N
};

// T(z) = (a-1)/(2b) + sqrt(((a-1)/(2b))^2 + z/b); inverse z = b x^2 - (a-1) x.
struct HotellingSqrtKind {
    double a = 0.0;
    double b_coef = 0.0;
};

// Fallback when only the forward map is known in closed form.
struct NumericInverseKind {
    std::function<double(double)> forward;
};

// Monotone increasing Bartlett-type correction T with inverse b and b'.
// Construct through the make_* / build_* factories, which run the
// monotonicity and round-trip grid checks.
struct MonotoneTransform {
    std::variant<IdentityKind, CorrelationCubicKind, HotellingSqrtKind, NumericInverseKind> kind;
    Interval domain;  // validity domain of the forward map
    Interval image;   // forward image of the domain
};

MonotoneTransform make_identity();
MonotoneTransform make_correlation_cubic(double big_n);
MonotoneTransform make_hotelling_sqrt(double a, double b_coef, Interval domain);
MonotoneTransform make_numeric_inverse(std::function<double(double)> forward, Interval domain);

// Hotelling Bartlett-type correction for T0^2 at (p, q, n):
// a = (q-p-1)/(2n), b = (q+p+1)/(2n(pq+2)) -- the unique coefficients in the
// quadratic-inverse family that cancel the 1/n term of the T0^2 expansion.
// See README for the derivation and the empirical rate check.
MonotoneTransform build_hotelling_transform(int p, int q, int n);

double forward(const MonotoneTransform& t, double z);
double inverse(const MonotoneTransform& t, double x);

// b'(x) = 1 / T'(b(x)).
double inverse_derivative(const MonotoneTransform& t, double x);

// max of |b'| over [lo, hi]; analytic rule for Identity and CorrelationCubic,
// 1025-point endpoint-inclusive grid otherwise.
double max_abs_inverse_derivative(const MonotoneTransform& t, double lo, double hi);

// True when max_abs_inverse_derivative uses an exact analytic rule rather
// than the grid scan.
bool has_analytic_derivative_max(const MonotoneTransform& t);

// Coefficients (c1, c3, c5) = (1, -1/(4N), 3/(16N^2)) of the odd inverse
// series b(x) = c1 x + c3 x^3 + c5 x^5 + O(N^-3). CorrelationCubic only.
std::tuple<double, double, double> inverse_series_coeffs(const MonotoneTransform& t);

void to_json(nlohmann::json& j, const MonotoneTransform& t);

}  // namespace cfcert
