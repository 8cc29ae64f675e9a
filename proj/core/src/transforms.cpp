#include "cfcert/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfcert/errors.hpp"

namespace cfcert {

namespace {

constexpr int kGridPoints = 1024;

// Finite slice of a possibly infinite interval, used by construction checks.
Interval finite_slice(const Interval& iv, double fallback_half_width) {
    Interval s = iv;
    if (!std::isfinite(s.lo)) s.lo = -fallback_half_width;
    if (!std::isfinite(s.hi)) s.hi = std::max(s.lo, 0.0) + fallback_half_width;
    return s;
}

double forward_raw(const MonotoneTransform& t, double z);

// Monotonicity and inverse round-trip checks on a uniform grid.
void check_transform(const MonotoneTransform& t) {
    Interval s = finite_slice(t.domain, 10.0);
    if (!(s.lo < s.hi)) return;  // degenerate domain, nothing to check
    double prev = forward_raw(t, s.lo);
    for (int i = 1; i < kGridPoints; ++i) {
        double z = s.lo + (s.hi - s.lo) * i / (kGridPoints - 1);
        double f = forward_raw(t, z);
        if (!(f > prev)) {
            throw MonotonicityError("transform forward map not strictly increasing near z = " +
                                    std::to_string(z));
        }
        prev = f;
    }
    for (int i = 0; i < kGridPoints; ++i) {
        double z = s.lo + (s.hi - s.lo) * i / (kGridPoints - 1);
        double back = inverse(t, forward(t, z));
        if (std::fabs(back - z) > 1e-10 * std::max(1.0, std::fabs(z))) {
            throw MonotonicityError("transform inverse round-trip failed at z = " + std::to_string(z));
        }
    }
}

double cardano_inverse(double big_n, double x) {
    // Real root of z + z^3/(4N) = x, odd in x. Written with the cube-root
    // difference rationalized so small x does not cancel.
    double ax = std::fabs(x);
    double s = std::sqrt((2.0 * big_n * ax) * (2.0 * big_n * ax) +
                         std::pow(4.0 * big_n / 3.0, 3));
    double a = std::cbrt(2.0 * big_n * ax + s);
    double b = std::cbrt(s - 2.0 * big_n * ax);
    double z = 4.0 * big_n * ax / (a * a + a * b + b * b);
    return std::copysign(z, x);
}

double forward_raw(const MonotoneTransform& t, double z) {
    if (std::holds_alternative<IdentityKind>(t.kind)) return z;
    if (const auto* c = std::get_if<CorrelationCubicKind>(&t.kind)) {
        return z + z * z * z / (4.0 * c->big_n);
    }
    if (const auto* h = std::get_if<HotellingSqrtKind>(&t.kind)) {
        double half = (h->a - 1.0) / (2.0 * h->b_coef);
        double rad = half * half + z / h->b_coef;
        if (rad < 0.0) throw TransformDomainError("HotellingSqrt: negative radicand at z = " + std::to_string(z));
        return half + std::sqrt(rad);
    }
    return std::get<NumericInverseKind>(t.kind).forward(z);
}

double numeric_inverse_solve(const MonotoneTransform& t, double x) {
    double lo = t.domain.lo, hi = t.domain.hi;
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw TransformDomainError("NumericInverse requires a finite domain");
    }
    double flo = forward_raw(t, lo), fhi = forward_raw(t, hi);
    if (x < flo || x > fhi) throw TransformDomainError("NumericInverse: x outside forward image");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double f = forward_raw(t, mid) - x;
        if (std::fabs(f) <= 1e-12 || hi - lo <= 1e-15 * std::max(1.0, std::fabs(mid))) return mid;
        // Newton step from a finite-difference slope, kept inside the bracket.
        double step = 1e-7 * std::max(1.0, std::fabs(mid));
        double slope = (forward_raw(t, std::min(mid + step, t.domain.hi)) -
                        forward_raw(t, std::max(mid - step, t.domain.lo))) /
                       (std::min(mid + step, t.domain.hi) - std::max(mid - step, t.domain.lo));
        if (f > 0.0) hi = mid; else lo = mid;
        if (slope > 0.0) {
            double cand = mid - f / slope;
            if (cand > lo && cand < hi) {
                double fc = forward_raw(t, cand) - x;
                if (fc > 0.0) hi = cand; else lo = cand;
            }
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double forward(const MonotoneTransform& t, double z) {
    if (!t.domain.contains(z)) {
        throw TransformDomainError("forward: z = " + std::to_string(z) + " outside transform domain");
    }
    return forward_raw(t, z);
}

double inverse(const MonotoneTransform& t, double x) {
    if (!t.image.contains(x)) {
        throw TransformDomainError("inverse: x = " + std::to_string(x) + " outside transform image");
    }
    if (std::holds_alternative<IdentityKind>(t.kind)) return x;
    if (const auto* c = std::get_if<CorrelationCubicKind>(&t.kind)) {
        return cardano_inverse(c->big_n, x);
    }
    if (const auto* h = std::get_if<HotellingSqrtKind>(&t.kind)) {
        return h->b_coef * x * x - (h->a - 1.0) * x;
    }
    return numeric_inverse_solve(t, x);
}

double inverse_derivative(const MonotoneTransform& t, double x) {
    if (!t.image.contains(x)) {
        throw TransformDomainError("inverse_derivative: x outside transform image");
    }
    if (std::holds_alternative<IdentityKind>(t.kind)) return 1.0;
    if (const auto* c = std::get_if<CorrelationCubicKind>(&t.kind)) {
        double b = cardano_inverse(c->big_n, x);
        return 1.0 / (1.0 + 3.0 * b * b / (4.0 * c->big_n));
    }
    if (const auto* h = std::get_if<HotellingSqrtKind>(&t.kind)) {
        double d = 2.0 * h->b_coef * x - (h->a - 1.0);
        if (!(d > 0.0)) throw TransformDomainError("HotellingSqrt: inverse derivative not positive");
        return d;
    }
    double step = 1e-7 * std::max(1.0, std::fabs(x));
    double z = numeric_inverse_solve(t, x);
    double zl = std::max(z - step, t.domain.lo), zh = std::min(z + step, t.domain.hi);
    double slope = (forward_raw(t, zh) - forward_raw(t, zl)) / (zh - zl);
    if (!(slope > 0.0)) throw TransformDomainError("NumericInverse: forward slope not positive");
    return 1.0 / slope;
}

double max_abs_inverse_derivative(const MonotoneTransform& t, double lo, double hi) {
    if (!(lo <= hi)) throw TransformDomainError("max_abs_inverse_derivative: lo > hi");
    if (!t.image.contains(lo) || !t.image.contains(hi)) {
        throw TransformDomainError("max_abs_inverse_derivative: interval exits transform image");
    }
    if (std::holds_alternative<IdentityKind>(t.kind)) return 1.0;
    if (std::holds_alternative<CorrelationCubicKind>(t.kind)) {
        // |b'| = 1/(1 + 3 b(x)^2 / 4N) decreases in |x|; max at the point nearest 0.
        double xstar = (lo <= 0.0 && hi >= 0.0) ? 0.0 : (std::fabs(lo) < std::fabs(hi) ? lo : hi);
        return inverse_derivative(t, xstar);
    }
    double best = 0.0;
    for (int i = 0; i <= kGridPoints; ++i) {
        double x = lo + (hi - lo) * i / kGridPoints;
        best = std::max(best, std::fabs(inverse_derivative(t, x)));
    }
    return best;
}

bool has_analytic_derivative_max(const MonotoneTransform& t) {
    return std::holds_alternative<IdentityKind>(t.kind) ||
           std::holds_alternative<CorrelationCubicKind>(t.kind);
}

std::tuple<double, double, double> inverse_series_coeffs(const MonotoneTransform& t) {
    const auto* c = std::get_if<CorrelationCubicKind>(&t.kind);
    if (c == nullptr) throw KindError("inverse_series_coeffs: requires CorrelationCubic kind");
    double n = c->big_n;
    return {1.0, -1.0 / (4.0 * n), 3.0 / (16.0 * n * n)};
}

MonotoneTransform make_identity() {
    MonotoneTransform t;
    t.kind = IdentityKind{};
    return t;  // infinite domain and image; checks trivial
}

MonotoneTransform make_correlation_cubic(double big_n) {
    if (!(big_n > 0.0)) throw DomainError("make_correlation_cubic: N must be > 0");
    MonotoneTransform t;
    t.kind = CorrelationCubicKind{big_n};
    check_transform(t);
    return t;
}

MonotoneTransform make_hotelling_sqrt(double a, double b_coef, Interval domain) {
    if (b_coef == 0.0) throw DomainError("make_hotelling_sqrt: b coefficient must be nonzero");
    MonotoneTransform t;
    t.kind = HotellingSqrtKind{a, b_coef};
    t.domain = domain;
    t.image = {forward_raw(t, domain.lo), std::isfinite(domain.hi)
                                              ? forward_raw(t, domain.hi)
                                              : std::numeric_limits<double>::infinity()};
    check_transform(t);
    return t;
}

MonotoneTransform make_numeric_inverse(std::function<double(double)> fwd, Interval domain) {
    if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi) || !(domain.lo < domain.hi)) {
        throw DomainError("make_numeric_inverse: requires a finite nondegenerate domain");
    }
    MonotoneTransform t;
    t.kind = NumericInverseKind{std::move(fwd)};
    t.domain = domain;
    t.image = {forward_raw(t, domain.lo), forward_raw(t, domain.hi)};
    check_transform(t);
    return t;
}

MonotoneTransform build_hotelling_transform(int p, int q, int n) {
    if (p < 1 || q < 1) throw DomainError("build_hotelling_transform: p, q must be >= 1");
    if (n < p) throw DomainError("build_hotelling_transform: requires n >= p");
    int r = p * q;
    double a = static_cast<double>(q - p - 1) / (2.0 * n);
    double b_coef = static_cast<double>(q + p + 1) / (2.0 * n * (r + 2));
    // Validity domain: the chi-squared(r) bulk, extended to the full support.
    MonotoneTransform t = make_hotelling_sqrt(a, b_coef, Interval{0.0, std::numeric_limits<double>::infinity()});
    // Explicit check over the quantile range the certificates use.
    auto g = LimitDistribution::chi_squared(r);
    double lo = quantile(g, 0.001), hi = quantile(g, 0.999);
    double prev = forward(t, lo);
    for (int i = 1; i <= kGridPoints; ++i) {
        double z = lo + (hi - lo) * i / kGridPoints;
        double f = forward(t, z);
        if (!(f > prev)) throw MonotonicityError("hotelling transform not increasing on quantile range");
        if (std::fabs(inverse(t, f) - z) > 1e-10 * std::max(1.0, std::fabs(z))) {
            throw MonotonicityError("hotelling transform round-trip failed on quantile range");
        }
        prev = f;
    }
    return t;
}

void to_json(nlohmann::json& j, const MonotoneTransform& t) {
    auto bound = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return v > 0 ? "inf" : "-inf";
    };
    j = nlohmann::json{{"domain", {bound(t.domain.lo), bound(t.domain.hi)}}};
    if (std::holds_alternative<IdentityKind>(t.kind)) {
        j["kind"] = "identity";
    } else if (const auto* c = std::get_if<CorrelationCubicKind>(&t.kind)) {
        j["kind"] = "correlation_cubic";
        j["N"] = c->big_n;
    } else if (const auto* h = std::get_if<HotellingSqrtKind>(&t.kind)) {
        j["kind"] = "hotelling_sqrt";
        j["a"] = h->a;
        j["b"] = h->b_coef;
    } else {
        j["kind"] = "numeric_inverse";
    }
}

}  // namespace cfcert
