#include "cfcert/cf_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfcert/errors.hpp"

namespace cfcert {

namespace {

double window_half_width(const EdgeworthModel& model) {
    double d = model.remainder_bound();
    if (!(d >= 0.0)) throw ConstraintError("model remainder bound is not finite");
    if (d >= 0.5) {
        throw InfeasibleError("alpha window empty: remainder bound d = " + std::to_string(d) + " >= 1/2");
    }
    return d;
}

void require_alpha_in_window(double alpha, double d) {
    if (!(alpha > d && alpha < 1.0 - d)) {
        throw AlphaOutOfRange("alpha = " + std::to_string(alpha) + " outside applicability window (" +
                              std::to_string(d) + ", " + std::to_string(1.0 - d) + ")");
    }
}

}  // namespace

std::string theorem_name(Theorem t) {
    switch (t) {
        case Theorem::T1: return "T1";
        case Theorem::T2: return "T2";
        default: return "T3";
    }
}

std::pair<double, double> alpha_window(const EdgeworthModel& model) {
    double d = window_half_width(model);
    return {d, 1.0 - d};
}

Bracket theorem1_bracket(const EdgeworthModel& model, double alpha) {
    double d = window_half_width(model);
    require_alpha_in_window(alpha, d);
    // Upper-point convention: G(u_alpha) = 1 - alpha.
    double p_lo = 1.0 - alpha - d;
    double p_hi = 1.0 - alpha + d;
    if (!(p_lo > 0.0 && p_hi < 1.0)) {
        // alpha sits close enough to the window edge that the bracket
        // probability rounds onto the boundary.
        throw AlphaOutOfRange("alpha = " + std::to_string(alpha) +
                              " rounds onto the applicability window boundary");
    }
    return {quantile(model.base, p_lo), quantile(model.base, p_hi)};
}

CertifiedQuantile theorem1_certify(const EdgeworthModel& model, double alpha) {
    double d = window_half_width(model);
    require_alpha_in_window(alpha, d);
    Bracket br = theorem1_bracket(model, alpha);
    CertifiedQuantile cert;
    cert.theorem = Theorem::T1;
    cert.alpha = alpha;
    cert.model_label = model.label;
    cert.window = {d, 1.0 - d};
    cert.estimate = quantile(model.base, 1.0 - alpha);
    double gmin = density_min_on_interval(model.base, br.lo, br.hi);
    cert.radius = d / gmin;
    double lo = std::max(cert.estimate - cert.radius, br.lo);
    double hi = std::min(cert.estimate + cert.radius, br.hi);
    if (lo > hi) {
        // Rounding at extreme alpha can leave an empty intersection; report
        // the bracket alone and flag it.
        cert.interval = br;
        cert.flags.push_back("RoundingFlag");
    } else {
        cert.interval = {lo, hi};
    }
    return cert;
}

CertifiedQuantile theorem2_certify(const EdgeworthModel& transformed_model, double alpha) {
    if (!std::holds_alternative<std::monostate>(transformed_model.correction)) {
        throw ConstraintError("theorem2_certify: transformed model must carry no correction term");
    }
    CertifiedQuantile cert = theorem1_certify(transformed_model, alpha);
    cert.theorem = Theorem::T2;
    return cert;
}

CertifiedQuantile theorem3_certify(const EdgeworthModel& transformed_model,
                                   const MonotoneTransform& transform, double alpha) {
    double d = window_half_width(transformed_model);
    require_alpha_in_window(alpha, d);
    Bracket br = theorem1_bracket(transformed_model, alpha);
    if (!transform.image.contains(br.lo) || !transform.image.contains(br.hi)) {
        throw TransformDomainError("theorem3_certify: bracket exits transform image");
    }
    CertifiedQuantile cert;
    cert.theorem = Theorem::T3;
    cert.alpha = alpha;
    cert.model_label = transformed_model.label;
    cert.window = {d, 1.0 - d};
    double u_alpha = quantile(transformed_model.base, 1.0 - alpha);
    cert.estimate = inverse(transform, u_alpha);
    double gmin = density_min_on_interval(transformed_model.base, br.lo, br.hi);
    double bmax = max_abs_inverse_derivative(transform, br.lo, br.hi);
    cert.radius = d * bmax / gmin;
    // The quantile also lies inside the inverse image of the bracket.
    double lo = std::max(cert.estimate - cert.radius, inverse(transform, br.lo));
    double hi = std::min(cert.estimate + cert.radius, inverse(transform, br.hi));
    if (lo > hi) {
        cert.interval = {inverse(transform, br.lo), inverse(transform, br.hi)};
        cert.flags.push_back("RoundingFlag");
    } else {
        cert.interval = {lo, hi};
    }
    if (!has_analytic_derivative_max(transform)) cert.flags.push_back("derivative_max_grid");
    return cert;
}

std::pair<double, double> cf_coefficients(const EdgeworthModel& model, double u,
                                          const std::optional<Polynomial>& a2_poly) {
    if (model.base.kind == DistKind::ChiSquared && u <= 0.0) {
        throw DomainError("cf_coefficients: u outside support interior");
    }
    Polynomial a1 = correction_polynomial(model);
    double a1u = a1(u);
    double b1 = -a1u;
    double slope = log_density_slope(model.base, u);
    double a2u = a2_poly ? (*a2_poly)(u) : 0.0;
    double b2 = 0.5 * slope * a1u * a1u - a2u + a1.derivative()(u) * a1u;
    return {b1, b2};
}

double first_order_u_of_x(const EdgeworthModel& model, double x) {
    Polynomial a1 = correction_polynomial(model);
    return x + model.eps * a1(x);
}

void to_json(nlohmann::json& j, const CertifiedQuantile& cert) {
    j = nlohmann::json{{"model_label", cert.model_label},
                       {"alpha", cert.alpha},
                       {"theorem", theorem_name(cert.theorem)},
                       {"estimate", cert.estimate},
                       {"radius", cert.radius},
                       {"interval", {cert.interval.lo, cert.interval.hi}},
                       {"window", {cert.window.lo, cert.window.hi}},
                       {"flags", cert.flags}};
}

}  // namespace cfcert
