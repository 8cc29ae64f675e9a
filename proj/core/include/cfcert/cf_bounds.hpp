#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cfcert/edgeworth.hpp"
#include "cfcert/polynomial.hpp"
#include "cfcert/transforms.hpp"

namespace cfcert {

// Two-sided quantile enclosure [u_{alpha+d}, u_{alpha-d}] for the upper point.
struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
};

enum class Theorem { T1, T2, T3 };

struct CertifiedQuantile {
    double estimate = 0.0;
    double radius = 0.0;
    Bracket interval;
    Bracket window;  // admissible alpha range (lo, hi)
    Theorem theorem = Theorem::T1;
    double alpha = 0.0;
    std::string model_label;
    std::vector<std::string> flags;
};

// Admissible alpha range (d, 1-d), d = remainder_const * eps^eps_order.
// Throws InfeasibleError when d >= 1/2.
std::pair<double, double> alpha_window(const EdgeworthModel& model);

// u_{alpha+d} <= x_alpha <= u_{alpha-d}, upper-point convention G(u_a) = 1 - a.
Bracket theorem1_bracket(const EdgeworthModel& model, double alpha);

// estimate u_alpha, radius d / min g over the bracket, interval intersected
// with the bracket.
CertifiedQuantile theorem1_certify(const EdgeworthModel& model, double alpha);

// Same arithmetic on a transformed-statistic model (correction None,
// remainder_const the transformed bound, eps_order 2); certifies the
// transformed statistic's upper point.
CertifiedQuantile theorem2_certify(const EdgeworthModel& transformed_model, double alpha);

// estimate b(u_alpha), radius scaled by max |b'| over the bracket.
CertifiedQuantile theorem3_certify(const EdgeworthModel& transformed_model,
                                   const MonotoneTransform& transform, double alpha);

// Cornish-Fisher coefficients at u:
//   b1 = -a1(u)
//   b2 = (1/2) (g'/g)(u) a1(u)^2 - a2(u) + a1'(u) a1(u)
// a2 defaults to zero; the b2 value is then partial.
std::pair<double, double> cf_coefficients(const EdgeworthModel& model, double u,
                                          const std::optional<Polynomial>& a2_poly = std::nullopt);

// First-order inverse expansion u(x) = x + eps * a1(x).
double first_order_u_of_x(const EdgeworthModel& model, double x);

void to_json(nlohmann::json& j, const CertifiedQuantile& cert);

std::string theorem_name(Theorem t);

}  // namespace cfcert
