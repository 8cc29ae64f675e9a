#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cfcert/distributions.hpp"
#include "cfcert/polynomial.hpp"

namespace cfcert {

// Correction of the form eps * a1(x) * g(x), a1 a polynomial of degree <= 8.
struct DensityFactor {
    Polynomial poly;
};

// Correction of the form eps * scale * sum_j mix_coeffs[j] * G_{base_dof + 2j}(x).
// The coefficients must sum to zero so the leading chi-squared terms cancel.
struct ChiSquaredMixture {
    int base_dof = 1;
    std::vector<double> mix_coeffs;
    double scale = 1.0;
};

using CorrectionForm = std::variant<std::monostate, DensityFactor, ChiSquaredMixture>;

// A statistic's approximate CDF: limit G, an eps^1 correction term, and a
// uniform remainder bound remainder_const * eps^eps_order.
struct EdgeworthModel {
    LimitDistribution base;
    double eps = 0.0;
    int eps_order = 1;  // 1 or 2
    CorrectionForm correction;
    double remainder_const = 0.0;
    std::string label;

    // remainder_const * eps^eps_order, the uniform CDF error bound.
    double remainder_bound() const;

    // Validates field invariants; throws ConstraintError / DomainError.
    void validate() const;
};

// Raw expansion value G(x) + correction(x); deliberately not clamped to [0,1].
double approx_cdf(const EdgeworthModel& model, double x);

// Rewrites a zero-sum chi-squared mixture as a density-factor polynomial a(x)
// with scale * sum_j a_j G_{q+2j}(x) == g_q(x) * a(x) identically.
DensityFactor mixture_to_density_factor(const ChiSquaredMixture& mixture);

// Returns the model's correction as a DensityFactor polynomial (converting a
// mixture if needed); empty polynomial for a correction-free model.
Polynomial correction_polynomial(const EdgeworthModel& model);

// Hotelling T0^2: base chi-squared(pq), mixture coefficients
// [(q-p-1), -2q, (q+p+1)] with scale pq/4, eps = 1/n, remainder c_pq / n^2.
EdgeworthModel build_hotelling_t0sq_model(int p, int q, int n, double c_pq);

// Scaled sample correlation sqrt(N) R, N = n - 2.5: standard normal base,
// a1(x) = x^3/4, eps = 1/N, remainder 2.2 / N^2. Requires n >= 7.
EdgeworthModel build_correlation_model(int n);

void to_json(nlohmann::json& j, const EdgeworthModel& model);
void from_json(const nlohmann::json& j, EdgeworthModel& model);

}  // namespace cfcert
