#pragma once

#include <cstddef>
#include <vector>

namespace cfcert {

// Dense univariate polynomial, coeffs[k] is the coefficient of x^k.
struct Polynomial {
    std::vector<double> coeffs;

    Polynomial() = default;
    explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) {}

    double operator()(double x) const {
        double acc = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) {
            acc = acc * x + coeffs[i];
        }
        return acc;
    }

    Polynomial derivative() const {
        if (coeffs.size() <= 1) return Polynomial{};
        std::vector<double> d(coeffs.size() - 1);
        for (std::size_t k = 1; k < coeffs.size(); ++k) {
            d[k - 1] = static_cast<double>(k) * coeffs[k];
        }
        return Polynomial{std::move(d)};
    }

    // Degree ignoring trailing zero coefficients; -1 for the zero polynomial.
    int degree() const {
        for (std::size_t i = coeffs.size(); i-- > 0;) {
            if (coeffs[i] != 0.0) return static_cast<int>(i);
        }
        return -1;
    }

    bool is_zero() const { return degree() < 0; }
};

}  // namespace cfcert
