#include <doctest.h>

#include <cmath>
#include <random>

#include "cfcert/distributions.hpp"
#include "cfcert/errors.hpp"

using namespace cfcert;

namespace {

// Closed-form chi-squared CDF for even dof via the finite Poisson sum.
double chi2_cdf_even_dof(int dof, double x) {
    if (x <= 0.0) return 0.0;
    double lambda = 0.5 * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < dof / 2; ++k) {
        term *= lambda / k;
        sum += term;
    }
    return 1.0 - std::exp(-lambda) * sum;
}

}  // namespace

TEST_CASE("density closed forms") {
    CHECK(density(LimitDistribution::std_normal(), 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(density(LimitDistribution::chi_squared(2), 0.6) ==
          doctest::Approx(std::exp(-0.3) / 2.0).epsilon(1e-14));
    CHECK(density(LimitDistribution::chi_squared(4), -1.0) == 0.0);
}

TEST_CASE("cdf closed forms") {
    CHECK(cdf(LimitDistribution::std_normal(), 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(cdf(LimitDistribution::chi_squared(2), 2.0 * std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(cdf(LimitDistribution::chi_squared(4), 3.0) ==
          doctest::Approx(1.0 - std::exp(-1.5) * 2.5).epsilon(1e-14));
}

TEST_CASE("quantile") {
    CHECK(quantile(LimitDistribution::std_normal(), 0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(quantile(LimitDistribution::chi_squared(2), 0.5) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(quantile(LimitDistribution::std_normal(), 0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-10));
    CHECK_THROWS_AS(quantile(LimitDistribution::std_normal(), 0.0), DomainError);
    CHECK_THROWS_AS(quantile(LimitDistribution::chi_squared(4), 1.0), DomainError);
}

TEST_CASE("log_density_slope") {
    CHECK(log_density_slope(LimitDistribution::std_normal(), 0.0) == 0.0);
    CHECK(log_density_slope(LimitDistribution::chi_squared(2), 5.0) == doctest::Approx(-0.5));
    CHECK(log_density_slope(LimitDistribution::chi_squared(4), 2.0) == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS_AS(log_density_slope(LimitDistribution::chi_squared(4), -0.1), DomainError);
}

TEST_CASE("density_min_on_interval endpoint rule") {
    auto nd = LimitDistribution::std_normal();
    CHECK(density_min_on_interval(nd, -1.0, 1.0) == doctest::Approx(density(nd, 1.0)).epsilon(1e-15));
    CHECK(density_min_on_interval(nd, 2.0, 2.0) == doctest::Approx(density(nd, 2.0)).epsilon(1e-15));
    auto c2 = LimitDistribution::chi_squared(2);
    CHECK(density_min_on_interval(c2, 1.0, 3.0) == doctest::Approx(std::exp(-1.5) / 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(density_min_on_interval(c2, -1.0, 3.0), DomainError);
    CHECK_THROWS_AS(density_min_on_interval(nd, 1.0, 0.0), DomainError);
}

TEST_CASE("cdf is nondecreasing") {
    for (auto dist : {LimitDistribution::std_normal(), LimitDistribution::chi_squared(1),
                      LimitDistribution::chi_squared(6)}) {
        double lo = dist.kind == DistKind::StdNormal ? -10.0 : 1e-6;
        double prev = cdf(dist, lo);
        for (int i = 1; i <= 500; ++i) {
            double x = lo + (30.0 - lo) * i / 500.0;
            double f = cdf(dist, x);
            CHECK(f >= prev);
            prev = f;
        }
    }
}

TEST_CASE("quantile round trip over a probability grid") {
    for (auto dist : {LimitDistribution::std_normal(), LimitDistribution::chi_squared(1),
                      LimitDistribution::chi_squared(2), LimitDistribution::chi_squared(4),
                      LimitDistribution::chi_squared(6), LimitDistribution::chi_squared(10)}) {
        for (double p : {1e-6, 1e-4, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0 - 1e-4, 1.0 - 1e-6}) {
            double x = quantile(dist, p);
            CHECK(std::fabs(cdf(dist, x) - p) <= 1e-10);
        }
    }
}

TEST_CASE("chi-squared cdf matches Poisson sum for even dof") {
    for (int dof : {2, 4}) {
        auto dist = LimitDistribution::chi_squared(dof);
        for (double x = 0.0; x <= 50.0; x += 0.05) {
            CHECK(std::fabs(cdf(dist, x) - chi2_cdf_even_dof(dof, x)) <= 1e-12);
        }
    }
}

TEST_CASE("density_min is a true lower bound on random interior points") {
    std::mt19937 rng(1234);
    struct Case { LimitDistribution d; double lo, hi; };
    Case cases[] = {{LimitDistribution::std_normal(), -1.5, 2.5},
                    {LimitDistribution::chi_squared(1), 0.2, 4.0},
                    {LimitDistribution::chi_squared(6), 1.0, 15.0}};
    for (const auto& c : cases) {
        double mn = density_min_on_interval(c.d, c.lo, c.hi);
        std::uniform_real_distribution<double> u(c.lo, c.hi);
        for (int i = 0; i < 100; ++i) {
            CHECK(mn <= density(c.d, u(rng)) + 1e-15);
        }
    }
}

TEST_CASE("log_density_slope matches finite differences") {
    const double h = 1e-6;
    auto fd = [&](const LimitDistribution& d, double x) {
        return (std::log(density(d, x + h)) - std::log(density(d, x - h))) / (2.0 * h);
    };
    for (double x : {-2.0, -0.5, 0.3, 1.7}) {
        CHECK(std::fabs(log_density_slope(LimitDistribution::std_normal(), x) -
                        fd(LimitDistribution::std_normal(), x)) <= 1e-6);
    }
    for (double x : {0.5, 1.0, 3.0, 8.0}) {
        CHECK(std::fabs(log_density_slope(LimitDistribution::chi_squared(5), x) -
                        fd(LimitDistribution::chi_squared(5), x)) <= 1e-6);
    }
}

TEST_CASE("chi-squared requires dof >= 1") {
    CHECK_THROWS_AS(LimitDistribution::chi_squared(0), DomainError);
}
