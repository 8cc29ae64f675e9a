#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include "cfcert/cf_bounds.hpp"
#include "cfcert/errors.hpp"
#include "cfcert/monte_carlo.hpp"

using namespace cfcert;

TEST_CASE("sampling is deterministic and independent of thread count") {
    SimulationPlan plan;
    plan.statistic = CorrelationStatistic{12};
    plan.sample_count = 20000;
    plan.seed = 42;
    plan.stream_count = 8;

    auto a = sample_correlation(plan);
    auto b = sample_correlation(plan);
    CHECK(a.sorted_samples == b.sorted_samples);

    setenv("CF_CERTIFY_THREADS", "1", 1);
    auto serial = sample_correlation(plan);
    unsetenv("CF_CERTIFY_THREADS");
    CHECK(serial.sorted_samples == a.sorted_samples);

    plan.seed = 43;
    CHECK(sample_correlation(plan).sorted_samples != a.sorted_samples);
}

TEST_CASE("correlation samples live in the scaled support and are centered") {
    SimulationPlan plan;
    plan.statistic = CorrelationStatistic{10};
    plan.sample_count = 50000;
    plan.seed = 7;
    plan.stream_count = 4;
    auto s = sample_correlation(plan);
    double bound = std::sqrt(10.0 - 2.5);
    for (double v : {s.sorted_samples.front(), s.sorted_samples.back()}) {
        CHECK(std::fabs(v) < bound);
    }
    double mean = std::accumulate(s.sorted_samples.begin(), s.sorted_samples.end(), 0.0) /
                  static_cast<double>(s.sorted_samples.size());
    CHECK(std::fabs(mean) < 0.02);  // sd/sqrt(m) ~ 0.004

    SimulationPlan one = plan;
    one.sample_count = 1;
    auto single = sample_correlation(one);
    REQUIRE(single.sorted_samples.size() == 1);
    CHECK(std::fabs(single.sorted_samples[0]) < bound);
}

TEST_CASE("exact_correlation_cdf") {
    CHECK(exact_correlation_cdf(12, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    double bound = std::sqrt(12.0 - 2.5);
    CHECK(exact_correlation_cdf(12, -bound) == 0.0);
    CHECK(exact_correlation_cdf(12, bound) == 1.0);
    // Valid, symmetric CDF on a grid.
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
        double x = -bound + 2.0 * bound * i / 400.0;
        double f = exact_correlation_cdf(12, x);
        CHECK(f >= prev);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        CHECK(f + exact_correlation_cdf(12, -x) == doctest::Approx(1.0).epsilon(1e-13));
        prev = f;
    }
    CHECK_THROWS_AS(exact_correlation_cdf(4, 0.0), DomainError);
}

TEST_CASE("correlation sampler agrees with the exact null law") {
    SimulationPlan plan;
    plan.statistic = CorrelationStatistic{12};
    plan.sample_count = 200000;
    plan.seed = 101;
    plan.stream_count = 8;
    auto s = sample_correlation(plan);
    double gap = sup_norm_gap_empirical(s, [](double x) { return exact_correlation_cdf(12, x); });
    // 99.9% DKW band for 2e5 samples is about 4.4e-3.
    CHECK(gap <= dkw_epsilon(plan.sample_count, 0.999));
}

TEST_CASE("t0sq sampler with p=1 reduces to a scaled F ratio") {
    // For p=1: n tr(S_h S_e^-1) = n X/Y with X ~ chi2(q), Y ~ chi2(n), which
    // is q F_{q,n}; Pr(q F <= x) = I_{x/(x+n)}(q/2, n/2).
    int q = 3, n = 25;
    SimulationPlan plan;
    plan.statistic = HotellingT0sqStatistic{1, q, n};
    plan.sample_count = 200000;
    plan.seed = 555;
    plan.stream_count = 8;
    auto s = sample_t0sq(plan);
    auto oracle = [q, n](double x) {
        if (x <= 0.0) return 0.0;
        return special::beta_i(0.5 * q, 0.5 * n, x / (x + n));
    };
    double gap = sup_norm_gap_empirical(s, oracle);
    CHECK(gap <= dkw_epsilon(plan.sample_count, 0.999));
}

TEST_CASE("t0sq sampler handles q < p and matches the trace mean") {
    int p = 3, q = 2, n = 30;
    SimulationPlan plan;
    plan.statistic = HotellingT0sqStatistic{p, q, n};
    plan.sample_count = 100000;
    plan.seed = 9001;
    plan.stream_count = 8;
    auto s = sample_t0sq(plan);
    CHECK(s.sorted_samples.front() > 0.0);
    double mean = std::accumulate(s.sorted_samples.begin(), s.sorted_samples.end(), 0.0) /
                  static_cast<double>(s.sorted_samples.size());
    // E[n tr(S_h S_e^-1)] = n p q / (n - p - 1).
    double expected = static_cast<double>(n) * p * q / (n - p - 1.0);
    CHECK(mean == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("empirical_upper_quantile") {
    EmpiricalQuantiles s;
    s.sorted_samples = {1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(empirical_upper_quantile(s, 0.2) == 4.0);
    CHECK(empirical_upper_quantile(s, 0.999) == 1.0);
    CHECK(empirical_upper_quantile(s, 0.001) == 5.0);
    s.sorted_samples = {1.0, 2.0, 3.0};
    CHECK(empirical_upper_quantile(s, 0.5) == 2.0);
    CHECK_THROWS_AS(empirical_upper_quantile(s, 0.0), DomainError);
    s.sorted_samples.clear();
    CHECK_THROWS_AS(empirical_upper_quantile(s, 0.5), DomainError);
}

TEST_CASE("raw normal stream hits the right upper quantile") {
    RandomStream rng(2024, 0);
    EmpiricalQuantiles s;
    s.sorted_samples.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) s.sorted_samples.push_back(rng.next_normal());
    std::sort(s.sorted_samples.begin(), s.sorted_samples.end());
    CHECK(empirical_upper_quantile(s, 0.05) == doctest::Approx(1.6449).epsilon(0.006));
}

TEST_CASE("gamma and chi-squared draws have the right first moments") {
    RandomStream rng(31337, 2);
    double sum = 0.0, sumsq = 0.0;
    const int m = 200000;
    for (int i = 0; i < m; ++i) {
        double x = rng.next_chi_squared(5.0);
        sum += x;
        sumsq += x * x;
    }
    double mean = sum / m;
    double var = sumsq / m - mean * mean;
    CHECK(mean == doctest::Approx(5.0).epsilon(0.01));
    CHECK(var == doctest::Approx(10.0).epsilon(0.05));

    double gsum = 0.0;
    for (int i = 0; i < m; ++i) gsum += rng.next_gamma(0.3);  // sub-unit shape path
    CHECK(gsum / m == doctest::Approx(0.3).epsilon(0.02));
    CHECK_THROWS_AS(rng.next_gamma(0.0), DomainError);
}

TEST_CASE("sup_norm_gap") {
    auto corr = build_correlation_model(50);
    // Against its own approximation the gap vanishes.
    double self_gap = sup_norm_gap(corr, [&](double x) { return approx_cdf(corr, x); }, -6.0, 6.0);
    CHECK(self_gap == 0.0);
    // Against the plain base CDF the gap is the known correction peak
    // max_x (x^3/4) phi(x) / 47.5 at x = sqrt(3).
    double expected = (3.0 * std::sqrt(3.0) / 4.0) * density(LimitDistribution::std_normal(), std::sqrt(3.0)) / 47.5;
    double gap = sup_norm_gap(corr, [](double x) { return cdf(LimitDistribution::std_normal(), x); }, -6.0, 6.0);
    CHECK(gap == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("correction model stays within its remainder bound for n = 50") {
    auto corr = build_correlation_model(50);
    double lim = std::sqrt(50.0 - 2.5);
    double gap = sup_norm_gap(corr, [](double x) { return exact_correlation_cdf(50, x); }, -lim + 1e-9, lim - 1e-9);
    CHECK(gap <= corr.remainder_bound());
}

TEST_CASE("verify_enclosure") {
    auto tm = build_correlation_model(50);
    tm.correction = std::monostate{};
    auto cert = theorem2_certify(tm, 0.05);

    SimulationPlan plan;
    plan.statistic = CorrelationStatistic{50};
    plan.sample_count = 200000;
    plan.seed = 77;
    plan.stream_count = 8;
    auto s = sample_correlation(plan);

    auto ok = verify_enclosure(cert, s, 0.99);
    CHECK(ok.inside);
    CHECK(ok.slack >= 0.0);
    CHECK(ok.dkw_margin > 0.0);

    auto shifted = cert;
    shifted.interval.lo += 0.2;
    shifted.interval.hi += 0.2;
    shifted.estimate += 0.2;
    auto bad = verify_enclosure(shifted, s, 0.99);
    CHECK_FALSE(bad.inside);
    CHECK(bad.slack < 0.0);

    SimulationPlan tiny = plan;
    tiny.sample_count = 100;
    auto few = sample_correlation(tiny);
    auto weak = verify_enclosure(cert, few, 0.99);
    bool inconclusive = false;
    for (const auto& f : weak.flags) inconclusive = inconclusive || f == "inconclusive";
    CHECK(inconclusive);
}

TEST_CASE("dkw_epsilon closed form") {
    CHECK(dkw_epsilon(1000000, 0.99) ==
          doctest::Approx(std::sqrt(std::log(200.0) / 2e6)).epsilon(1e-15));
    CHECK(dkw_epsilon(100, 0.95) == doctest::Approx(std::sqrt(std::log(40.0) / 200.0)).epsilon(1e-15));
    CHECK_THROWS_AS(dkw_epsilon(100, 1.0), DomainError);
}

TEST_CASE("sample dump round trip") {
    SimulationPlan plan;
    plan.statistic = HotellingT0sqStatistic{2, 3, 40};
    plan.sample_count = 5000;
    plan.seed = 12345;
    plan.stream_count = 4;
    auto s = sample_t0sq(plan);

    const char* path = "mc_dump_test.bin";
    write_sample_dump(path, s);
    auto back = read_sample_dump(path);
    CHECK(back.sorted_samples == s.sorted_samples);
    CHECK(back.plan.seed == plan.seed);
    CHECK(back.plan.sample_count == plan.sample_count);
    const auto& st = std::get<HotellingT0sqStatistic>(back.plan.statistic);
    CHECK(st.p == 2);
    CHECK(st.q == 3);
    CHECK(st.n == 40);

    // Corrupt the magic and expect rejection.
    {
        std::FILE* f = std::fopen(path, "r+b");
        REQUIRE(f != nullptr);
        std::fputc('X', f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(read_sample_dump(path), ConstraintError);
    std::remove(path);
}
