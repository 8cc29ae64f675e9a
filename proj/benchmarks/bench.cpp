#include <benchmark/benchmark.h>

#include "cfcert/cf_bounds.hpp"
#include "cfcert/distributions.hpp"
#include "cfcert/edgeworth.hpp"
#include "cfcert/monte_carlo.hpp"
#include "cfcert/transforms.hpp"

namespace {

void BM_NormalQuantile(benchmark::State& state) {
    auto d = cfcert::LimitDistribution::std_normal();
    double p = 0.001;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfcert::quantile(d, p));
        p += 1e-7;
        if (p > 0.999) p = 0.001;
    }
}
BENCHMARK(BM_NormalQuantile);

void BM_ChiSquaredQuantile(benchmark::State& state) {
    auto d = cfcert::LimitDistribution::chi_squared(static_cast<int>(state.range(0)));
    double p = 0.001;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfcert::quantile(d, p));
        p += 1e-7;
        if (p > 0.999) p = 0.001;
    }
}
BENCHMARK(BM_ChiSquaredQuantile)->Arg(1)->Arg(6)->Arg(20);

void BM_ApproxCdf(benchmark::State& state) {
    auto m = cfcert::build_hotelling_t0sq_model(2, 3, 40, 5.0);
    double x = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfcert::approx_cdf(m, x));
        x += 1e-6;
        if (x > 25.0) x = 0.5;
    }
}
BENCHMARK(BM_ApproxCdf);

void BM_Theorem3Certify(benchmark::State& state) {
    auto m = cfcert::build_correlation_model(50);
    m.correction = std::monostate{};
    auto t = cfcert::make_correlation_cubic(47.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfcert::theorem3_certify(m, t, 0.05));
    }
}
BENCHMARK(BM_Theorem3Certify);

void BM_CorrelationSampling(benchmark::State& state) {
    cfcert::SimulationPlan plan;
    plan.statistic = cfcert::CorrelationStatistic{50};
    plan.sample_count = static_cast<std::uint64_t>(state.range(0));
    plan.seed = 1;
    plan.stream_count = 8;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfcert::sample_correlation(plan));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CorrelationSampling)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_T0sqSampling(benchmark::State& state) {
    cfcert::SimulationPlan plan;
    plan.statistic = cfcert::HotellingT0sqStatistic{2, 3, 40};
    plan.sample_count = static_cast<std::uint64_t>(state.range(0));
    plan.seed = 1;
    plan.stream_count = 8;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfcert::sample_t0sq(plan));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_T0sqSampling)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_ExactCorrelationCdf(benchmark::State& state) {
    double x = -4.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfcert::exact_correlation_cdf(50, x));
        x += 1e-6;
        if (x > 4.0) x = -4.0;
    }
}
BENCHMARK(BM_ExactCorrelationCdf);

}  // namespace

BENCHMARK_MAIN();
