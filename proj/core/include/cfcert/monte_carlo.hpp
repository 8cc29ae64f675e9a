#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cfcert/cf_bounds.hpp"
#include "cfcert/edgeworth.hpp"

namespace cfcert {

// Splittable deterministic generator: stream s of seed k is independent of
// the others and reproducible regardless of execution threading.
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_index);

    std::uint64_t next_u64();
    double next_uniform();  // in (0, 1)
    double next_normal();
    double next_gamma(double shape);  // unit scale, shape > 0
    double next_chi_squared(double dof);

  private:
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

struct CorrelationStatistic {
    int n = 0;
};

struct HotellingT0sqStatistic {
    int p = 0;
    int q = 0;
    int n = 0;
};

struct SimulationPlan {
    std::variant<CorrelationStatistic, HotellingT0sqStatistic> statistic;
    std::uint64_t sample_count = 0;
    std::uint64_t seed = 0;
    unsigned stream_count = 1;
};

struct EmpiricalQuantiles {
    std::vector<double> sorted_samples;
    SimulationPlan plan;
};

// Draws of sqrt(N) R, R the sample correlation of two independent standard
// normal n-vectors, N = n - 2.5.
EmpiricalQuantiles sample_correlation(const SimulationPlan& plan);

// Draws of n tr(S_h S_e^-1), S_h ~ W_p(q, I), S_e ~ W_p(n, I), via the
// Bartlett decomposition (outer-product sum when q < p).
EmpiricalQuantiles sample_t0sq(const SimulationPlan& plan);

// Null CDF Pr(sqrt(N) R <= x) through the regularized incomplete beta
// function; 0 / 1 outside the support (-sqrt(N), sqrt(N)).
double exact_correlation_cdf(int n, double x);

// Type-1 empirical quantile: order statistic at rank ceil((1-alpha) * count).
double empirical_upper_quantile(const EmpiricalQuantiles& samples, double alpha);

// max |oracle(x) - approx_cdf(model, x)| over a uniform grid with local
// refinement around the arg-max.
double sup_norm_gap(const EdgeworthModel& model, const std::function<double(double)>& oracle_cdf,
                    double grid_lo, double grid_hi, int grid_points = 4096);

// Same scan against a step empirical CDF; evaluated on the grid plus at both
// one-sided limits of every sample point.
double sup_norm_gap_empirical(const EmpiricalQuantiles& samples,
                              const std::function<double(double)>& reference_cdf);

struct VerificationVerdict {
    bool inside = false;
    double slack = 0.0;        // distance from the empirical quantile to the nearer inflated edge
    double dkw_margin = 0.0;   // quantile-scale inflation derived from the DKW band
    double empirical_quantile = 0.0;
    std::vector<std::string> flags;
};

// Checks that the certified interval, inflated by the DKW quantile margin at
// the given confidence, contains the empirical upper quantile.
VerificationVerdict verify_enclosure(const CertifiedQuantile& cert, const EmpiricalQuantiles& samples,
                                     double confidence);

// Two-sided DKW half-width sqrt(ln(2/delta) / (2 count)).
double dkw_epsilon(std::uint64_t count, double confidence);

// Binary sample dump: 32-byte header {magic "CFMC", version, statistic tag,
// p, q, n, seed}, then little-endian binary64 samples.
void write_sample_dump(const std::string& path, const EmpiricalQuantiles& samples);
EmpiricalQuantiles read_sample_dump(const std::string& path);

void to_json(nlohmann::json& j, const VerificationVerdict& verdict);

}  // namespace cfcert
