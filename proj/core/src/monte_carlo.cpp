#include "cfcert/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

#include "cfcert/errors.hpp"

namespace cfcert {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_index) {
    // Substream derivation: mix the stream index into the splitmix chain so
    // streams of the same seed are decorrelated.
    std::uint64_t sm = seed ^ (stream_index * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL);
    for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t RandomStream::next_u64() {
    // xoshiro256++
    std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RandomStream::next_uniform() {
    // 53-bit mantissa, offset by half an ulp so the value stays inside (0,1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::next_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586477 * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

double RandomStream::next_gamma(double shape) {
    if (!(shape > 0.0)) throw DomainError("next_gamma: shape must be > 0");
    if (shape < 1.0) {
        // Boost to shape + 1, then scale back.
        double g = next_gamma(shape + 1.0);
        return g * std::pow(next_uniform(), 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze.
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = next_normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = next_uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double RandomStream::next_chi_squared(double dof) { return 2.0 * next_gamma(0.5 * dof); }

namespace {

unsigned thread_cap() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CF_CERTIFY_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
}

// Runs one sampler body per stream with a fixed stream->range assignment and
// merges in stream order; the result is independent of the executing threads.
template <typename Body>
std::vector<double> run_streams(const SimulationPlan& plan, Body body) {
    if (plan.sample_count < 1) throw DomainError("sample_count must be >= 1");
    if (plan.stream_count < 1) throw DomainError("stream_count must be >= 1");
    unsigned streams = plan.stream_count;
    std::uint64_t base = plan.sample_count / streams;
    std::uint64_t rem = plan.sample_count % streams;
    std::vector<std::vector<double>> parts(streams);
    auto run_one = [&](unsigned s) {
        std::uint64_t count = base + (s < rem ? 1 : 0);
        RandomStream rng(plan.seed, s);
        parts[s].reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) parts[s].push_back(body(rng));
    };
    unsigned workers = std::min(streams, thread_cap());
    if (workers <= 1) {
        for (unsigned s = 0; s < streams; ++s) run_one(s);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (unsigned s = w; s < streams; s += workers) run_one(s);
            });
        }
        for (auto& th : pool) th.join();
    }
    std::vector<double> all;
    all.reserve(plan.sample_count);
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    std::sort(all.begin(), all.end());
    return all;
}

// Lower-triangular Bartlett factor of W_p(dof, I); A[i*p+j].
void bartlett_factor(RandomStream& rng, int p, int dof, std::vector<double>& a) {
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < i; ++j) a[i * p + j] = rng.next_normal();
        a[i * p + i] = std::sqrt(rng.next_chi_squared(static_cast<double>(dof - i)));
        for (int j = i + 1; j < p; ++j) a[i * p + j] = 0.0;
    }
}

void aat(int p, const std::vector<double>& a, std::vector<double>& s) {
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (int k = 0; k <= std::min(i, j); ++k) acc += a[i * p + k] * a[j * p + k];
            s[i * p + j] = acc;
            s[j * p + i] = acc;
        }
    }
}

// In-place Cholesky, lower factor; false on breakdown.
bool cholesky(int p, std::vector<double>& m) {
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j <= i; ++j) {
            double acc = m[i * p + j];
            for (int k = 0; k < j; ++k) acc -= m[i * p + k] * m[j * p + k];
            if (i == j) {
                if (!(acc > 0.0)) return false;
                m[i * p + i] = std::sqrt(acc);
            } else {
                m[i * p + j] = acc / m[j * p + j];
            }
        }
    }
    return true;
}

// tr(S_h S_e^-1) with S_e = L L^T: solve L W = S_h, L^T V = W, take tr V.
double trace_solve(int p, const std::vector<double>& l, const std::vector<double>& sh) {
    std::vector<double> w(p * p);
    for (int col = 0; col < p; ++col) {
        for (int i = 0; i < p; ++i) {
            double acc = sh[i * p + col];
            for (int k = 0; k < i; ++k) acc -= l[i * p + k] * w[k * p + col];
            w[i * p + col] = acc / l[i * p + i];
        }
    }
    double tr = 0.0;
    for (int col = 0; col < p; ++col) {
        for (int i = p - 1; i >= 0; --i) {
            double acc = w[i * p + col];
            for (int k = i + 1; k < p; ++k) acc -= l[k * p + i] * w[k * p + col];
            w[i * p + col] = acc / l[i * p + i];
        }
        tr += w[col * p + col];
    }
    return tr;
}

}  // namespace

EmpiricalQuantiles sample_correlation(const SimulationPlan& plan) {
    const auto* stat = std::get_if<CorrelationStatistic>(&plan.statistic);
    if (stat == nullptr) throw DomainError("sample_correlation: plan statistic is not Correlation");
    if (stat->n < 2) throw DomainError("sample_correlation: n must be >= 2");
    int n = stat->n;
    double sqrt_n_eff = std::sqrt(static_cast<double>(n) - 2.5);
    auto body = [n, sqrt_n_eff](RandomStream& rng) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (int k = 0; k < n; ++k) {
            double x = rng.next_normal();
            double y = rng.next_normal();
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        double cxx = sxx - sx * sx / n;
        double cyy = syy - sy * sy / n;
        double cxy = sxy - sx * sy / n;
        return sqrt_n_eff * cxy / std::sqrt(cxx * cyy);
    };
    return {run_streams(plan, body), plan};
}

EmpiricalQuantiles sample_t0sq(const SimulationPlan& plan) {
    const auto* stat = std::get_if<HotellingT0sqStatistic>(&plan.statistic);
    if (stat == nullptr) throw DomainError("sample_t0sq: plan statistic is not HotellingT0sq");
    int p = stat->p, q = stat->q, n = stat->n;
    if (p < 1 || q < 1) throw DomainError("sample_t0sq: p, q must be >= 1");
    if (n < p) throw DomainError("sample_t0sq: requires n >= p");
    auto body = [p, q, n](RandomStream& rng) {
        std::vector<double> a(p * p), sh(p * p), se(p * p);
        for (int attempt = 0;; ++attempt) {
            if (q >= p) {
                bartlett_factor(rng, p, q, a);
                aat(p, a, sh);
            } else {
                // Sum of q standard-normal outer products.
                std::fill(sh.begin(), sh.end(), 0.0);
                std::vector<double> z(p);
                for (int k = 0; k < q; ++k) {
                    for (int i = 0; i < p; ++i) z[i] = rng.next_normal();
                    for (int i = 0; i < p; ++i)
                        for (int j = 0; j < p; ++j) sh[i * p + j] += z[i] * z[j];
                }
            }
            bartlett_factor(rng, p, n, a);
            aat(p, a, se);
            if (cholesky(p, se)) break;
            if (attempt >= 1) throw NumericalError("sample_t0sq: S_e factorization failed twice");
        }
        return static_cast<double>(n) * trace_solve(p, se, sh);
    };
    return {run_streams(plan, body), plan};
}

double exact_correlation_cdf(int n, double x) {
    if (n < 5) throw DomainError("exact_correlation_cdf: requires n >= 5");
    double sqrt_n_eff = std::sqrt(static_cast<double>(n) - 2.5);
    double r = x / sqrt_n_eff;
    if (r <= -1.0) return 0.0;
    if (r >= 1.0) return 1.0;
    // Null law: R^2 ~ Beta(1/2, (n-2)/2), density of R proportional to
    // (1 - r^2)^{(n-4)/2}, symmetric about 0.
    double half_mass = 0.5 * special::beta_i(0.5, 0.5 * (n - 2), r * r);
    return r >= 0.0 ? 0.5 + half_mass : 0.5 - half_mass;
}

double empirical_upper_quantile(const EmpiricalQuantiles& samples, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("empirical_upper_quantile: alpha must be in (0,1)");
    const auto& s = samples.sorted_samples;
    if (s.empty()) throw DomainError("empirical_upper_quantile: no samples");
    auto rank = static_cast<std::uint64_t>(std::ceil((1.0 - alpha) * static_cast<double>(s.size())));
    rank = std::clamp<std::uint64_t>(rank, 1, s.size());
    return s[rank - 1];
}

double sup_norm_gap(const EdgeworthModel& model, const std::function<double(double)>& oracle_cdf,
                    double grid_lo, double grid_hi, int grid_points) {
    double lo = grid_lo, hi = grid_hi;
    double best = 0.0, best_x = lo;
    for (int round = 0; round < 6; ++round) {
        int pts = round == 0 ? grid_points : 65;
        double arg = best_x;
        for (int i = 0; i < pts; ++i) {
            double x = lo + (hi - lo) * i / (pts - 1);
            double gap = std::fabs(oracle_cdf(x) - approx_cdf(model, x));
            if (gap > best) {
                best = gap;
                arg = x;
            }
        }
        // Refine inside the cell neighborhood of the running arg-max.
        double h = (hi - lo) / (pts - 1);
        lo = arg - h;
        hi = arg + h;
        best_x = arg;
    }
    return best;
}

double sup_norm_gap_empirical(const EmpiricalQuantiles& samples,
                              const std::function<double(double)>& reference_cdf) {
    const auto& s = samples.sorted_samples;
    double m = static_cast<double>(s.size());
    double best = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double f = reference_cdf(s[i]);
        best = std::max(best, std::fabs(f - static_cast<double>(i) / m));
        best = std::max(best, std::fabs(f - static_cast<double>(i + 1) / m));
    }
    return best;
}

double dkw_epsilon(std::uint64_t count, double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("dkw_epsilon: confidence must be in (0,1)");
    double delta = 1.0 - confidence;
    return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(count)));
}

VerificationVerdict verify_enclosure(const CertifiedQuantile& cert, const EmpiricalQuantiles& samples,
                                     double confidence) {
    VerificationVerdict v;
    double eps = dkw_epsilon(samples.sorted_samples.size(), confidence);
    double q = empirical_upper_quantile(samples, cert.alpha);
    v.empirical_quantile = q;
    // DKW band on the CDF translates to a quantile margin through the
    // neighboring order statistics.
    double a_lo = cert.alpha + eps;  // lower quantile edge
    double a_hi = cert.alpha - eps;
    double q_lo = a_lo < 1.0 ? empirical_upper_quantile(samples, std::min(a_lo, 1.0 - 1e-12))
                             : samples.sorted_samples.front();
    double q_hi = a_hi > 0.0 ? empirical_upper_quantile(samples, std::max(a_hi, 1e-12))
                             : samples.sorted_samples.back();
    v.dkw_margin = std::max(q - q_lo, q_hi - q);
    double lo = cert.interval.lo - v.dkw_margin;
    double hi = cert.interval.hi + v.dkw_margin;
    v.inside = (q >= lo && q <= hi);
    v.slack = std::min(q - lo, hi - q);
    if (cert.interval.lo >= q - v.dkw_margin && cert.interval.hi <= q + v.dkw_margin) {
        // The sampling uncertainty swallows the whole certificate.
        v.flags.push_back("inconclusive");
    }
    return v;
}

namespace {

struct DumpHeader {
    char magic[4];
    std::uint32_t version;
    std::uint32_t stat_tag;  // 0 correlation, 1 t0sq
    std::uint32_t p, q, n;
    std::uint64_t seed;
};
static_assert(sizeof(DumpHeader) == 32);

}  // namespace

void write_sample_dump(const std::string& path, const EmpiricalQuantiles& samples) {
    DumpHeader h{};
    std::memcpy(h.magic, "CFMC", 4);
    h.version = 1;
    if (const auto* c = std::get_if<CorrelationStatistic>(&samples.plan.statistic)) {
        h.stat_tag = 0;
        h.n = static_cast<std::uint32_t>(c->n);
    } else {
        const auto& t = std::get<HotellingT0sqStatistic>(samples.plan.statistic);
        h.stat_tag = 1;
        h.p = static_cast<std::uint32_t>(t.p);
        h.q = static_cast<std::uint32_t>(t.q);
        h.n = static_cast<std::uint32_t>(t.n);
    }
    h.seed = samples.plan.seed;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalError("write_sample_dump: cannot open " + path);
    out.write(reinterpret_cast<const char*>(&h), sizeof h);
    out.write(reinterpret_cast<const char*>(samples.sorted_samples.data()),
              static_cast<std::streamsize>(samples.sorted_samples.size() * sizeof(double)));
}

EmpiricalQuantiles read_sample_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw NumericalError("read_sample_dump: cannot open " + path);
    auto size = static_cast<std::uint64_t>(in.tellg());
    if (size < sizeof(DumpHeader)) throw ConstraintError("read_sample_dump: truncated file");
    in.seekg(0);
    DumpHeader h{};
    in.read(reinterpret_cast<char*>(&h), sizeof h);
    if (std::memcmp(h.magic, "CFMC", 4) != 0) throw ConstraintError("read_sample_dump: bad magic");
    if (h.version != 1) throw ConstraintError("read_sample_dump: unsupported version");
    EmpiricalQuantiles out;
    if (h.stat_tag == 0) {
        out.plan.statistic = CorrelationStatistic{static_cast<int>(h.n)};
    } else if (h.stat_tag == 1) {
        out.plan.statistic =
            HotellingT0sqStatistic{static_cast<int>(h.p), static_cast<int>(h.q), static_cast<int>(h.n)};
    } else {
        throw ConstraintError("read_sample_dump: unknown statistic tag");
    }
    out.plan.seed = h.seed;
    std::uint64_t count = (size - sizeof(DumpHeader)) / sizeof(double);
    out.plan.sample_count = count;
    out.sorted_samples.resize(count);
    in.read(reinterpret_cast<char*>(out.sorted_samples.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    return out;
}

void to_json(nlohmann::json& j, const VerificationVerdict& verdict) {
    j = nlohmann::json{{"inside", verdict.inside},
                       {"slack", verdict.slack},
                       {"dkw_margin", verdict.dkw_margin},
                       {"empirical_quantile", verdict.empirical_quantile},
                       {"flags", verdict.flags}};
}

}  // namespace cfcert
