#include "cfcert/edgeworth.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "cfcert/errors.hpp"

namespace cfcert {

double EdgeworthModel::remainder_bound() const {
    return remainder_const * std::pow(eps, eps_order);
}

void EdgeworthModel::validate() const {
    if (!(eps > 0.0)) throw ConstraintError("EdgeworthModel: eps must be > 0");
    if (!(remainder_const > 0.0)) throw ConstraintError("EdgeworthModel: remainder_const must be > 0");
    if (eps_order != 1 && eps_order != 2) throw ConstraintError("EdgeworthModel: eps_order must be 1 or 2");
    if (!(remainder_bound() < 0.5)) {
        throw InfeasibleError("EdgeworthModel: remainder bound d = " + std::to_string(remainder_bound()) +
                              " >= 1/2 leaves no admissible alpha");
    }
    if (const auto* df = std::get_if<DensityFactor>(&correction)) {
        if (df->poly.degree() > 8) throw ConstraintError("DensityFactor: polynomial degree > 8");
    } else if (const auto* mix = std::get_if<ChiSquaredMixture>(&correction)) {
        if (mix->base_dof < 1) throw ConstraintError("ChiSquaredMixture: base_dof must be >= 1");
        double s = std::accumulate(mix->mix_coeffs.begin(), mix->mix_coeffs.end(), 0.0);
        if (std::fabs(s) > 1e-15) {
            throw ConstraintError("ChiSquaredMixture: coefficients must sum to zero, got " + std::to_string(s));
        }
    }
}

double approx_cdf(const EdgeworthModel& model, double x) {
    double base_cdf = cdf(model.base, x);
    if (std::holds_alternative<std::monostate>(model.correction)) return base_cdf;
    if (const auto* df = std::get_if<DensityFactor>(&model.correction)) {
        return base_cdf + model.eps * df->poly(x) * density(model.base, x);
    }
    const auto& mix = std::get<ChiSquaredMixture>(model.correction);
    double sum = 0.0;
    for (std::size_t j = 0; j < mix.mix_coeffs.size(); ++j) {
        if (mix.mix_coeffs[j] == 0.0) continue;
        auto gj = LimitDistribution::chi_squared(mix.base_dof + 2 * static_cast<int>(j));
        sum += mix.mix_coeffs[j] * cdf(gj, x);
    }
    return base_cdf + model.eps * mix.scale * sum;
}

DensityFactor mixture_to_density_factor(const ChiSquaredMixture& mixture) {
    double total = std::accumulate(mixture.mix_coeffs.begin(), mixture.mix_coeffs.end(), 0.0);
    if (std::fabs(total) > 1e-15) {
        throw ConstraintError("mixture_to_density_factor: coefficients must sum to zero");
    }
    // G_{q+2j} = G_q - 2 sum_{i=1..j} g_{q+2i} and g_{q+2i} = g_q x^i / (q(q+2)...(q+2i-2)),
    // so with zero-sum coefficients the G_q terms cancel and
    //   scale * sum_j a_j G_{q+2j} = g_q(x) * sum_i [-2 scale (sum_{j>=i} a_j) / prod] x^i.
    std::size_t k = mixture.mix_coeffs.size();
    std::vector<double> poly(k == 0 ? 1 : k, 0.0);
    double prod = 1.0;
    for (std::size_t i = 1; i < k; ++i) {
        prod *= static_cast<double>(mixture.base_dof + 2 * (static_cast<int>(i) - 1));
        double tail = 0.0;
        for (std::size_t j = i; j < k; ++j) tail += mixture.mix_coeffs[j];
        poly[i] = -2.0 * mixture.scale * tail / prod;
    }
    return DensityFactor{Polynomial{std::move(poly)}};
}

Polynomial correction_polynomial(const EdgeworthModel& model) {
    if (const auto* df = std::get_if<DensityFactor>(&model.correction)) return df->poly;
    if (const auto* mix = std::get_if<ChiSquaredMixture>(&model.correction)) {
        return mixture_to_density_factor(*mix).poly;
    }
    return Polynomial{};
}

EdgeworthModel build_hotelling_t0sq_model(int p, int q, int n, double c_pq) {
    if (p < 1 || q < 1) throw DomainError("build_hotelling_t0sq_model: p, q must be >= 1");
    if (n < p) throw DomainError("build_hotelling_t0sq_model: requires n >= p");
    if (!(c_pq > 0.0)) throw DomainError("build_hotelling_t0sq_model: c_pq must be > 0");
    int r = p * q;
    EdgeworthModel m;
    m.base = LimitDistribution::chi_squared(r);
    m.eps = 1.0 / static_cast<double>(n);
    m.eps_order = 2;
    m.correction = ChiSquaredMixture{
        r,
        {static_cast<double>(q - p - 1), static_cast<double>(-2 * q), static_cast<double>(q + p + 1)},
        static_cast<double>(r) / 4.0};
    m.remainder_const = c_pq;
    m.label = "t0sq(p=" + std::to_string(p) + ",q=" + std::to_string(q) + ",n=" + std::to_string(n) + ")";
    m.validate();
    return m;
}

EdgeworthModel build_correlation_model(int n) {
    if (n < 7) throw DomainError("build_correlation_model: requires n >= 7");
    double N = static_cast<double>(n) - 2.5;
    EdgeworthModel m;
    m.base = LimitDistribution::std_normal();
    m.eps = 1.0 / N;
    m.eps_order = 2;
    m.correction = DensityFactor{Polynomial{{0.0, 0.0, 0.0, 0.25}}};  // a1(x) = x^3/4
    m.remainder_const = 2.2;
    m.label = "corr(n=" + std::to_string(n) + ")";
    m.validate();
    return m;
}

void to_json(nlohmann::json& j, const EdgeworthModel& model) {
    j = nlohmann::json{{"label", model.label},
                       {"eps", model.eps},
                       {"eps_order", model.eps_order},
                       {"remainder_const", model.remainder_const}};
    if (model.base.kind == DistKind::StdNormal) {
        j["base"] = {{"kind", "std_normal"}};
    } else {
        j["base"] = {{"kind", "chi_squared"}, {"dof", model.base.dof}};
    }
    if (std::holds_alternative<std::monostate>(model.correction)) {
        j["correction"] = nullptr;
    } else if (const auto* df = std::get_if<DensityFactor>(&model.correction)) {
        j["correction"] = {{"form", "density_factor"}, {"poly", df->poly.coeffs}};
    } else {
        const auto& mix = std::get<ChiSquaredMixture>(model.correction);
        j["correction"] = {{"form", "chi_squared_mixture"},
                           {"base_dof", mix.base_dof},
                           {"mix_coeffs", mix.mix_coeffs},
                           {"scale", mix.scale}};
    }
}

void from_json(const nlohmann::json& j, EdgeworthModel& model) {
    model.label = j.at("label").get<std::string>();
    model.eps = j.at("eps").get<double>();
    model.eps_order = j.at("eps_order").get<int>();
    model.remainder_const = j.at("remainder_const").get<double>();
    const auto& base = j.at("base");
    std::string kind = base.at("kind").get<std::string>();
    if (kind == "std_normal") {
        model.base = LimitDistribution::std_normal();
    } else if (kind == "chi_squared") {
        model.base = LimitDistribution::chi_squared(base.at("dof").get<int>());
    } else {
        throw ConstraintError("model JSON: unknown base kind '" + kind + "'");
    }
    if (!j.contains("correction") || j.at("correction").is_null()) {
        model.correction = std::monostate{};
    } else {
        const auto& c = j.at("correction");
        std::string form = c.at("form").get<std::string>();
        if (form == "density_factor") {
            model.correction = DensityFactor{Polynomial{c.at("poly").get<std::vector<double>>()}};
        } else if (form == "chi_squared_mixture") {
            model.correction = ChiSquaredMixture{c.at("base_dof").get<int>(),
                                                 c.at("mix_coeffs").get<std::vector<double>>(),
                                                 c.at("scale").get<double>()};
        } else {
            throw ConstraintError("model JSON: unknown correction form '" + form + "'");
        }
    }
    model.validate();
}

}  // namespace cfcert
