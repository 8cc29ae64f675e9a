// cfcert: certified Cornish-Fisher quantile tables and Monte Carlo checks.
//
// Subcommands:
//   bound      certified quantiles for an alpha list
//   table      batch wrapper over bound with an alpha grid
//   verify     Monte Carlo enclosure / sup-norm verification
//   transform  tabulate a Bartlett-type transform
//
// Exit codes: 0 ok, 2 usage error, 3 applicability (alpha/domain), 4 verification failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfcert/cf_bounds.hpp"
#include "cfcert/distributions.hpp"
#include "cfcert/edgeworth.hpp"
#include "cfcert/errors.hpp"
#include "cfcert/monte_carlo.hpp"
#include "cfcert/transforms.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using nlohmann::json;

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct OutputTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    json metadata;

    void write_csv(std::ostream& os) const {
        for (auto it = metadata.begin(); it != metadata.end(); ++it) {
            os << "# " << it.key() << ": "
               << (it.value().is_string() ? it.value().get<std::string>() : it.value().dump()) << "\n";
        }
        for (std::size_t i = 0; i < columns.size(); ++i) {
            os << columns[i] << (i + 1 < columns.size() ? "," : "\n");
        }
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                os << format_g17(row[i]) << (i + 1 < row.size() ? "," : "\n");
            }
        }
    }

    void write_json(std::ostream& os) const {
        json j{{"columns", columns}, {"rows", rows}, {"metadata", metadata}};
        os << j.dump(2) << "\n";
    }

    void write(std::ostream& os, const std::string& format) const {
        if (format == "json") write_json(os); else write_csv(os);
    }
};

struct StatisticSpec {
    std::string stat;  // corr | t0sq | custom-json
    int n = 0;
    int p = 0, q = 0;
    double c = 0.0;
    std::string model_path;
};

void add_stat_options(CLI::App* cmd, StatisticSpec& spec) {
    cmd->add_option("--stat", spec.stat, "Statistic: corr | t0sq | custom-json")->required();
    cmd->add_option("--n", spec.n, "Sample size n");
    cmd->add_option("--p", spec.p, "Dimension p (t0sq)");
    cmd->add_option("--q", spec.q, "Hypothesis dof q (t0sq)");
    cmd->add_option("--c", spec.c, "Remainder constant c_pq (t0sq; no default)");
    cmd->add_option("--model", spec.model_path, "Model JSON file (overrides the built-in model)");
}

cfcert::EdgeworthModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cfcert::DomainError("cannot open model file " + path);
    return json::parse(in).get<cfcert::EdgeworthModel>();
}

cfcert::EdgeworthModel build_model(const StatisticSpec& spec) {
    // An explicit model file overrides the built-in construction; the
    // statistic choice still drives sampling and transforms.
    if (!spec.model_path.empty()) return load_model_file(spec.model_path);
    if (spec.stat == "corr") {
        if (spec.n < 7) throw cfcert::DomainError("corr: n >= 7 required");
        return cfcert::build_correlation_model(spec.n);
    }
    if (spec.stat == "t0sq") {
        if (spec.p < 1 || spec.q < 1 || spec.n < 1) {
            throw cfcert::DomainError("t0sq: --p, --q, --n required and positive");
        }
        if (!(spec.c > 0.0)) throw cfcert::DomainError("t0sq: --c (remainder constant) required and > 0");
        return cfcert::build_hotelling_t0sq_model(spec.p, spec.q, spec.n, spec.c);
    }
    if (spec.stat == "custom-json") {
        throw cfcert::DomainError("custom-json: --model file required");
    }
    throw cfcert::DomainError("unknown statistic '" + spec.stat + "'");
}

// Correction stripped, remainder kept: the model for Pr{T(U) <= x}.
cfcert::EdgeworthModel transformed_model_of(const cfcert::EdgeworthModel& model) {
    cfcert::EdgeworthModel t = model;
    t.correction = std::monostate{};
    return t;
}

std::optional<cfcert::MonotoneTransform> build_transform(const StatisticSpec& spec) {
    if (spec.stat == "corr") {
        return cfcert::make_correlation_cubic(static_cast<double>(spec.n) - 2.5);
    }
    if (spec.stat == "t0sq") {
        return cfcert::build_hotelling_transform(spec.p, spec.q, spec.n);
    }
    return std::nullopt;
}

cfcert::CertifiedQuantile certify(const cfcert::EdgeworthModel& model, const StatisticSpec& spec,
                                  int theorem, double alpha) {
    if (theorem == 1) return cfcert::theorem1_certify(model, alpha);
    if (theorem == 2) return cfcert::theorem2_certify(transformed_model_of(model), alpha);
    auto transform = build_transform(spec);
    if (!transform) {
        throw cfcert::DomainError("theorem 3 requires a built-in statistic with a Bartlett transform");
    }
    return cfcert::theorem3_certify(transformed_model_of(model), *transform, alpha);
}

json base_metadata(const cfcert::EdgeworthModel& model, int argc, char** argv, bool timestamp) {
    std::ostringstream cmd;
    for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << argv[i];
    json meta{{"model", model}, {"command_line", cmd.str()}, {"tool_version", kVersion}};
    if (timestamp) meta["timestamp"] = iso_timestamp();
    return meta;
}

OutputTable bound_table(const cfcert::EdgeworthModel& model, const StatisticSpec& spec, int theorem,
                        const std::vector<double>& alphas, bool lower_tail) {
    OutputTable table;
    table.columns = {"alpha",       "u_alpha",     "bracket_lo", "bracket_hi", "estimate",
                     "radius",      "interval_lo", "interval_hi", "window_lo",  "window_hi"};
    for (double a : alphas) {
        double alpha = lower_tail ? 1.0 - a : a;
        auto cert = certify(model, spec, theorem, alpha);
        auto bracket = cfcert::theorem1_bracket(theorem == 1 ? model : transformed_model_of(model), alpha);
        double u_alpha = cfcert::quantile(model.base, 1.0 - alpha);
        table.rows.push_back({alpha, u_alpha, bracket.lo, bracket.hi, cert.estimate, cert.radius,
                              cert.interval.lo, cert.interval.hi, cert.window.lo, cert.window.hi});
    }
    return table;
}

void emit(const OutputTable& table, const std::string& out_path, const std::string& format) {
    if (out_path.empty()) {
        table.write(std::cout, format);
    } else {
        std::ofstream os(out_path);
        if (!os) throw cfcert::DomainError("cannot open output file " + out_path);
        table.write(os, format);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Certified Cornish-Fisher quantile approximations"};
    app.require_subcommand(1);

    StatisticSpec spec;
    std::vector<double> alphas;
    int theorem = 1;
    bool lower_tail = false, no_timestamp = false, check = false, use_exact = false;
    std::string format = "csv", out_path, direction = "forward", dump_path;
    double alpha_start = 0.0, alpha_stop = 0.0, alpha_step = 0.0;
    std::uint64_t samples = 1000000, seed = 0;
    unsigned streams = 16;
    double confidence = 0.99;
    std::vector<double> values;

    auto* bound = app.add_subcommand("bound", "Certified quantiles for an alpha list");
    add_stat_options(bound, spec);
    bound->add_option("--alpha", alphas, "Upper-tail probabilities")->required();
    bound->add_option("--theorem", theorem, "Certificate theorem: 1, 2 or 3")
        ->check(CLI::IsMember({1, 2, 3}));
    bound->add_flag("--lower-tail", lower_tail, "Interpret --alpha as lower-tail probabilities");
    bound->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    bound->add_option("--out", out_path, "Output path (default stdout)");
    bound->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp metadata field");

    auto* tab = app.add_subcommand("table", "Batch certified quantile table over an alpha grid");
    add_stat_options(tab, spec);
    tab->add_option("--alpha", alphas, "Explicit alpha list");
    tab->add_option("--alpha-start", alpha_start);
    tab->add_option("--alpha-stop", alpha_stop);
    tab->add_option("--alpha-step", alpha_step);
    tab->add_option("--theorem", theorem)->check(CLI::IsMember({1, 2, 3}));
    tab->add_flag("--lower-tail", lower_tail);
    tab->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    tab->add_option("--out", out_path);
    tab->add_flag("--no-timestamp", no_timestamp);

    auto* verify = app.add_subcommand("verify", "Monte Carlo verification of certificates");
    add_stat_options(verify, spec);
    verify->add_option("--alpha", alphas, "Upper-tail probabilities")->required();
    verify->add_option("--theorem", theorem)->check(CLI::IsMember({1, 2, 3}));
    verify->add_option("--samples", samples, "Monte Carlo sample count");
    verify->add_option("--seed", seed, "RNG seed");
    verify->add_option("--streams", streams, "Substream count");
    verify->add_option("--confidence", confidence, "DKW confidence level");
    verify->add_flag("--exact", use_exact, "Also check the sup-norm gap against the exact oracle (corr only)");
    verify->add_option("--dump-samples", dump_path, "Write the sample dump to this path");
    verify->add_flag("--no-timestamp", no_timestamp);

    auto* trans = app.add_subcommand("transform", "Tabulate a Bartlett-type transform");
    add_stat_options(trans, spec);
    trans->add_option("--values", values, "Input values")->required();
    trans->add_option("--direction", direction)->check(CLI::IsMember({"forward", "inverse", "derivative"}));
    trans->add_flag("--check", check, "Append a round-trip residual column");
    trans->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    trans->add_option("--out", out_path);
    trans->add_flag("--no-timestamp", no_timestamp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (bound->parsed() || tab->parsed()) {
            if (tab->parsed() && alphas.empty()) {
                if (!(alpha_step > 0.0) || !(alpha_start > 0.0) || !(alpha_stop >= alpha_start)) {
                    std::cerr << "table: provide --alpha or a positive --alpha-start/--alpha-stop/--alpha-step grid\n";
                    return 2;
                }
                for (double a = alpha_start; a <= alpha_stop + 1e-15; a += alpha_step) alphas.push_back(a);
            }
            if (alphas.empty()) {
                std::cerr << "empty alpha list\n";
                return 2;
            }
            auto model = build_model(spec);
            auto table = bound_table(model, spec, theorem, alphas, lower_tail);
            table.metadata = base_metadata(model, argc, argv, !no_timestamp);
            table.metadata["theorem"] = "T" + std::to_string(theorem);
            emit(table, out_path, format);
            return 0;
        }

        if (verify->parsed()) {
            if (theorem == 1 && !verify->count("--theorem")) theorem = 3;
            auto model = build_model(spec);
            cfcert::SimulationPlan plan;
            if (spec.stat == "corr") {
                plan.statistic = cfcert::CorrelationStatistic{spec.n};
            } else if (spec.stat == "t0sq") {
                plan.statistic = cfcert::HotellingT0sqStatistic{spec.p, spec.q, spec.n};
            } else {
                std::cerr << "verify: --stat must be corr or t0sq\n";
                return 2;
            }
            plan.sample_count = samples;
            plan.seed = seed;
            plan.stream_count = streams;
            auto draws = spec.stat == "corr" ? cfcert::sample_correlation(plan) : cfcert::sample_t0sq(plan);
            if (!dump_path.empty()) cfcert::write_sample_dump(dump_path, draws);

            json report;
            report["metadata"] = base_metadata(model, argc, argv, !no_timestamp);
            report["confidence"] = confidence;
            bool failed = false;
            for (double alpha : alphas) {
                auto cert = certify(model, spec, theorem, alpha);
                auto verdict = cfcert::verify_enclosure(cert, draws, confidence);
                json row{{"alpha", alpha}, {"certificate", cert}, {"verdict", verdict}};
                report["enclosures"].push_back(row);
                bool inconclusive = false;
                for (const auto& f : verdict.flags) inconclusive |= (f == "inconclusive");
                if (!verdict.inside && !inconclusive) failed = true;
            }
            if (use_exact) {
                if (spec.stat != "corr") {
                    std::cerr << "--exact is only available for the correlation statistic\n";
                    return 2;
                }
                int n = spec.n;
                double big_n = n - 2.5;
                double gap = cfcert::sup_norm_gap(
                    model, [n](double x) { return cfcert::exact_correlation_cdf(n, x); }, -8.0, 8.0, 4096);
                double bound_val = 2.2 / (big_n * big_n);
                report["exact_gap"] = {{"gap", gap}, {"bound", bound_val}, {"within_bound", gap <= bound_val}};
                if (gap > bound_val) failed = true;
            }
            std::ostream* os = &std::cout;
            std::ofstream file;
            if (!out_path.empty()) {
                file.open(out_path);
                os = &file;
            }
            *os << report.dump(2) << "\n";
            return failed ? 4 : 0;
        }

        if (trans->parsed()) {
            auto transform = build_transform(spec);
            if (!transform) {
                std::cerr << "transform: --stat must be corr or t0sq\n";
                return 2;
            }
            OutputTable table;
            table.columns = {"input", direction};
            if (check) table.columns.push_back("roundtrip_residual");
            for (double v : values) {
                double y;
                if (direction == "forward") y = cfcert::forward(*transform, v);
                else if (direction == "inverse") y = cfcert::inverse(*transform, v);
                else y = cfcert::inverse_derivative(*transform, v);
                std::vector<double> row{v, y};
                if (check) {
                    double z = cfcert::inverse(*transform, cfcert::forward(*transform, v));
                    row.push_back(std::fabs(z - v));
                }
                table.rows.push_back(std::move(row));
            }
            json tj;
            cfcert::to_json(tj, *transform);
            table.metadata = json{{"transform", tj}, {"tool_version", kVersion}};
            if (!no_timestamp) table.metadata["timestamp"] = iso_timestamp();
            emit(table, out_path, format);
            return 0;
        }
    } catch (const cfcert::AlphaOutOfRange& e) {
        std::cerr << "applicability error: " << e.what() << "\n";
        return 3;
    } catch (const cfcert::InfeasibleError& e) {
        std::cerr << "applicability error: " << e.what() << "\n";
        return 3;
    } catch (const cfcert::TransformDomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const cfcert::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
