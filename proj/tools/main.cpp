#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lowlying/lowlying.h"
#include "run_config.hpp"

using json = nlohmann::ordered_json;
using lowlying::cli::RunConfig;
using lowlying::cli::UsageError;

namespace {

constexpr int exit_usage = 64;
constexpr int exit_internal = 70;

struct ApiFailure : std::runtime_error {
    ApiFailure(int c, const std::string& what) : std::runtime_error(what), code(c) {}
    int code;
};

struct ContextDeleter {
    void operator()(ll_context* c) const { ll_context_destroy(c); }
};
struct WeightDeleter {
    void operator()(ll_weight* w) const { ll_weight_destroy(w); }
};
struct TestfnDeleter {
    void operator()(ll_testfn* f) const { ll_testfn_destroy(f); }
};
struct TableDeleter {
    void operator()(ll_table* t) const { ll_table_destroy(t); }
};
using Context = std::unique_ptr<ll_context, ContextDeleter>;
using Weight = std::unique_ptr<ll_weight, WeightDeleter>;
using Testfn = std::unique_ptr<ll_testfn, TestfnDeleter>;
using Table = std::unique_ptr<ll_table, TableDeleter>;

void check(ll_context* ctx, int status) {
    if (status != LL_OK) throw ApiFailure(status, ll_last_error(ctx));
}

struct Report {
    std::vector<std::string> columns;
    std::vector<json> rows;
    json summary = json::object();
    bool passed = true;  // outcome of the property the subcommand checks, if any

    void add(json row) {
        if (columns.empty())
            for (const auto& item : row.items()) columns.push_back(item.key());
        rows.push_back(std::move(row));
    }
};

Weight make_weight(ll_context* ctx, const RunConfig& cfg) {
    ll_weight* w = nullptr;
    check(ctx, ll_weight_create(ctx, cfg.text("h_id").c_str(), cfg.real("h_width"), &w));
    return Weight(w);
}

Testfn make_testfn(ll_context* ctx, const RunConfig& cfg) {
    ll_testfn* f = nullptr;
    check(ctx, ll_testfn_create(ctx, cfg.text("phi_id").c_str(), cfg.real("sigma"), &f));
    return Testfn(f);
}

int form_kind(const RunConfig& cfg) {
    const auto& k = cfg.text("kind");
    if (k == "maass") return 0;
    if (k == "holomorphic") return 1;
    throw UsageError("kind must be maass or holomorphic");
}

// ---------------------------------------------------------------------------

Report run_density(ll_context* ctx, const RunConfig& cfg) {
    const auto h = make_weight(ctx, cfg);
    const auto phi = make_testfn(ctx, cfg);
    Report rep;
    for (auto N : cfg.integers("N_list")) {
        ll_density_report r{};
        check(ctx, ll_density(ctx, h.get(), phi.get(), N, cfg.integer("c_max_multiplier") * N, &r));
        rep.add({{"N", r.N}, {"sigma", r.sigma}, {"h_id", cfg.text("h_id")}, {"phi_id", cfg.text("phi_id")},
                 {"c_max", r.c_max}, {"main_terms", r.main_terms}, {"kloosterman_term", r.kloosterman_term},
                 {"eisenstein_term", r.eisenstein_term}, {"omega_star", r.omega_star},
                 {"density_value", r.density_value}, {"ks_prediction", r.ks_prediction}, {"deviation", r.deviation},
                 {"tail_bound", r.tail_bound}, {"prime_powers", r.prime_powers}});
    }
    return rep;
}

Report run_kuznetsov(ll_context* ctx, const RunConfig& cfg) {
    const auto h = make_weight(ctx, cfg);
    const auto m = cfg.integer("m"), n = cfg.integer("n");
    Report rep;
    for (auto N : cfg.integers("N_list")) {
        const auto c_max = cfg.integer("c_max_multiplier") * N;
        ll_kuznetsov_report r{};
        check(ctx, ll_kuznetsov_check(ctx, h.get(), m, n, N, c_max, &r));
        const double gap = std::abs(r.omega_geometric - r.omega_integral);
        rep.add({{"N", N}, {"m", m}, {"n", n}, {"c_max", c_max}, {"diagonal", r.diagonal}, {"eisenstein", r.eisenstein},
                 {"kloosterman", r.kloosterman}, {"tail_bound", r.tail_bound}, {"total", r.total},
                 {"level_one_total", r.level_one_total}, {"delta_star", r.delta_star},
                 {"omega_geometric", r.omega_geometric}, {"omega_integral", r.omega_integral}, {"omega_gap", gap},
                 {"N_times_omega_gap", static_cast<double>(N) * gap}});
    }
    return rep;
}

Report run_hplus(ll_context* ctx, const RunConfig& cfg) {
    const auto h = make_weight(ctx, cfg);
    double h_re = 0.0, h_im = 0.0;
    check(ctx, ll_weight_eval(h.get(), 0.0, -0.5, &h_re, &h_im));
    Report rep;
    double slope = 0.0;
    for (double x : cfg.reals("x_list")) {
        ll_hplus_report r{};
        check(ctx, ll_hplus(ctx, h.get(), x, &r));
        slope = r.slope_constant;
        // leading term of the residue series: x h(-i/2) / pi
        rep.add({{"x", x}, {"integral", r.integral}, {"series", r.series}, {"evaluator", r.evaluator},
                 {"integral_minus_series", std::abs(r.integral - r.series)},
                 {"leading_ratio", r.evaluator / (x * h_re / std::numbers::pi)}});
    }
    rep.summary["slope_constant"] = slope;
    return rep;
}

Report run_mellin(ll_context* ctx, const RunConfig& cfg) {
    const auto h = make_weight(ctx, cfg);
    const auto phi = make_testfn(ctx, cfg);
    const int kind = form_kind(cfg);
    const int k = static_cast<int>(cfg.integer("k"));
    const double sigma = cfg.real("sigma");
    const auto& mode = cfg.text("mode");
    if (mode != "psi" && mode != "invert") throw UsageError("mode must be psi or invert");
    Report rep;
    double worst = 0.0;
    for (auto N : cfg.integers("N_list")) {
        auto cs = cfg.reals("c_list");
        if (cs.empty()) cs.push_back(static_cast<double>(N));
        for (double c : cs) {
            const ll_mellin_shape shape{kind, k, static_cast<double>(N), c};
            if (mode == "invert") {
                const double t_max = cfg.real("t_max");
                for (double x : cfg.reals("x_list")) {
                    double inv = 0.0, target = 0.0;
                    check(ctx, ll_mellin_invert(ctx, h.get(), phi.get(), &shape, x, t_max,
                                                static_cast<int>(4 * t_max), &inv, &target));
                    worst = std::max(worst, std::abs(inv - target));
                    rep.add({{"N", N}, {"c", c}, {"x", x}, {"inverted", inv}, {"target", target},
                             {"error", std::abs(inv - target)}});
                }
                continue;
            }
            for (double re : cfg.reals("re_list"))
                for (double im : cfg.reals("im_list")) {
                    double pr = 0.0, pi = 0.0;
                    check(ctx, ll_mellin(ctx, h.get(), phi.get(), &shape, re, im, &pr, &pi));
                    const double shift = kind == 0 ? 0.5 : (k - 1) / 2.0;
                    const double c_power = kind == 0 ? c : std::pow(c, k - 1);
                    const double s_abs = std::abs(std::complex<double>(re, im));
                    const double bound = std::pow(static_cast<double>(N), sigma * std::abs(re + shift)) /
                                         ((s_abs + 1.0) * (s_abs + 1.0) * c_power);
                    const double mag = std::hypot(pr, pi);
                    worst = std::max(worst, mag / bound);
                    rep.add({{"N", N}, {"c", c}, {"re", re}, {"im", im}, {"psi_re", pr}, {"psi_im", pi},
                             {"abs", mag}, {"bound_shape", bound}, {"ratio", mag / bound}});
                }
        }
    }
    rep.summary[mode == "invert" ? "max_error" : "max_ratio"] = worst;
    return rep;
}

Report run_hb(ll_context* ctx, const RunConfig& cfg) {
    ll_hb_report r{};
    const auto z = cfg.integer("z"), n_max = cfg.integer("nmax");
    const int K = static_cast<int>(cfg.integer("K"));
    check(ctx, ll_hb_verify(ctx, n_max, z, K, &r));
    Report rep;
    rep.add({{"z", z}, {"K", K}, {"n_max", n_max}, {"max_residual", r.max_residual}, {"worst_n", r.worst_n},
             {"integer_part_is_moebius", r.integer_part_is_moebius != 0}});
    rep.passed = r.max_residual <= cfg.real("tolerance") && r.integer_part_is_moebius;
    return rep;
}

Report run_split(ll_context* ctx, const RunConfig& cfg) {
    const double eps = cfg.real("epsilon");
    const int grid = static_cast<int>(cfg.integer("grid"));
    const int k = static_cast<int>(cfg.integer("k"));
    ll_split_summary s{};
    Report rep;
    if (cfg.flag("exhaustive")) {
        const int active = static_cast<int>(cfg.integer("max_active"));
        check(ctx, ll_split_exhaustive(ctx, grid, eps, active, k, &s));
        rep.add({{"mode", "exhaustive"}, {"grid", grid}, {"epsilon", eps}, {"k", k}, {"max_active", active},
                 {"tuples", s.tuples}, {"greedy_failures", s.greedy_failures},
                 {"invalid_witnesses", s.invalid_witnesses}, {"oracle_failures", s.oracle_failures},
                 {"case_a", s.case_a}, {"case_b", s.case_b}});
        rep.passed = s.greedy_failures == 0 && s.invalid_witnesses == 0 && s.oracle_failures == 0;
    } else {
        const auto count = static_cast<std::uint64_t>(cfg.integer("count"));
        check(ctx, ll_split_random(ctx, count, eps, cfg.seed(), grid, k, &s));
        rep.add({{"mode", "random"}, {"grid", grid}, {"epsilon", eps}, {"k", k}, {"seed", cfg.seed()},
                 {"tuples", s.tuples}, {"greedy_failures", s.greedy_failures},
                 {"invalid_witnesses", s.invalid_witnesses}});
        rep.passed = s.greedy_failures == 0 && s.invalid_witnesses == 0;
    }
    if (k > 0) {
        double theta = 0.0;
        check(ctx, ll_theta_k(ctx, k, &theta));
        rep.summary["theta_k"] = theta;
    }
    rep.summary["failures"] = s.greedy_failures + s.invalid_witnesses + s.oracle_failures;
    return rep;
}

Report run_lsieve(ll_context* ctx, const RunConfig& cfg) {
    ll_lsieve_summary s{};
    const auto trials = static_cast<std::uint64_t>(cfg.integer("trials"));
    check(ctx, ll_lsieve_sweep(ctx, trials, cfg.integer("d_max"), cfg.integer("X_max"), cfg.seed(), &s));
    Report rep;
    rep.add({{"trials", s.trials}, {"d_max", cfg.integer("d_max")}, {"X_max", cfg.integer("X_max")},
             {"seed", cfg.seed()}, {"violations", s.violations}, {"max_ratio", s.max_ratio}});
    rep.passed = s.violations == 0;
    return rep;
}

Report run_fourth_moment(ll_context* ctx, const RunConfig& cfg) {
    const std::map<std::string, int> kinds = {{"one", 0}, {"moebius", 1}, {"log", 2}};
    const auto kind = kinds.find(cfg.text("coef"));
    if (kind == kinds.end()) throw UsageError("coef must be one, moebius or log");
    Report rep;
    double worst = 0.0;
    for (auto d : cfg.integers("d_list"))
        for (auto X : cfg.integers("X_list")) {
            ll_fourth_moment_report r{};
            check(ctx, ll_fourth_moment(ctx, d, X, kind->second, cfg.real("t_max"), cfg.real("panel_width"),
                                        cfg.real("log_power"), &r));
            worst = std::max(worst, r.ratio);
            rep.add({{"d", d}, {"X", X}, {"coef", kind->first}, {"lhs", r.lhs}, {"ratio", r.ratio},
                     {"tail_bound", r.tail_bound}});
        }
    rep.summary["max_ratio"] = worst;
    return rep;
}

Report run_grand_density(ll_context* ctx, const RunConfig& cfg) {
    ll_grand_density_report r{};
    check(ctx, ll_grand_density(ctx, cfg.integer("Q"), cfg.integer("k"), cfg.real("T"), cfg.real("beta"),
                                cfg.real("log_power"), &r));
    Report rep;
    rep.add({{"Q", cfg.integer("Q")}, {"k", cfg.integer("k")}, {"T", cfg.real("T")}, {"beta", cfg.real("beta")},
             {"lhs", r.lhs}, {"rhs", r.rhs}, {"characters", r.characters}, {"line_count", r.line_count},
             {"within_bound", static_cast<double>(r.lhs) <= r.rhs}});
    return rep;
}

Report run_zeros(ll_context* ctx, const RunConfig& cfg) {
    Report rep;
    double worst = 0.0;
    for (auto q : cfg.integers("q_list")) {
        ll_table* raw = nullptr;
        check(ctx, ll_characters(ctx, q, cfg.flag("primitive_only") ? 1 : 0, &raw));
        const Table chars(raw);
        for (size_t i = 0; i < ll_table_rows(chars.get()); ++i) {
            const auto index = std::stoull(ll_table_cell(chars.get(), i, 1));
            ll_zero_report z{};
            check(ctx, ll_zero_count(ctx, q, index, cfg.real("beta"), cfg.real("T"), &z));
            double residual = 0.0;
            check(ctx, ll_fe_residual(ctx, q, index, cfg.real("s_re"), cfg.real("s_im"), &residual));
            worst = std::max(worst, residual);
            rep.add({{"q", q}, {"index", index}, {"conductor", std::stoll(ll_table_cell(chars.get(), i, 2))},
                     {"parity", ll_table_cell(chars.get(), i, 4)}, {"box_count", z.box_count},
                     {"line_count", z.line_count}, {"line_box_disagree", z.line_box_disagree != 0},
                     {"final_step", z.final_step}, {"fe_residual", residual}});
        }
    }
    rep.summary["max_fe_residual"] = worst;
    return rep;
}

Report run_fetch(ll_context* ctx, const RunConfig& cfg) {
    ll_table* raw = nullptr;
    check(ctx, ll_fetch(ctx, form_kind(cfg), cfg.integer("level"), cfg.integer("count"), cfg.integer("n_max"), &raw));
    const Table t(raw);
    Report rep;
    for (size_t c = 0; c < ll_table_cols(t.get()); ++c) rep.columns.push_back(ll_table_column(t.get(), c));
    for (size_t r = 0; r < ll_table_rows(t.get()); ++r) {
        json row = json::object();
        for (size_t c = 0; c < rep.columns.size(); ++c) row[rep.columns[c]] = ll_table_cell(t.get(), r, c);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

Report run_explicit_formula(ll_context* ctx, const RunConfig& cfg) {
    const auto phi = make_testfn(ctx, cfg);
    ll_explicit_formula_report r{};
    check(ctx, ll_explicit_formula(ctx, form_kind(cfg), cfg.integer("level"), cfg.integer("form"), cfg.integer("n_max"),
                                   phi.get(), cfg.real("X"), static_cast<std::uint64_t>(cfg.integer("max_zeros")), &r));
    Report rep;
    rep.add({{"kind", cfg.text("kind")}, {"level", cfg.integer("level")}, {"form", cfg.integer("form")},
             {"X", cfg.real("X")}, {"sigma", cfg.real("sigma")}, {"phi_id", cfg.text("phi_id")},
             {"zeros_used", r.zeros_used}, {"zero_side", r.zero_side}, {"prime_side", r.prime_side}, {"gap", r.gap},
             {"truncation", r.truncation}, {"archimedean", r.archimedean},
             {"prime_power_correction", r.prime_power_correction}, {"completed_gap", r.completed_gap}});
    rep.summary["completed_within_budget"] = r.completed_gap <= r.truncation + 0.05;
    return rep;
}

const std::map<std::string, std::function<Report(ll_context*, const RunConfig&)>> runners = {
    {"density", run_density},
    {"kuznetsov-check", run_kuznetsov},
    {"hplus", run_hplus},
    {"mellin", run_mellin},
    {"hb-verify", run_hb},
    {"split-lemma", run_split},
    {"lsieve", run_lsieve},
    {"fourth-moment", run_fourth_moment},
    {"grand-density", run_grand_density},
    {"zeros", run_zeros},
    {"fetch", run_fetch},
    {"explicit-formula", run_explicit_formula},
};

// ---------------------------------------------------------------------------
// output

std::string csv_cell(const json& v) {
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char ch : s) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return quoted + "\"";
    }
    return v.dump();
}

std::string render(const RunConfig& cfg, const Report& rep) {
    json config = json::object();
    for (const auto& [k, v] : cfg.values()) config[k] = v;
    for (const auto& [k, v] : cfg.client_values()) config[k] = v;

    if (cfg.text("output_format") == "json") {
        json doc = {{"version", ll_version()}, {"subcommand", cfg.subcommand()}, {"seed", cfg.seed()},
                    {"config", config}, {"summary", rep.summary}, {"passed", rep.passed}, {"rows", rep.rows}};
        return doc.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "# lowlying " << ll_version() << " " << cfg.subcommand() << "\n";
    for (const auto& item : config.items()) out << "# config " << item.key() << "=" << item.value().get<std::string>() << "\n";
    for (const auto& item : rep.summary.items()) out << "# summary " << item.key() << "=" << csv_cell(item.value()) << "\n";
    for (size_t c = 0; c < rep.columns.size(); ++c) out << (c ? "," : "") << rep.columns[c];
    out << "\n";
    for (const auto& row : rep.rows) {
        for (size_t c = 0; c < rep.columns.size(); ++c) out << (c ? "," : "") << csv_cell(row.at(rep.columns[c]));
        out << "\n";
    }
    return out.str();
}

void emit(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
}

int exit_code(int status) {
    switch (status) {
        case LL_ERR_DOMAIN: return 1;
        case LL_ERR_BUDGET: return 2;
        case LL_ERR_NETWORK: return 3;
        case LL_ERR_INVALID: return exit_usage;
        default: return exit_internal;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lowlying: numerical checks for one-level densities of low-lying zeros"};
    app.set_version_flag("--version", std::string(ll_version()));
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "flat key = value file")->check(CLI::ExistingFile);

    std::map<std::string, std::map<std::string, std::string>> raw;  // subcommand -> key -> flag value
    std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> bound;
    for (const auto& spec : lowlying::cli::subcommands()) {
        auto* sub = app.add_subcommand(spec.name, spec.help);
        sub->add_option("--config", config_path, "flat key = value file")->check(CLI::ExistingFile);
        for (const auto& o : spec.options) {
            auto& slot = raw[spec.name][o.key];
            CLI::Option* opt = nullptr;
            if (o.is_switch) {
                opt = sub->add_flag_callback(o.flags, [&slot] { slot = "true"; }, o.help);
            } else {
                opt = sub->add_option(o.flags, slot, o.help + " (default: " + (o.fallback.empty() ? "none" : o.fallback) + ")");
            }
            bound[spec.name].emplace_back(o.key, opt);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    const auto chosen = app.get_subcommands().front()->get_name();
    Context ctx;
    try {
        std::map<std::string, std::string> flags;
        for (const auto& [key, opt] : bound[chosen])
            if (opt->count() > 0) flags[key] = raw[chosen][key];
        const auto file = config_path.empty() ? lowlying::cli::KeyValues{} : lowlying::cli::read_flat_file(config_path);
        const RunConfig cfg(lowlying::cli::subcommand(chosen), file, flags);

        ll_context* raw_ctx = nullptr;
        if (ll_context_create(&raw_ctx) != LL_OK) return exit_internal;
        ctx.reset(raw_ctx);
        check(ctx.get(), ll_context_set_threads(ctx.get(), static_cast<unsigned>(cfg.integer("threads"))));
        check(ctx.get(), ll_context_set_option(ctx.get(), "offline", cfg.flag("offline") ? "true" : "false"));
        for (const auto& [k, v] : cfg.client_values()) check(ctx.get(), ll_context_set_option(ctx.get(), k.c_str(), v.c_str()));
        if (cfg.values().count("level_one_c_max"))
            check(ctx.get(), ll_context_set_option(ctx.get(), "level_one_c_max", cfg.text("level_one_c_max").c_str()));

        const auto report = runners.at(chosen)(ctx.get(), cfg);
        emit(cfg.text("output_path"), render(cfg, report));
        return report.passed ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const ApiFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_internal;
    }
}
