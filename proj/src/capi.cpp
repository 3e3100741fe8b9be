#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <string>
#include <vector>

#include "lowlying/dirpoly.hpp"
#include "lowlying/errors.hpp"
#include "lowlying/kuznetsov.hpp"
#include "lowlying/lmfdb.hpp"
#include "lowlying/lowlying.h"
#include "lowlying/ntcore.hpp"
#include "lowlying/parallel.hpp"
#include "lowlying/specfun.hpp"
#include "lowlying/transforms.hpp"

#ifndef LOWLYING_VERSION_STRING
#define LOWLYING_VERSION_STRING "0.1.0"
#endif

using namespace lowlying;

struct ll_context {
    lmfdb::ClientConfig client_cfg;
    kz::KuznetsovConfig kz_cfg;
    std::unique_ptr<lmfdb::Client> client;
    std::string error;
};

struct ll_weight {
    tr::WeightFunction h;
    kz::KuznetsovConfig cfg;
    mutable std::mutex mu;
    mutable std::unique_ptr<kz::KuznetsovContext> kz;

    const kz::KuznetsovContext& context() const {
        std::lock_guard lock(mu);
        if (!kz) kz = std::make_unique<kz::KuznetsovContext>(h, cfg);
        return *kz;
    }
};

struct ll_testfn {
    tr::TestFunction f;
};

struct ll_table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

namespace {

struct InvalidArgument : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int code_of(ErrorKind k) {
    switch (k) {
        case ErrorKind::domain:
        case ErrorKind::unstable:
        case ErrorKind::insufficient_data: return LL_ERR_DOMAIN;
        case ErrorKind::budget: return LL_ERR_BUDGET;
        case ErrorKind::network:
        case ErrorKind::schema:
        case ErrorKind::invariant: return LL_ERR_NETWORK;
        case ErrorKind::invalid_argument: return LL_ERR_INVALID;
    }
    return LL_ERR_INTERNAL;
}

template <class F>
int guarded(ll_context* ctx, F&& body) {
    auto fail = [&](int code, const char* what) {
        if (ctx) ctx->error = what;
        return code;
    };
    try {
        if (ctx) ctx->error.clear();
        body();
        return LL_OK;
    } catch (const Error& e) {
        return fail(code_of(e.kind()), e.what());
    } catch (const InvalidArgument& e) {
        return fail(LL_ERR_INVALID, e.what());
    } catch (const std::bad_alloc&) {
        return fail(LL_ERR_BUDGET, "out of memory");
    } catch (const std::exception& e) {
        return fail(LL_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(LL_ERR_INTERNAL, "unknown failure");
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

lmfdb::Client& client_of(ll_context* ctx) {
    if (!ctx->client) ctx->client = std::make_unique<lmfdb::Client>(ctx->client_cfg);
    return *ctx->client;
}

lmfdb::FetchRequest request(int kind, int64_t level, int64_t count, int64_t n_max) {
    require(kind == 0 || kind == 1, "kind must be 0 (maass) or 1 (holomorphic)");
    lmfdb::FetchRequest r;
    r.kind = kind == 0 ? FormKind::maass : FormKind::holomorphic;
    r.level = level;
    r.count = count;
    r.n_max = n_max;
    return r;
}

tr::MellinQuery query_of(const ll_mellin_shape* shape) {
    require(shape != nullptr, "null Mellin shape");
    require(shape->kind == 0 || shape->kind == 1, "Mellin kind must be 0 or 1");
    tr::MellinQuery q;
    q.kind = shape->kind == 0 ? tr::MellinKind::maass : tr::MellinKind::holomorphic;
    q.weight = shape->weight;
    q.scale = shape->scale;
    q.c = shape->c;
    return q;
}

dp::CoefKind coef_kind(int kind) {
    require(kind >= 0 && kind <= 2, "coefficient kind must be 0, 1 or 2");
    return static_cast<dp::CoefKind>(kind);
}

void copy_summary(const dp::ExhaustiveSummary& s, ll_split_summary* out) {
    *out = {s.tuples, s.greedy_failures, s.invalid_witnesses, s.oracle_failures, s.case_a, s.case_b};
}

}  // namespace

extern "C" {

const char* ll_version(void) { return LOWLYING_VERSION_STRING; }

int ll_context_create(ll_context** out) {
    if (!out) return LL_ERR_INVALID;
    *out = new (std::nothrow) ll_context();
    return *out ? LL_OK : LL_ERR_INTERNAL;
}

void ll_context_destroy(ll_context* ctx) { delete ctx; }

int ll_context_set_threads(ll_context* ctx, unsigned threads) {
    return guarded(ctx, [&] { set_thread_count(threads); });
}

int ll_context_set_option(ll_context* ctx, const char* key, const char* value) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(key && value, "null option key or value");
        const std::string k = key;
        if (k == "level_one_c_max") {
            ctx->kz_cfg.level_one_c_max = std::stoll(value);
            require(ctx->kz_cfg.level_one_c_max >= 1, "level_one_c_max must be positive");
            return;
        }
        try {
            ctx->client_cfg.apply({{k, value}});
        } catch (const DomainError& e) {
            throw InvalidArgument(e.what());
        }
        ctx->client.reset();
    });
}

const char* ll_last_error(const ll_context* ctx) { return ctx ? ctx->error.c_str() : "null context"; }

// ---------------------------------------------------------------------------

int ll_weight_create(ll_context* ctx, const char* id, double width, ll_weight** out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(id && out, "null argument");
        require(std::strcmp(id, "gaussian") == 0, "unknown weight id");
        require(width > 0.0, "weight width must be positive");
        *out = new ll_weight{tr::make_weight_gaussian(width), ctx->kz_cfg, {}, {}};
    });
}

void ll_weight_destroy(ll_weight* w) { delete w; }

int ll_weight_eval(const ll_weight* w, double re, double im, double* out_re, double* out_im) {
    if (!w || !out_re || !out_im) return LL_ERR_INVALID;
    return guarded(nullptr, [&] {
        const auto v = w->h(tr::cplx(re, im));
        *out_re = v.real();
        *out_im = v.imag();
    });
}

const char* ll_weight_id(const ll_weight* w) { return w ? w->h.id().c_str() : ""; }

int ll_testfn_create(ll_context* ctx, const char* id, double sigma, ll_testfn** out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(id && out, "null argument");
        const std::string name = id;
        require(name == "triangle" || name == "bump", "unknown test function id");
        *out = new ll_testfn{name == "triangle" ? tr::make_test_triangle(sigma) : tr::make_test_bump(sigma)};
    });
}

void ll_testfn_destroy(ll_testfn* f) { delete f; }

int ll_testfn_phi(const ll_testfn* f, double x, double* out) {
    if (!f || !out) return LL_ERR_INVALID;
    return guarded(nullptr, [&] { *out = f->f.phi(x); });
}

int ll_testfn_phi_hat(const ll_testfn* f, double u, double* out) {
    if (!f || !out) return LL_ERR_INVALID;
    return guarded(nullptr, [&] { *out = f->f.phi_hat(u); });
}

const char* ll_testfn_id(const ll_testfn* f) { return f ? f->f.id().c_str() : ""; }

// ---------------------------------------------------------------------------

size_t ll_table_rows(const ll_table* t) { return t ? t->rows.size() : 0; }
size_t ll_table_cols(const ll_table* t) { return t ? t->columns.size() : 0; }

const char* ll_table_column(const ll_table* t, size_t col) {
    return t && col < t->columns.size() ? t->columns[col].c_str() : nullptr;
}

const char* ll_table_cell(const ll_table* t, size_t row, size_t col) {
    if (!t || row >= t->rows.size() || col >= t->columns.size()) return nullptr;
    return t->rows[row][col].c_str();
}

void ll_table_destroy(ll_table* t) { delete t; }

// ---------------------------------------------------------------------------

int ll_density(ll_context* ctx, const ll_weight* h, const ll_testfn* phi, int64_t N, int64_t c_max,
               ll_density_report* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(h && phi && out, "null argument");
        const auto r = kz::density_geometric(phi->f, h->context(), N, c_max);
        *out = {r.N, r.sigma, r.c_max, r.main_terms, r.kloosterman_term, r.eisenstein_term, r.omega_star,
                r.density_value, r.ks_prediction, r.deviation, r.tail_bound, r.prime_powers};
    });
}

int ll_kuznetsov_check(ll_context* ctx, const ll_weight* h, int64_t m, int64_t n, int64_t N, int64_t c_max,
                       ll_kuznetsov_report* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(h && out, "null argument");
        const auto& kc = h->context();
        const auto full = kc.delta_full(m, n, N, c_max);
        const auto one = kc.delta_level_one(m, n);
        const auto omega = kc.omega_star(N, c_max);
        *out = {full.diagonal, full.eisenstein, full.kloosterman, full.tail_bound, full.total, one.total,
                kc.delta_star(m, n, N, c_max), omega.geometric, omega.integral};
    });
}

int ll_hplus(ll_context* ctx, const ll_weight* h, double x, ll_hplus_report* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(h && out, "null argument");
        const auto& ev = h->context().hplus();
        *out = {tr::hplus_integral(h->h, x), tr::hplus_series(h->h, x), ev(x), ev.slope_constant()};
    });
}

int ll_mellin(ll_context* ctx, const ll_weight* h, const ll_testfn* phi, const ll_mellin_shape* shape, double re,
              double im, double* out_re, double* out_im) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(phi && out_re && out_im, "null argument");
        auto q = query_of(shape);
        q.s = tr::cplx(re, im);
        const tr::HPlusEvaluator* ev = nullptr;
        if (q.kind == tr::MellinKind::maass) {
            require(h != nullptr, "Maass kernel needs a weight");
            ev = &h->context().hplus();
        }
        const auto v = tr::MellinKernel(q, phi->f, ev)(q.s);
        *out_re = v.real();
        *out_im = v.imag();
    });
}

int ll_mellin_invert(ll_context* ctx, const ll_weight* h, const ll_testfn* phi, const ll_mellin_shape* shape, double x,
                     double t_max, int panels, double* inverted, double* target) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(phi && inverted && target, "null argument");
        const auto q = query_of(shape);
        const tr::HPlusEvaluator* ev = nullptr;
        if (q.kind == tr::MellinKind::maass) {
            require(h != nullptr, "Maass kernel needs a weight");
            ev = &h->context().hplus();
        }
        const tr::MellinKernel kernel(q, phi->f, ev);
        *inverted = kernel.invert(x, t_max, panels);
        *target = kernel.target(x);
    });
}

int ll_hb_verify(ll_context* ctx, int64_t n_max, int64_t z, int K, ll_hb_report* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        const auto r = dp::heath_brown_check(n_max, z, K);
        *out = {r.max_residual, r.worst_n, r.integer_part_is_moebius ? 1 : 0};
    });
}

int ll_split_exhaustive(ll_context* ctx, int grid, double epsilon, int max_active, int weight, ll_split_summary* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        copy_summary(dp::exhaustive_split_sweep(grid, epsilon, max_active, weight), out);
    });
}

int ll_split_random(ll_context* ctx, uint64_t count, double epsilon, uint64_t seed, int grid, int weight,
                    ll_split_summary* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        const auto s = dp::random_split_sweep(count, epsilon, seed, grid, weight);
        *out = {s.tuples, s.greedy_failures, s.invalid_witnesses, 0, 0, 0};
    });
}

int ll_split_witness(ll_context* ctx, const double* exponents, size_t n, double epsilon, int weight, int* which,
                     size_t* subset, size_t* subset_len, size_t* pair) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(exponents && which && subset_len && pair, "null argument");
        require(n <= dp::tuple_width, "too many exponents");
        const auto t = dp::DyadicTuple::from_exponents(1e6, epsilon, std::span<const double>(exponents, n), weight);
        const auto w = weight == 0 ? dp::splitting_witness(t) : dp::splitting_witness_holo(t, weight);
        *which = w.which == dp::SplitCase::A ? 0 : 1;
        if (w.which == dp::SplitCase::A) {
            require(subset != nullptr && *subset_len >= w.subset.size(), "subset buffer too small");
            std::copy(w.subset.begin(), w.subset.end(), subset);
            *subset_len = w.subset.size();
        } else {
            *subset_len = 0;
        }
        pair[0] = w.pair.first;
        pair[1] = w.pair.second;
    });
}

int ll_theta_k(ll_context* ctx, int k, double* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        *out = dp::theta_k(k);
    });
}

int ll_lsieve_check(ll_context* ctx, int64_t d, const double* re, const double* im, size_t X, double* lhs, double* rhs) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(re && im && lhs && rhs, "null argument");
        std::vector<std::complex<double>> a(X);
        for (size_t i = 0; i < X; ++i) a[i] = {re[i], im[i]};
        const auto r = dp::large_sieve_check(d, a);
        *lhs = r.lhs;
        *rhs = r.rhs;
    });
}

int ll_lsieve_sweep(ll_context* ctx, uint64_t trials, int64_t d_max, int64_t X_max, uint64_t seed,
                    ll_lsieve_summary* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        const auto s = dp::large_sieve_sweep(trials, d_max, X_max, seed);
        *out = {s.trials, s.violations, s.max_ratio};
    });
}

int ll_fourth_moment(ll_context* ctx, int64_t d, int64_t X, int kind, double t_max, double panel_width,
                     double log_power, ll_fourth_moment_report* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        dp::MomentConfig cfg;
        cfg.t_max = t_max;
        cfg.panel_width = panel_width;
        cfg.log_power = log_power;
        const auto r = dp::fourth_moment_integral(d, X, coef_kind(kind), cfg);
        *out = {r.lhs, r.ratio, r.tail_bound};
    });
}

int ll_grand_density(ll_context* ctx, int64_t Q, int64_t k, double T, double beta, double log_power,
                     ll_grand_density_report* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        dp::GrandDensityConfig cfg;
        cfg.log_power = log_power;
        const auto r = dp::grand_density_ratio(Q, k, T, beta, cfg);
        *out = {r.lhs, r.rhs, r.characters, r.line_count};
    });
}

int ll_character_count(ll_context* ctx, int64_t q, size_t* count) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(count != nullptr, "null argument");
        require(q >= 1, "modulus must be positive");
        *count = static_cast<size_t>(nt::totient(q));
    });
}

int ll_characters(ll_context* ctx, int64_t q, int primitive_only, ll_table** out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        require(q >= 1, "modulus must be positive");
        auto t = std::make_unique<ll_table>();
        t->columns = {"modulus", "index", "conductor", "primitive", "parity", "order"};
        for (const auto& chi : nt::character_group(q)) {
            if (primitive_only && !chi.is_primitive()) continue;
            // order: smallest m with chi^m principal
            std::int64_t order = 1;
            for (auto power = chi; !power.is_principal(); power = power * chi) ++order;
            t->rows.push_back({std::to_string(q), std::to_string(chi.index()), std::to_string(chi.conductor()),
                               chi.is_primitive() ? "1" : "0", chi.is_even() ? "even" : "odd", std::to_string(order)});
        }
        *out = t.release();
    });
}

int ll_zero_count(ll_context* ctx, int64_t q, size_t index, double beta, double T, ll_zero_report* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        require(q >= 1, "modulus must be positive");
        require(index < static_cast<size_t>(nt::totient(q)), "character index out of range");
        const auto r = sf::zero_count_detailed({beta, T, nt::character_at(q, index)});
        *out = {r.box_count, r.line_count, r.line_box_disagree ? 1 : 0, r.final_step};
    });
}

int ll_fe_residual(ll_context* ctx, int64_t q, size_t index, double re, double im, double* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        require(q >= 1, "modulus must be positive");
        require(index < static_cast<size_t>(nt::totient(q)), "character index out of range");
        *out = sf::functional_equation_residual({re, im}, nt::character_at(q, index));
    });
}

int ll_fetch(ll_context* ctx, int kind, int64_t level, int64_t count, int64_t n_max, ll_table** out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(out != nullptr, "null argument");
        const auto forms = client_of(ctx).fetch_forms(request(kind, level, count, n_max));
        auto t = std::make_unique<ll_table>();
        t->columns = {"label", "kind", "level", "spectral_parameter", "sign", "coefficients", "zeros",
                      "first_zero", "lambda_2", "fetched_at"};
        for (const auto& f : forms) {
            t->rows.push_back({f.label, f.kind == FormKind::maass ? "maass" : "holomorphic", std::to_string(f.level),
                               num(f.spectral_parameter), std::to_string(f.sign), std::to_string(f.coefficients.size()),
                               std::to_string(f.zeros.size()), f.zeros.empty() ? "" : num(f.zeros.front()),
                               f.coefficients.size() >= 2 ? num(f.coefficients[1]) : "", f.fetched_at});
        }
        *out = t.release();
    });
}

int ll_explicit_formula(ll_context* ctx, int kind, int64_t level, int64_t form, int64_t n_max, const ll_testfn* phi,
                        double X, uint64_t max_zeros, ll_explicit_formula_report* out) {
    if (!ctx) return LL_ERR_INVALID;
    return guarded(ctx, [&] {
        require(phi && out, "null argument");
        require(form >= 0, "form position must be non-negative");
        const auto forms = client_of(ctx).fetch_forms(request(kind, level, form + 1, n_max));
        if (static_cast<int64_t>(forms.size()) <= form)
            throw InsufficientDataError("explicit formula: fewer forms available than requested");
        const auto r = lmfdb::explicit_formula_check(forms[static_cast<size_t>(form)], phi->f, X, max_zeros);
        *out = {r.zero_side, r.prime_side, r.gap, r.truncation, r.archimedean, r.prime_power_correction,
                r.completed_gap, r.zeros_used};
    });
}

}  // extern "C"
