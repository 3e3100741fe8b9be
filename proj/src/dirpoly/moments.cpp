#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>

#include "lowlying/dirpoly.hpp"
#include "lowlying/errors.hpp"
#include "lowlying/ntcore.hpp"
#include "lowlying/parallel.hpp"
#include "lowlying/transforms.hpp"

namespace lowlying::dp {

namespace {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

// Values of the primitive characters mod d at residues 0..d-1, one row per character.
struct CharTable {
    i64 d = 0;
    std::size_t count = 0;
    std::vector<cplx> values;
    const cplx* row(std::size_t c) const { return values.data() + c * static_cast<std::size_t>(d); }
};

const CharTable& primitive_table(i64 d) {
    static std::mutex mu;
    static std::map<i64, std::unique_ptr<CharTable>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[d];
    if (!slot) {
        auto tab = std::make_unique<CharTable>();
        tab->d = d;
        const auto chars = nt::primitive_characters(d);
        tab->count = chars.size();
        tab->values.reserve(chars.size() * static_cast<std::size_t>(d));
        for (const auto& chi : chars)
            for (i64 r = 0; r < d; ++r) tab->values.push_back(chi(r));
        slot = std::move(tab);
    }
    return *slot;
}

// One Dirichlet polynomial sum_n coef(n) n^{-1/2-it}, restricted to n coprime to d.
struct Factor {
    std::vector<double> log_n;
    std::vector<double> coef;  // a(n) n^{-1/2}
    std::vector<std::size_t> residue;
    double l1() const {
        double s = 0.0;
        for (double c : coef) s += std::abs(c);
        return s;
    }
};

double coefficient(CoefKind kind, i64 n) {
    switch (kind) {
        case CoefKind::one: return 1.0;
        case CoefKind::moebius: return nt::moebius(n);
        case CoefKind::log: return std::log(static_cast<double>(n));
    }
    return 0.0;
}

Factor make_factor(i64 lo, i64 hi, CoefKind kind, i64 d) {
    Factor f;
    for (i64 n = lo; n <= hi; ++n) {
        if (std::gcd(n, d) != 1) continue;
        const double c = coefficient(kind, n);
        if (c == 0.0) continue;
        f.log_n.push_back(std::log(static_cast<double>(n)));
        f.coef.push_back(c / std::sqrt(static_cast<double>(n)));
        f.residue.push_back(static_cast<std::size_t>(n % d));
    }
    return f;
}

// int_{-t_max}^{t_max} sum*_chi |prod_j P_j(chi, t)|^power dt / (t^2 + 1)
double moment_integral(const CharTable& tab, const std::vector<Factor>& factors, double power, double t_max,
                       double panel_width) {
    const int panels = std::max(1, static_cast<int>(std::ceil(t_max / panel_width)));
    const auto grid = tr::QuadratureGrid::composite(0.0, t_max, panels);
    const auto d = static_cast<std::size_t>(tab.d);
    // factors supported on n = 1 are the constant a(1); fold them out of the character loop
    double constant = 1.0;
    std::vector<const Factor*> varying;
    for (const auto& f : factors) {
        if (f.coef.empty()) return 0.0;
        if (f.coef.size() == 1 && f.log_n[0] == 0.0) constant *= f.coef[0];
        else varying.push_back(&f);
    }
    const double scale = std::pow(std::abs(constant), power);
    auto parts = parallel_map<double>(grid.nodes.size(), [&](std::size_t i) {
        const double t = grid.nodes[i];
        std::vector<std::vector<cplx>> sums(varying.size(), std::vector<cplx>(d, 0.0));
        for (std::size_t j = 0; j < varying.size(); ++j) {
            const auto& f = *varying[j];
            for (std::size_t k = 0; k < f.coef.size(); ++k)
                sums[j][f.residue[k]] += f.coef[k] * std::polar(1.0, -t * f.log_n[k]);
        }
        double acc = 0.0;
        for (std::size_t c = 0; c < tab.count; ++c) {
            const cplx* chi = tab.row(c);
            cplx prod = 1.0;
            for (const auto& s : sums) {
                cplx p = 0.0;
                for (std::size_t r = 0; r < d; ++r) p += chi[r] * s[r];
                prod *= p;
            }
            acc += std::pow(std::abs(prod), power);
        }
        return grid.weights[i] * scale * acc / (1.0 + t * t);
    });
    // the character sum is even in t: conjugation permutes the primitive characters
    return 2.0 * tree_sum(parts);
}

double tail_weight(double t_max) { return pi - 2.0 * std::atan(t_max); }

void check_moment_window(double t_max, double panel_width) {
    if (!(t_max > 0.0) || !(panel_width > 0.0)) throw DomainError("t_max and panel_width must be positive");
    if (t_max / panel_width > 1e5) throw BudgetError("quadrature grid above 1e5 panels");
}

}  // namespace

LargeSieveResult large_sieve_check(i64 d, std::span<const std::complex<double>> a) {
    if (d < 2) throw DomainError("large_sieve_check: d must be >= 2");
    if (a.empty()) throw DomainError("large_sieve_check: need X >= 1 coefficients");
    if (d > 100'000) throw BudgetError("large_sieve_check: d above 1e5");
    const auto& tab = primitive_table(d);
    std::vector<cplx> by_residue(static_cast<std::size_t>(d), 0.0);
    double norm = 0.0;
    for (std::size_t n = 1; n <= a.size(); ++n) {
        by_residue[n % static_cast<std::size_t>(d)] += a[n - 1];
        norm += std::norm(a[n - 1]);
    }
    LargeSieveResult r;
    for (std::size_t c = 0; c < tab.count; ++c) {
        const cplx* chi = tab.row(c);
        cplx s = 0.0;
        for (std::size_t res = 0; res < by_residue.size(); ++res) s += chi[res] * by_residue[res];
        r.lhs += std::norm(s);
    }
    r.rhs = static_cast<double>(d + static_cast<i64>(a.size())) * norm;
    return r;
}

LargeSieveSweep large_sieve_sweep(std::size_t trials, i64 d_max, i64 X_max, std::uint64_t seed) {
    if (d_max < 2 || X_max < 1) throw DomainError("large_sieve_sweep: need d_max >= 2, X_max >= 1");
    auto ratios = parallel_map<double>(trials, [&](std::size_t i) {
        std::seed_seq seq{seed, static_cast<std::uint64_t>(i)};
        std::mt19937_64 rng(seq);
        const i64 d = std::uniform_int_distribution<i64>(2, d_max)(rng);
        const i64 X = std::uniform_int_distribution<i64>(1, X_max)(rng);
        std::normal_distribution<double> g;
        std::vector<cplx> a(static_cast<std::size_t>(X));
        for (auto& v : a) {
            const double re = g(rng);
            v = cplx(re, g(rng));
        }
        const auto r = large_sieve_check(d, a);
        return r.lhs / r.rhs;
    });
    LargeSieveSweep s;
    s.seed = seed;
    s.trials = trials;
    for (double q : ratios) {
        s.max_ratio = std::max(s.max_ratio, q);
        if (q > 1.0 + 1e-12) ++s.violations;
    }
    return s;
}

FourthMomentResult fourth_moment_integral(i64 d, i64 X, CoefKind kind, const MomentConfig& cfg) {
    if (d < 2 || X < 1) throw DomainError("fourth_moment_integral: need d >= 2, X >= 1");
    if (d > 200 || X > 10'000) throw BudgetError("fourth_moment_integral: d <= 200 and X <= 1e4 at desk scale");
    check_moment_window(cfg.t_max, cfg.panel_width);
    const auto& tab = primitive_table(d);
    std::vector<Factor> factors{make_factor(1, X, kind, d)};
    FourthMomentResult r;
    r.lhs = moment_integral(tab, factors, 4.0, cfg.t_max, cfg.panel_width);
    r.tail_bound = static_cast<double>(tab.count) * std::pow(factors[0].l1(), 4.0) * tail_weight(cfg.t_max);
    r.ratio = r.lhs / (static_cast<double>(d) * std::pow(std::log(static_cast<double>(d) * static_cast<double>(X)), cfg.log_power));
    return r;
}

namespace {

bool is_padding(const DyadicTuple& t, std::size_t j) { return std::abs(t.size(j) - 0.5) < 1e-9; }

std::vector<Factor> poly_factors(const DyadicTuple& t, std::span<const std::size_t> slots, i64 d) {
    std::size_t active = 0;
    double length = 1.0;
    std::vector<Factor> out;
    for (auto j : slots) {
        if (j >= tuple_width) throw DomainError("char_poly: slot index out of range");
        if (is_padding(t, j)) {
            out.push_back(make_factor(1, 1, t.kind(j), d));
            continue;
        }
        ++active;
        const double size = t.size(j);
        length *= 2.0 * size;
        const auto lo = static_cast<i64>(std::floor(size + 1e-9)) + 1;
        const auto hi = static_cast<i64>(std::floor(2.0 * size + 1e-9));
        out.push_back(make_factor(lo, hi, t.kind(j), d));
    }
    if (active > 4) throw BudgetError("char_poly: at most 4 non-padding variables at desk scale");
    if (length > static_cast<double>(char_poly_max_length)) throw BudgetError("char_poly: total length above 1e5");
    return out;
}

std::vector<std::size_t> all_slots() {
    std::vector<std::size_t> s(tuple_width);
    for (std::size_t j = 0; j < tuple_width; ++j) s[j] = j;
    return s;
}

}  // namespace

CharPolyResult char_poly_integral(const DyadicTuple& t, i64 d, const CharPolyConfig& cfg) {
    if (d < 2) throw DomainError("char_poly_integral: d must be >= 2");
    if (d > 200) throw BudgetError("char_poly_integral: d above 200");
    check_moment_window(cfg.t_max, cfg.panel_width);
    const auto slots = all_slots();
    const auto factors = poly_factors(t, slots, d);
    const auto& tab = primitive_table(d);
    CharPolyResult r;
    r.lhs = moment_integral(tab, factors, 1.0, cfg.t_max, cfg.panel_width);
    double env = static_cast<double>(tab.count);
    for (const auto& f : factors) env *= f.l1();
    r.tail_bound = env * tail_weight(cfg.t_max);
    const double N = t.N(), dd = static_cast<double>(d);
    r.rhs_envelope = (N + dd) * (N + dd) / dd * std::pow(N, 1.0 / 16.0) * std::pow(std::log(dd * N), cfg.log_power);
    r.fitted_constant = r.lhs / r.rhs_envelope;
    return r;
}

double char_poly_second_moment(const DyadicTuple& t, std::span<const std::size_t> subset, i64 d, const CharPolyConfig& cfg) {
    if (d < 2) throw DomainError("char_poly_second_moment: d must be >= 2");
    if (d > 200) throw BudgetError("char_poly_second_moment: d above 200");
    check_moment_window(cfg.t_max, cfg.panel_width);
    const auto factors = poly_factors(t, subset, d);
    return moment_integral(primitive_table(d), factors, 2.0, cfg.t_max, cfg.panel_width);
}

TailoringResult tailoring_check(double N, double d, int k) {
    if (!(N >= 2.0) || !(d >= 1.0)) throw DomainError("tailoring_check: need N >= 2, d >= 1");
    const double th = theta_k(k);
    const double kk = k;
    const double shift = (kk - 1.0) * th / 2.0;
    TailoringResult r;
    r.lhs = std::pow(N + d, kk) * std::pow(N, 1.0 - shift) / d;
    r.rhs = d * std::pow(N, kk - 1.0 - shift) + std::sqrt(d) * std::pow(N, kk - 0.5 - shift) + std::pow(N, kk - shift);
    return r;
}

}  // namespace lowlying::dp
