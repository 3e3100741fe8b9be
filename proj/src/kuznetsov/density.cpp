#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "lowlying/errors.hpp"
#include "lowlying/kuznetsov.hpp"
#include "lowlying/ntcore.hpp"
#include "lowlying/parallel.hpp"

namespace lowlying::kz {

namespace {

constexpr double pi = std::numbers::pi;

nt::KloostermanEvaluator& local_kloosterman() {
    thread_local nt::KloostermanEvaluator ev;
    return ev;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_density_args(const tr::TestFunction& phi, i64 N, i64 c_max) {
    if (N < 2 || !nt::is_prime(N)) throw DomainError("density: level must be prime");
    if (!(phi.sigma() < 2.0)) throw DomainError("density: sigma must be below 2");
    if (c_max < N) throw DomainError("density: c_max must be >= N");
    if (static_cast<double>(c_max) > static_cast<double>(N) * static_cast<double>(N))
        throw DomainError("density: c_max must not exceed N^2");
}

}  // namespace

double hecke_power(double lambda_p, int nu, bool ramified) {
    if (nu < 0) throw DomainError("hecke_power: nu must be >= 0");
    if (ramified) return std::pow(lambda_p, nu);
    double prev = 1.0, cur = lambda_p;  // lambda(p^0), lambda(p^1)
    if (nu == 0) return 1.0;
    for (int k = 2; k <= nu; ++k) {
        const double next = lambda_p * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double PrimeSumSide::tail_from(int nu) const {
    double s = 0.0;
    for (std::size_t k = static_cast<std::size_t>(std::max(nu, 1) - 1); k < by_nu.size(); ++k) s += by_nu[k];
    return s;
}

PrimeSumSide prime_sum_side(const tr::TestFunction& phi, double X, const HeckeEigenvalueSource& source) {
    if (!(X >= 2.0)) throw DomainError("prime_sum_side: X must be >= 2");
    const double logX = std::log(X);
    const double reach = std::pow(X, phi.sigma());
    if (reach > 1e9) throw BudgetError("prime_sum_side: X^sigma above 1e9");
    const auto primes = nt::primes_up_to(static_cast<i64>(std::floor(reach)));
    if (!primes.empty() && primes.back() > source.n_max())
        throw InsufficientDataError("prime_sum_side: coefficients end before X^sigma");
    PrimeSumSide out;
    out.half_phi0 = 0.5 * phi.phi(0.0);
    const int nu_max = std::max(1, static_cast<int>(std::ceil(phi.sigma() * logX / std::log(2.0))));
    out.by_nu.assign(static_cast<std::size_t>(nu_max), 0.0);
    for (int nu = 1; nu <= nu_max; ++nu) {
        double s = 0.0;
        for (i64 p : primes) {
            const double lp = std::log(static_cast<double>(p));
            const double u = nu * lp / logX;
            if (u >= phi.sigma()) break;
            const bool ramified = source.level % p == 0;
            s += hecke_power(source.lambda(p), nu, ramified) * std::pow(static_cast<double>(p), -0.5 * nu) * phi.phi_hat(u) * lp / logX;
        }
        out.by_nu[static_cast<std::size_t>(nu - 1)] = -2.0 * s;
    }
    out.value = out.half_phi0 + out.tail_from(1);
    return out;
}

std::vector<PrimePowerTerm> prime_power_terms(const tr::TestFunction& phi, i64 N, std::size_t limit) {
    const double logN = std::log(static_cast<double>(N));
    const double reach = std::pow(static_cast<double>(N), phi.sigma());
    // pi(x) > x / log x for x >= 17
    if (reach >= 17.0 && reach / std::log(reach) > static_cast<double>(limit))
        throw BudgetError("prime_power_terms: too many prime powers for the configured limit");
    const auto primes = nt::primes_up_to(static_cast<i64>(std::floor(reach)));
    const int nu_max = std::max(1, static_cast<int>(std::ceil(phi.sigma() * logN / std::log(2.0))));
    std::vector<PrimePowerTerm> out;
    for (int nu = 1; nu <= nu_max; ++nu) {
        for (i64 p : primes) {
            if (p == N) continue;
            const double lp = std::log(static_cast<double>(p));
            const double u = nu * lp / logN;
            if (u >= phi.sigma()) break;
            const double w = std::pow(static_cast<double>(p), -0.5 * nu) * phi.phi_hat(u) * lp / logN;
            if (w == 0.0) continue;
            i64 value = 1;
            for (int k = 0; k < nu; ++k) value *= p;
            out.push_back({p, nu, value, w});
            if (out.size() > limit) throw BudgetError("prime_power_terms: too many prime powers for the configured limit");
        }
    }
    return out;
}

DensityReport density_geometric(const tr::TestFunction& phi, const KuznetsovContext& ctx, i64 N, i64 c_max) {
    check_density_args(phi, N, c_max);
    const auto terms = prime_power_terms(phi, N, ctx.config().max_prime_powers);
    const auto omega = ctx.omega_star(N, c_max);
    const double Om = omega.geometric;
    const double Nd = static_cast<double>(N);
    const auto& hplus = ctx.hplus();

    DensityReport r;
    r.N = N;
    r.sigma = phi.sigma();
    r.h_id = ctx.weight().id();
    r.phi_id = phi.id();
    r.c_max = c_max;
    r.prime_powers = terms.size();
    r.main_terms = phi.phi_hat(0.0) + 0.5 * phi.phi(0.0);
    r.ks_prediction = tr::katz_sarnak_functional(phi);
    r.omega_star = Om;

    // c-sum: one partial per modulus, combined in a fixed tree order
    const auto count = static_cast<std::size_t>(c_max / N);
    auto per_c = parallel_map<double>(count, [&](std::size_t j) {
        const i64 c = static_cast<i64>(j + 1) * N;
        const double cd = static_cast<double>(c);
        auto& kl = local_kloosterman();
        std::vector<double> parts(terms.size());
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto& t = terms[i];
            parts[i] = kl(t.value, 1, c) * t.weight * hplus(4.0 * pi * std::sqrt(static_cast<double>(t.value)) / cd);
        }
        return tree_sum(parts) / cd;
    });
    const double kl_sum = tree_sum(per_c);

    auto eis_parts = parallel_map<double>(terms.size(), [&](std::size_t i) {
        return terms[i].weight * ctx.eisenstein_integral(terms[i].value, 1, N);
    });
    const double eis_sum = tree_sum(eis_parts);

    r.eisenstein_term = 2.0 * (1.0 + 1.0 / Nd) / (Om * pi * Nd) * eis_sum;
    r.kloosterman_term = -(2.0 / Om) * kl_sum;
    r.density_value = r.main_terms + r.eisenstein_term + r.kloosterman_term;
    r.deviation = std::abs(r.density_value - r.ks_prediction);

    auto tails = parallel_map<double>(terms.size(), [&](std::size_t i) {
        return std::abs(terms[i].weight) * ctx.kloosterman_tail(terms[i].value, 1, N, c_max);
    });
    const double omega_tail = ctx.delta_full(1, 1, N, c_max).tail_bound +
                              2.0 / (Nd + 1.0) * ctx.delta_level_one(1, 1).tail_bound;
    r.tail_bound = 2.0 / std::abs(Om) * tree_sum(tails) +
                   (std::abs(r.eisenstein_term) + std::abs(r.kloosterman_term)) * omega_tail / std::abs(Om);
    return r;
}

DensityReport density_geometric(const tr::TestFunction& phi, const tr::WeightFunction& h, i64 N, i64 c_max) {
    KuznetsovContext ctx(h);
    return density_geometric(phi, ctx, N, c_max);
}

std::string density_csv_header() { return "N,sigma,h_id,phi_id,c_max,density_value,ks_prediction,deviation,tail_bound"; }

std::string density_csv_row(const DensityReport& r) {
    return std::to_string(r.N) + "," + fmt_double(r.sigma) + "," + r.h_id + "," + r.phi_id + "," + std::to_string(r.c_max) + "," +
           fmt_double(r.density_value) + "," + fmt_double(r.ks_prediction) + "," + fmt_double(r.deviation) + "," +
           fmt_double(r.tail_bound);
}

std::string density_json(const DensityReport& r) {
    nlohmann::ordered_json j;
    j["N"] = r.N;
    j["sigma"] = r.sigma;
    j["h_id"] = r.h_id;
    j["phi_id"] = r.phi_id;
    j["c_max"] = r.c_max;
    j["main_terms"] = r.main_terms;
    j["kloosterman_term"] = r.kloosterman_term;
    j["eisenstein_term"] = r.eisenstein_term;
    j["omega_star"] = r.omega_star;
    j["density_value"] = r.density_value;
    j["ks_prediction"] = r.ks_prediction;
    j["deviation"] = r.deviation;
    j["tail_bound"] = r.tail_bound;
    j["prime_powers"] = r.prime_powers;
    return j.dump(2);
}

CharacterFormReport error_term_character_form(const tr::TestFunction& phi, const KuznetsovContext& ctx, i64 N, i64 c_max,
                                              i64 reconstruct_c_max) {
    check_density_args(phi, N, c_max);
    const double logN = std::log(static_cast<double>(N));
    const double Nd = static_cast<double>(N);
    if (static_cast<double>(c_max) * static_cast<double>(c_max) > 1e8)
        throw BudgetError("error_term_character_form: c range too large for desk scale");
    const auto& hplus = ctx.hplus();

    // n with Lambda(n) != 0 and phi_hat(log n / log N) != 0, all primes included
    struct Term {
        i64 n;
        double a;  // n^{-1/2} phi_hat(log n/log N) Lambda(n)/log N
    };
    std::vector<Term> ns;
    const auto reach = static_cast<i64>(std::floor(std::pow(Nd, phi.sigma())));
    for (i64 p : nt::primes_up_to(reach)) {
        for (i64 q = p; q <= reach; q *= p) {
            const double v = phi.phi_hat(std::log(static_cast<double>(q)) / logN);
            if (v != 0.0) ns.push_back({q, v * std::log(static_cast<double>(p)) / (std::sqrt(static_cast<double>(q)) * logN)});
            if (q > reach / p) break;
        }
    }

    // primitive characters per modulus, shared across c
    std::map<i64, std::vector<nt::DirichletCharacter>> prim;
    const i64 c_top = std::min(c_max, N * N - 1);
    for (i64 c = N; c <= c_top; c += N)
        for (i64 d : nt::divisors(c))
            if (d != 1 && !prim.count(d)) prim.emplace(d, nt::primitive_characters(d));

    std::vector<i64> cs;
    for (i64 c = N; c <= c_top; c += N) cs.push_back(c);
    auto per_c = parallel_map<double>(cs.size(), [&](std::size_t k) {
        const i64 c = cs[k];
        const double cd = static_cast<double>(c);
        std::vector<double> b(ns.size());
        for (std::size_t i = 0; i < ns.size(); ++i) b[i] = ns[i].a * hplus(4.0 * pi * std::sqrt(static_cast<double>(ns[i].n)) / cd);
        double outer = 0.0;
        for (i64 d : nt::divisors(c)) {
            if (d == 1) continue;
            double inner = 0.0;
            for (const auto& chi : prim.at(d)) {
                std::complex<double> s = 0.0;
                for (std::size_t i = 0; i < ns.size(); ++i) s += chi(ns[i].n) * b[i];
                inner += std::abs(s);
            }
            outer += static_cast<double>(d) * inner;
        }
        return outer / (cd * static_cast<double>(nt::totient(c)));
    });

    CharacterFormReport r;
    r.error_expression = tree_sum(per_c);

    // Kloosterman form vs Gauss-sum reconstruction over p^nu coprime to c
    if (reconstruct_c_max <= 0) reconstruct_c_max = N;
    const auto terms = prime_power_terms(phi, N, ctx.config().max_prime_powers);
    for (i64 c = N; c <= std::min(reconstruct_c_max, c_top); c += N) {
        const double cd = static_cast<double>(c);
        const auto group = nt::character_group(c);
        std::vector<std::complex<double>> tau2;
        tau2.reserve(group.size());
        for (const auto& chi : group) {
            const auto t = nt::gauss_sum(chi);
            tau2.push_back(t * t);
        }
        const double phic = static_cast<double>(nt::totient(c));
        double direct = 0.0, rebuilt = 0.0;
        for (const auto& t : terms) {
            if (std::gcd(t.value, c) != 1) continue;
            const double w = t.weight * hplus(4.0 * pi * std::sqrt(static_cast<double>(t.value)) / cd) / cd;
            direct += local_kloosterman()(t.value, 1, c) * w;
            std::complex<double> e = 0.0;
            for (std::size_t k = 0; k < group.size(); ++k) e += std::conj(group[k](t.value)) * tau2[k];
            rebuilt += (e / phic).real() * w;
        }
        r.reconstruction_difference = std::max(r.reconstruction_difference, std::abs(direct - rebuilt));
        r.c_checked_max = c;
    }
    return r;
}

}  // namespace lowlying::kz
