#include <cmath>
#include <numbers>
#include <numeric>

#include "lowlying/errors.hpp"
#include "lowlying/kuznetsov.hpp"
#include "lowlying/ntcore.hpp"
#include "lowlying/parallel.hpp"
#include "lowlying/specfun.hpp"

namespace lowlying::kz {

namespace {

constexpr double pi = std::numbers::pi;

nt::KloostermanEvaluator& local_kloosterman() {
    thread_local nt::KloostermanEvaluator ev;
    return ev;
}

void check_level(i64 N) {
    if (N < 2 || !nt::is_prime(N)) throw DomainError("level must be prime");
}

}  // namespace

double divisor_tail_bound(i64 K) {
    if (K < 1) throw DomainError("divisor_tail_bound: K must be >= 1");
    // sum over d e > K of (de)^{-3/2}: d <= K uses sum_{e > K/d} e^{-3/2} <= 2 / sqrt(floor(K/d)),
    // d > K contributes at most zeta(3/2) * 2 / sqrt(K)
    constexpr double zeta_three_halves = 2.6123753486854883;
    double s = 0.0;
    for (i64 d = 1; d <= K; ++d) s += std::pow(static_cast<double>(d), -1.5) * 2.0 / std::sqrt(static_cast<double>(K / d));
    return s + zeta_three_halves * 2.0 / std::sqrt(static_cast<double>(K));
}

KuznetsovContext::KuznetsovContext(const tr::WeightFunction& h, KuznetsovConfig cfg)
    : h_(h), cfg_(cfg), hplus_(std::make_unique<tr::HPlusEvaluator>(h)) {
    const double cut = tr::spectral_cutoff(h_);
    auto grid = tr::QuadratureGrid::composite(0.0, cut, cfg_.spectral_panels);
    double diag = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        const double t = grid.nodes[i];
        const double ht = h_.at_real(t);
        diag += grid.weights[i] * t * ht * std::tanh(pi * t);
        const double z = std::norm(sf::riemann_zeta(std::complex<double>(1.0, 2.0 * t)));
        t_nodes_.push_back(t);
        base_weights_.push_back(grid.weights[i] * ht / z);
    }
    diagonal_ = 2.0 * diag / (pi * pi);  // even integrand
    spectral_tail_ = std::abs(h_.at_real(cut)) * (1.0 + cut);
}

double KuznetsovContext::eisenstein_integral(i64 m, i64 n, i64 N) const {
    if (m < 1 || n < 1 || N < 1) throw DomainError("eisenstein_integral: arguments must be positive");
    const auto dm = nt::divisors(m), dn = nt::divisors(n);
    // sigma_{2it}(m) sigma_{2it}(n) (mn)^{-it} = sum over d | m, e | n of (d^2 e^2 / mn)^{it}
    std::vector<double> logs;
    const double lmn = std::log(static_cast<double>(m)) + std::log(static_cast<double>(n));
    for (i64 d : dm)
        for (i64 e : dn) logs.push_back(2.0 * std::log(static_cast<double>(d)) + 2.0 * std::log(static_cast<double>(e)) - lmn);
    const auto level_primes = N > 1 ? nt::factorize(N) : std::vector<nt::PrimePower>{};
    double total = 0.0;
    for (std::size_t i = 0; i < t_nodes_.size(); ++i) {
        const double t = t_nodes_[i];
        double local = 1.0;
        for (const auto& pp : level_primes) {
            const std::complex<double> s(1.0, 2.0 * t);
            local /= std::norm(1.0 - std::exp(-s * std::log(static_cast<double>(pp.p))));
        }
        double re = 0.0;
        for (double l : logs) re += std::cos(t * l);
        total += base_weights_[i] * local * re;
    }
    return 2.0 * total;  // integrand is even in t
}

double KuznetsovContext::kloosterman_tail(i64 m, i64 n, i64 N, i64 c_max) const {
    const i64 K = c_max / N;
    if (K < 1) throw DomainError("kloosterman_tail: c_max below the level");
    // |S(m,n;Nj)| <= tau(Nj) sqrt(gcd(m,n)) sqrt(Nj), tau(Nj) <= 2 tau(j) for prime N, |H+(x)| <= slope x
    const double g = static_cast<double>(std::gcd(m, n));
    const double level_factor = N > 1 ? 2.0 : 1.0;
    return hplus_->slope_constant() * 4.0 * pi * std::sqrt(static_cast<double>(m) * static_cast<double>(n)) * std::sqrt(g) *
           level_factor * std::pow(static_cast<double>(N), -1.5) * divisor_tail_bound(K);
}

GeometricSideReport KuznetsovContext::delta_full(i64 m, i64 n, i64 N, i64 c_max) const {
    if (m < 1 || n < 1) throw DomainError("delta_full: m, n must be positive");
    check_level(N);
    if (std::gcd(m * n, N) != 1) throw DomainError("delta_full: gcd(mn, N) must be 1");
    if (static_cast<double>(m) * static_cast<double>(n) >= static_cast<double>(N) * static_cast<double>(N))
        throw DomainError("delta_full: mn must be below N^2");
    if (c_max < N) throw DomainError("delta_full: c_max must be >= N");
    GeometricSideReport r;
    r.c_max = c_max;
    r.diagonal = m == n ? diagonal_ : 0.0;
    const double Nd = static_cast<double>(N);
    r.eisenstein = -(1.0 / (pi * Nd)) * (1.0 + 1.0 / Nd) * eisenstein_integral(m, n, N);
    const double x0 = 4.0 * pi * std::sqrt(static_cast<double>(m) * static_cast<double>(n));
    const auto count = static_cast<std::size_t>(c_max / N);
    auto parts = parallel_map<double>(count, [&](std::size_t j) {
        const i64 c = static_cast<i64>(j + 1) * N;
        return local_kloosterman()(m, n, c) * (*hplus_)(x0 / static_cast<double>(c)) / static_cast<double>(c);
    });
    r.kloosterman = tree_sum(parts);
    r.tail_bound = kloosterman_tail(m, n, N, c_max) + spectral_tail_ * (nt::divisor_count(m) * nt::divisor_count(n) + 1.0);
    r.total = r.diagonal + r.eisenstein + r.kloosterman;
    return r;
}

GeometricSideReport KuznetsovContext::delta_level_one(i64 m, i64 n) const {
    // H+ is evaluated at 4 pi sqrt(mn) / c for every c >= 1, so only mn = 1 stays in its domain
    if (m != 1 || n != 1) throw DomainError("delta_level_one: only m = n = 1 keeps every H+ argument within 4 pi");
    {
        std::lock_guard lock(mu_);
        auto it = level_one_.find({m, n});
        if (it != level_one_.end()) return it->second;
    }
    GeometricSideReport r;
    const i64 c_max = cfg_.level_one_c_max;
    r.c_max = c_max;
    r.diagonal = m == n ? diagonal_ : 0.0;
    r.eisenstein = -(1.0 / pi) * eisenstein_integral(m, n, 1);
    const double x0 = 4.0 * pi * std::sqrt(static_cast<double>(m) * static_cast<double>(n));
    auto parts = parallel_map<double>(static_cast<std::size_t>(c_max), [&](std::size_t j) {
        const i64 c = static_cast<i64>(j + 1);
        return local_kloosterman()(m, n, c) * (*hplus_)(x0 / static_cast<double>(c)) / static_cast<double>(c);
    });
    r.kloosterman = tree_sum(parts);
    r.tail_bound = kloosterman_tail(m, n, 1, c_max) + spectral_tail_ * 2.0;
    r.total = r.diagonal + r.eisenstein + r.kloosterman;
    std::lock_guard lock(mu_);
    level_one_.emplace(std::pair{m, n}, r);
    return r;
}

double KuznetsovContext::delta_star(i64 m, i64 n, i64 N, i64 c_max) const {
    const auto full = delta_full(m, n, N, c_max);
    const auto one = delta_level_one(m, n);
    return full.total - 2.0 / (static_cast<double>(N) + 1.0) * one.total;
}

OmegaStar KuznetsovContext::omega_star(i64 N, i64 c_max) const { return {delta_star(1, 1, N, c_max), diagonal_}; }

GeometricSideReport delta_full(i64 m, i64 n, i64 N, const tr::WeightFunction& h, i64 c_max) {
    return KuznetsovContext(h).delta_full(m, n, N, c_max);
}

double delta_star(i64 m, i64 n, i64 N, const tr::WeightFunction& h, i64 c_max) {
    return KuznetsovContext(h).delta_star(m, n, N, c_max);
}

OmegaStar omega_star(const tr::WeightFunction& h, i64 N, i64 c_max) { return KuznetsovContext(h).omega_star(N, c_max); }

}  // namespace lowlying::kz
