#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "lowlying/hecke_source.hpp"
#include "lowlying/transforms.hpp"

namespace lowlying::kz {

using i64 = std::int64_t;

struct GeometricSideReport {
    double diagonal = 0.0;
    double eisenstein = 0.0;
    double kloosterman = 0.0;
    i64 c_max = 0;
    double tail_bound = 0.0;
    double total = 0.0;
};

struct DensityReport {
    i64 N = 0;
    double sigma = 0.0;
    std::string h_id;
    std::string phi_id;
    i64 c_max = 0;
    double main_terms = 0.0;
    double kloosterman_term = 0.0;
    double eisenstein_term = 0.0;
    double omega_star = 0.0;
    double density_value = 0.0;
    double ks_prediction = 0.0;
    double deviation = 0.0;
    double tail_bound = 0.0;
    std::size_t prime_powers = 0;
};

struct OmegaStar {
    double geometric = 0.0;
    double integral = 0.0;
};

struct CharacterFormReport {
    double error_expression = 0.0;
    double reconstruction_difference = 0.0;  // max over checked c
    i64 c_checked_max = 0;
};

struct KuznetsovConfig {
    i64 level_one_c_max = 10000;     // truncation of the level-1 Kloosterman sum
    std::size_t max_prime_powers = 2'000'000;
    int spectral_panels = 40;        // Gauss-Legendre panels on [0, t_cut]
};

// Upper bound for sum_{j > K} tau(j) j^{-3/2}.
double divisor_tail_bound(i64 K);

// Holds the spectral weight, its H+ evaluator and cached spectral grids.
// Safe for concurrent use after construction; caches are guarded internally.
class KuznetsovContext {
public:
    explicit KuznetsovContext(const tr::WeightFunction& h, KuznetsovConfig cfg = {});

    const tr::WeightFunction& weight() const { return h_; }
    const tr::HPlusEvaluator& hplus() const { return *hplus_; }
    const KuznetsovConfig& config() const { return cfg_; }

    // (1/pi^2) int t h(t) tanh(pi t) dt over the real line
    double diagonal_integral() const { return diagonal_; }
    // int h(t) sigma_{2it}(m) sigma_{2it}(n) / ((mn)^{it} |zeta_N(1 + 2it)|^2) dt, N = 1 allowed
    double eisenstein_integral(i64 m, i64 n, i64 N) const;

    GeometricSideReport delta_full(i64 m, i64 n, i64 N, i64 c_max) const;
    // level 1: single cusp, all c >= 1; cached per (m, n)
    GeometricSideReport delta_level_one(i64 m, i64 n) const;
    double delta_star(i64 m, i64 n, i64 N, i64 c_max) const;
    OmegaStar omega_star(i64 N, i64 c_max) const;

    // |H+(x)| <= slope * x, used by tail estimates
    double kloosterman_tail(i64 m, i64 n, i64 N, i64 c_max) const;

private:
    tr::WeightFunction h_;
    KuznetsovConfig cfg_;
    std::unique_ptr<tr::HPlusEvaluator> hplus_;
    double diagonal_ = 0.0;
    double spectral_tail_ = 0.0;
    std::vector<double> t_nodes_;
    std::vector<double> base_weights_;  // w_i h(t_i) / |zeta(1 + 2 i t_i)|^2
    mutable std::mutex mu_;
    mutable std::map<std::pair<i64, i64>, GeometricSideReport> level_one_;
};

GeometricSideReport delta_full(i64 m, i64 n, i64 N, const tr::WeightFunction& h, i64 c_max);
double delta_star(i64 m, i64 n, i64 N, const tr::WeightFunction& h, i64 c_max);
OmegaStar omega_star(const tr::WeightFunction& h, i64 N, i64 c_max);

// lambda(p^nu) from lambda(p): Chebyshev recurrence, or lambda_p^nu when p divides the level
double hecke_power(double lambda_p, int nu, bool ramified);

struct PrimeSumSide {
    double value = 0.0;
    double half_phi0 = 0.0;
    std::vector<double> by_nu;  // by_nu[nu - 1]: the -2 sum restricted to that nu
    double tail_from(int nu) const;
};
PrimeSumSide prime_sum_side(const tr::TestFunction& phi, double X, const HeckeEigenvalueSource& source);

// Prime powers p^nu <= N^sigma with p != N, enumerated nu outermost then ascending p.
struct PrimePowerTerm {
    i64 p;
    int nu;
    i64 value;
    double weight;  // p^{-nu/2} phi_hat(nu log p / log N) log p / log N
};
std::vector<PrimePowerTerm> prime_power_terms(const tr::TestFunction& phi, i64 N, std::size_t limit);

DensityReport density_geometric(const tr::TestFunction& phi, const KuznetsovContext& ctx, i64 N, i64 c_max);
DensityReport density_geometric(const tr::TestFunction& phi, const tr::WeightFunction& h, i64 N, i64 c_max);

std::string density_csv_header();
std::string density_csv_row(const DensityReport& r);
std::string density_json(const DensityReport& r);

// reconstruct_c_max bounds the moduli where the Gauss-sum reconstruction is compared.
CharacterFormReport error_term_character_form(const tr::TestFunction& phi, const KuznetsovContext& ctx, i64 N, i64 c_max,
                                              i64 reconstruct_c_max = 0);

}  // namespace lowlying::kz
