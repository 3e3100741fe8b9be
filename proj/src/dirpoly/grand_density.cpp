#include <cmath>
#include <map>
#include <numeric>

#include "lowlying/dirpoly.hpp"
#include "lowlying/errors.hpp"
#include "lowlying/ntcore.hpp"
#include "lowlying/specfun.hpp"

namespace lowlying::dp {

GrandDensityResult grand_density_ratio(i64 Q, i64 k, double T, double beta, const GrandDensityConfig& cfg) {
    if (Q < 1 || k < 1 || !(T > 0.0)) throw DomainError("grand_density_ratio: need Q, k >= 1 and T > 0");
    if (!(beta >= 0.5 && beta <= 1.0)) throw DomainError("grand_density_ratio: beta must lie in [1/2, 1]");
    if (Q > 30 || k > 10 || T > 30.0) throw BudgetError("grand_density_ratio: desk scale is Q <= 30, k <= 10, T <= 30");

    sf::ZeroCountConfig zc;
    zc.scan_step = cfg.scan_step;
    zc.max_halvings = cfg.max_halvings;
    const bool on_line = beta <= 0.5;

    // primitive inducers repeat across (q, xi); count each once
    std::map<std::pair<i64, std::size_t>, sf::ZeroCountResult> counted;
    GrandDensityResult r;
    const auto xis = nt::character_group(k);
    for (i64 q = 1; q <= Q; ++q) {
        if (std::gcd(q, k) != 1) continue;
        for (const auto& psi : nt::primitive_characters(q)) {
            for (const auto& xi : xis) {
                const auto chi = nt::primitive_inducer(nt::lift_product(xi, psi));
                const auto key = std::pair{chi.modulus(), chi.index()};
                auto it = counted.find(key);
                if (it == counted.end()) {
                    sf::ZeroCountQuery query{beta, T, chi};
                    it = counted.emplace(key, sf::zero_count_detailed(query, zc)).first;
                }
                ++r.characters;
                r.lhs += it->second.box_count;
                if (on_line) r.line_count += it->second.line_count;
            }
        }
    }
    const double kq = static_cast<double>(k) * static_cast<double>(Q);
    r.rhs = std::pow(kq * static_cast<double>(Q) * T, 2.0 * (1.0 - beta)) * std::pow(std::log(kq * T), cfg.log_power);
    return r;
}

}  // namespace lowlying::dp
