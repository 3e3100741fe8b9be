#include <cmath>
#include <vector>

#include "lowlying/dirpoly.hpp"
#include "lowlying/errors.hpp"
#include "lowlying/ntcore.hpp"

namespace lowlying::dp {

namespace {

using wide = __int128;

wide binomial(int n, int k) {
    wide r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// out[n] = sum_{d | n} in[d]
void convolve_with_one(std::vector<wide>& v) {
    const std::size_t n = v.size() - 1;
    std::vector<wide> out(v.size(), 0);
    for (std::size_t d = 1; d <= n; ++d) {
        if (v[d] == 0) continue;
        for (std::size_t m = d; m <= n; m += d) out[m] += v[d];
    }
    v.swap(out);
}

// out[n] = sum_{m <= z, m | n} mu(m) in[n / m]
void convolve_with_mu(std::vector<wide>& v, const std::vector<std::pair<std::size_t, int>>& mu_z) {
    const std::size_t n = v.size() - 1;
    std::vector<wide> out(v.size(), 0);
    for (const auto& [m, mu] : mu_z)
        for (std::size_t k = 1; k * m <= n; ++k) out[k * m] += mu * v[k];
    v.swap(out);
}

}  // namespace

HeathBrownReport heath_brown_check(i64 n_max, i64 z, int K) {
    if (n_max < 1 || z < 1 || K < 1) throw DomainError("heath_brown_check: n_max, z, K must be positive");
    // reject n_max > z^K without overflowing
    {
        double zk = 1.0;
        for (int i = 0; i < K && zk <= static_cast<double>(n_max); ++i) zk *= static_cast<double>(z);
        if (zk < static_cast<double>(n_max)) throw DomainError("heath_brown_check: n_max exceeds z^K");
    }
    if (n_max > heath_brown_max_n) throw BudgetError("heath_brown_check: n_max above 2^20");

    const auto size = static_cast<std::size_t>(n_max) + 1;
    std::vector<std::pair<std::size_t, int>> mu_z;
    for (i64 m = 1; m <= std::min(z, n_max); ++m)
        if (int mu = nt::moebius(m); mu != 0) mu_z.emplace_back(static_cast<std::size_t>(m), mu);

    // term j is C(K, j) (-1)^{j-1} (1^{*(j-1)} * mu_z^{*j}); the log factor is applied at the end
    std::vector<wide> term(size, 0), total(size, 0);
    term[1] = 1;
    convolve_with_mu(term, mu_z);
    for (int j = 1; j <= K; ++j) {
        if (j > 1) {
            convolve_with_one(term);
            convolve_with_mu(term, mu_z);
        }
        const wide c = binomial(K, j) * (j % 2 == 1 ? 1 : -1);
        for (std::size_t n = 1; n < size; ++n) total[n] += c * term[n];
    }

    const auto tables = nt::sieve_arith(n_max);
    HeathBrownReport r;
    r.integer_part_is_moebius = true;
    for (std::size_t n = 1; n < size; ++n)
        if (total[n] != tables.mu(static_cast<i64>(n))) r.integer_part_is_moebius = false;

    std::vector<double> expansion(size, 0.0);
    for (std::size_t a = 2; a < size; ++a) {
        const double la = std::log(static_cast<double>(a));
        for (std::size_t b = 1; a * b < size; ++b)
            if (total[b] != 0) expansion[a * b] += la * static_cast<double>(total[b]);
    }
    for (std::size_t n = 1; n < size; ++n) {
        const double diff = std::abs(expansion[n] - tables.lambda(static_cast<i64>(n)));
        if (diff > r.max_residual) {
            r.max_residual = diff;
            r.worst_n = static_cast<i64>(n);
        }
    }
    return r;
}

}  // namespace lowlying::dp
