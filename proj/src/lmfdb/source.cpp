#include <cmath>
#include <numeric>
#include <string>

#include "lowlying/errors.hpp"
#include "lowlying/hecke_source.hpp"
#include "lowlying/ntcore.hpp"

namespace lowlying {

using i64 = std::int64_t;

bool operator==(const HeckeEigenvalueSource& a, const HeckeEigenvalueSource& b) {
    return a.label == b.label && a.kind == b.kind && a.level == b.level && a.spectral_parameter == b.spectral_parameter &&
           a.sign == b.sign && a.coefficients == b.coefficients && a.zeros == b.zeros && a.fetched_at == b.fetched_at;
}

void validate_source(const HeckeEigenvalueSource& s) {
    if (s.coefficients.empty()) throw InvariantError(s.label + ": no coefficients");
    if (std::abs(s.lambda(1) - 1.0) > 1e-6) throw InvariantError(s.label + ": lambda(1) != 1");
    const i64 n_max = s.n_max();
    for (i64 m = 2; m <= n_max; ++m) {
        for (i64 n = m; m * n <= n_max; ++n) {
            double rhs = 0.0;
            for (i64 d : nt::divisors(std::gcd(m, n)))
                if (std::gcd(d, s.level) == 1) rhs += s.lambda(m * n / (d * d));
            if (std::abs(s.lambda(m) * s.lambda(n) - rhs) > 1e-6)
                throw InvariantError(s.label + ": Hecke relation fails at (" + std::to_string(m) + ", " + std::to_string(n) + ")");
        }
    }
    for (i64 p : nt::primes_up_to(n_max)) {
        if (s.level % p == 0) continue;
        if (std::abs(s.lambda(p)) > 2.0 * std::pow(static_cast<double>(p), 7.0 / 64.0) + 1e-9)
            throw InvariantError(s.label + ": Kim-Sarnak bound fails at p = " + std::to_string(p));
    }
}

}  // namespace lowlying
