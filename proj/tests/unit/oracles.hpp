#pragma once

// Independent reference computations shared by the unit tests. They use long double and
// textbook formulas only, never the library under test.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

using ld = long double;
using cld = std::complex<long double>;
inline constexpr ld pi = 3.141592653589793238462643383279502884L;

inline cld e(std::int64_t a, std::int64_t c) {
    const ld x = 2 * pi * static_cast<ld>(((a % c) + c) % c) / static_cast<ld>(c);
    return {std::cos(x), std::sin(x)};
}

inline int moebius(std::int64_t n) {
    int mu = 1;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        n /= p;
        if (n % p == 0) return 0;
        mu = -mu;
    }
    return n > 1 ? -mu : mu;
}

inline std::int64_t inverse(std::int64_t a, std::int64_t c) {
    for (std::int64_t x = 1; x < c; ++x)
        if ((a * x) % c == 1) return x;
    return c == 1 ? 0 : -1;
}

// S(m, n; c) by enumeration
inline cld kloosterman(std::int64_t m, std::int64_t n, std::int64_t c) {
    cld s = 0;
    for (std::int64_t x = 0; x < c; ++x) {
        if (std::gcd(x, c) != 1) continue;
        const std::int64_t xb = c == 1 ? 0 : inverse(x, c);
        s += e(m * x + n * xb, c);
    }
    return s;
}

// log Gamma(z) by Stirling after shifting Re z above 20, then recurrence back
inline cld lgamma(cld z) {
    cld shift = 0;
    while (z.real() < 20) {
        shift += std::log(z);
        z += 1.0L;
    }
    const ld b[] = {1.0L / 12, -1.0L / 360, 1.0L / 1260, -1.0L / 1680, 1.0L / 1188, -691.0L / 360360, 1.0L / 156};
    cld series = 0, zp = z;
    const cld z2 = z * z;
    for (ld c : b) {
        series += c / zp;
        zp *= z2;
    }
    return (z - 0.5L) * std::log(z) - z + 0.5L * std::log(2 * pi) + series - shift;
}

inline cld gamma(cld z) { return std::exp(lgamma(z)); }

// J_nu(x) for complex order nu by its power series in long double
inline cld bessel_j(cld nu, ld x, int terms = 80) {
    cld sum = 0;
    for (int m = 0; m < terms; ++m) {
        const cld term = std::exp(static_cast<ld>(2 * m) * std::log(x / 2) + nu * std::log(x / 2) -
                                  lgamma(cld(m + 1.0L)) - lgamma(nu + cld(m + 1.0L)));
        sum += (m % 2 ? -1.0L : 1.0L) * term;
    }
    return sum;
}

// Catalan's constant by the alternating series with pairwise averaging of partial sums
inline ld catalan() {
    ld s = 0, prev = 0;
    const int n = 2000000;
    for (int k = 0; k < n; ++k) {
        prev = s;
        s += (k % 2 ? -1.0L : 1.0L) / ((2.0L * k + 1) * (2.0L * k + 1));
    }
    return (s + prev) / 2;
}

}  // namespace oracle
