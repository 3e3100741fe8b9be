#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lowlying/errors.hpp"
#include "lowlying/ntcore.hpp"

namespace lowlying::nt {

i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

i64 mod_pow(i64 base, i64 exp, i64 m) {
    if (m == 1) return 0;
    __int128 result = 1;
    __int128 b = mod(base, m);
    while (exp > 0) {
        if (exp & 1) result = result * b % m;
        b = b * b % m;
        exp >>= 1;
    }
    return static_cast<i64>(result);
}

i64 mod_inverse(i64 a, i64 m) {
    if (m == 1) return 0;
    i64 old_r = mod(a, m), r = m;
    i64 old_s = 1, s = 0;
    while (r != 0) {
        i64 q = old_r / r;
        i64 t = old_r - q * r;
        old_r = r;
        r = t;
        t = old_s - q * s;
        old_s = s;
        s = t;
    }
    if (old_r != 1) throw DomainError("mod_inverse: argument not invertible");
    return mod(old_s, m);
}

i64 PrimePower::value() const {
    i64 v = 1;
    for (int i = 0; i < e; ++i) v *= p;
    return v;
}

std::vector<PrimePower> factorize(i64 n) {
    if (n < 1) throw DomainError("factorize: n must be positive");
    std::vector<PrimePower> out;
    for (i64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p != 0) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.push_back({p, e});
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

std::vector<i64> divisors(i64 n) {
    std::vector<i64> out{1};
    for (const auto& [p, e] : factorize(n)) {
        std::size_t base = out.size();
        i64 pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<i64> primes_up_to(i64 n) {
    std::vector<i64> out;
    if (n < 2) return out;
    std::vector<bool> composite(static_cast<std::size_t>(n + 1), false);
    for (i64 i = 2; i <= n; ++i) {
        if (composite[static_cast<std::size_t>(i)]) continue;
        out.push_back(i);
        for (i64 j = i * i; j <= n; j += i) composite[static_cast<std::size_t>(j)] = true;
    }
    return out;
}

bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

i64 totient(i64 n) {
    i64 r = n;
    for (const auto& pp : factorize(n)) r = r / pp.p * (pp.p - 1);
    return r;
}

int moebius(i64 n) {
    int r = 1;
    for (const auto& pp : factorize(n)) {
        if (pp.e > 1) return 0;
        r = -r;
    }
    return r;
}

int divisor_count(i64 n) {
    int r = 1;
    for (const auto& pp : factorize(n)) r *= pp.e + 1;
    return r;
}

double mangoldt(i64 n) {
    if (n < 2) return 0.0;
    auto f = factorize(n);
    return f.size() == 1 ? std::log(static_cast<double>(f[0].p)) : 0.0;
}

cplx unit_root(i64 a, i64 c) {
    a = mod(a, c);
    i64 g = std::gcd(a, c);
    a /= g;
    c /= g;
    switch (c) {
        case 1: return {1.0, 0.0};
        case 2: return {-1.0, 0.0};
        case 4: return a == 1 ? cplx{0.0, 1.0} : cplx{0.0, -1.0};
        default: break;
    }
    // symmetric representative keeps the angle in [-pi, pi]
    i64 s = 2 * a > c ? a - c : a;
    double angle = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(c);
    return {std::cos(angle), std::sin(angle)};
}

ArithTables sieve_arith(i64 limit, std::size_t memory_budget) {
    if (limit < 1) throw DomainError("sieve_arith: limit must be >= 1");
    if (limit > 100'000'000) throw DomainError("sieve_arith: limit above 1e8");
    const std::size_t n = static_cast<std::size_t>(limit) + 1;
    // four output tables plus the smallest-prime-factor scratch array
    const std::size_t need = n * (sizeof(double) + sizeof(std::int8_t) + 3 * sizeof(std::uint32_t));
    if (need > memory_budget) throw BudgetError("sieve_arith: tables exceed the memory budget");

    ArithTables t;
    t.limit = limit;
    t.mangoldt.assign(n, 0.0);
    t.moebius.assign(n, 0);
    t.totient.assign(n, 0);
    t.divisor_count.assign(n, 0);
    std::vector<std::uint32_t> spf(n, 0);
    std::vector<std::uint32_t> primes;
    for (std::size_t i = 2; i < n; ++i) {
        if (spf[i] == 0) {
            spf[i] = static_cast<std::uint32_t>(i);
            primes.push_back(static_cast<std::uint32_t>(i));
        }
        for (std::uint32_t p : primes) {
            std::size_t ip = i * p;
            if (p > spf[i] || ip >= n) break;
            spf[ip] = p;
        }
    }
    t.moebius[1] = 1;
    t.totient[1] = 1;
    t.divisor_count[1] = 1;
    if (n > 0) t.totient[0] = 0;
    for (std::size_t i = 2; i < n; ++i) {
        std::uint32_t p = spf[i];
        std::size_t m = i;
        int e = 0;
        std::uint32_t pe = 1;
        while (m % p == 0) {
            m /= p;
            ++e;
            pe *= p;
        }
        t.divisor_count[i] = t.divisor_count[m] * static_cast<std::uint32_t>(e + 1);
        t.totient[i] = t.totient[m] * (pe / p) * (p - 1);
        t.moebius[i] = e > 1 ? 0 : static_cast<std::int8_t>(-t.moebius[m]);
        t.mangoldt[i] = m == 1 ? std::log(static_cast<double>(p)) : 0.0;
    }
    return t;
}

cplx sigma_2it(i64 n, double t) {
    if (n < 1) throw DomainError("sigma_2it: n must be >= 1");
    cplx s = 0.0;
    for (i64 d : divisors(n)) {
        double a = 2.0 * t * std::log(static_cast<double>(d));
        s += cplx(std::cos(a), std::sin(a));
    }
    return s;
}

double weil_bound(i64 m, i64 n, i64 c) {
    i64 g = std::gcd(std::gcd(m < 0 ? -m : m, n < 0 ? -n : n), c);
    return divisor_count(c) * std::sqrt(static_cast<double>(g)) * std::sqrt(static_cast<double>(c));
}

}  // namespace lowlying::nt
