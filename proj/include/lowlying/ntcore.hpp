#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

namespace lowlying::nt {

using i64 = std::int64_t;
using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// elementary arithmetic

i64 mod(i64 a, i64 m);
i64 mod_pow(i64 base, i64 exp, i64 m);
// inverse of a modulo m; requires gcd(a, m) = 1
i64 mod_inverse(i64 a, i64 m);

struct PrimePower {
    i64 p;
    int e;
    i64 value() const;
};

std::vector<PrimePower> factorize(i64 n);
std::vector<i64> divisors(i64 n);
std::vector<i64> primes_up_to(i64 n);
bool is_prime(i64 n);
i64 totient(i64 n);
int moebius(i64 n);
int divisor_count(i64 n);
double mangoldt(i64 n);

// e(a/c) = exp(2 pi i a/c), evaluated from the reduced fraction.
cplx unit_root(i64 a, i64 c);

// ---------------------------------------------------------------------------
// sieve tables

struct ArithTables {
    i64 limit = 0;
    std::vector<double> mangoldt;         // index n in [0, limit]
    std::vector<std::int8_t> moebius;
    std::vector<std::uint32_t> totient;
    std::vector<std::uint32_t> divisor_count;

    double lambda(i64 n) const { return mangoldt[static_cast<std::size_t>(n)]; }
    int mu(i64 n) const { return moebius[static_cast<std::size_t>(n)]; }
    std::uint32_t phi(i64 n) const { return totient[static_cast<std::size_t>(n)]; }
    std::uint32_t tau(i64 n) const { return divisor_count[static_cast<std::size_t>(n)]; }
};

inline constexpr std::size_t default_sieve_budget_bytes = std::size_t{2} << 30;

ArithTables sieve_arith(i64 limit, std::size_t memory_budget = default_sieve_budget_bytes);

// ---------------------------------------------------------------------------
// Dirichlet characters

namespace detail {
struct CharacterGroupData;
}

// A character mod q labelled by its exponent vector on the fixed generator set
// (smallest primitive root per odd prime power; -1 and 5 for 2^k, k >= 3).
class DirichletCharacter {
public:
    DirichletCharacter(std::shared_ptr<const detail::CharacterGroupData> group, std::vector<i64> exponents);

    i64 modulus() const;
    std::size_t index() const { return index_; }
    std::span<const i64> exponents() const { return exponents_; }
    i64 conductor() const { return conductor_; }
    bool is_primitive() const { return conductor_ == modulus(); }
    bool is_principal() const { return principal_; }
    bool is_even() const;

    // Phase k in [0, order_denominator()) with chi(n) = e(k / D), or -1 when gcd(n, q) > 1.
    i64 phase(i64 n) const;
    i64 order_denominator() const;
    cplx operator()(i64 n) const;

    DirichletCharacter conj() const;
    DirichletCharacter operator*(const DirichletCharacter& other) const;

    const std::shared_ptr<const detail::CharacterGroupData>& group() const { return group_; }

private:
    std::shared_ptr<const detail::CharacterGroupData> group_;
    std::vector<i64> exponents_;
    std::size_t index_ = 0;
    i64 conductor_ = 1;
    bool principal_ = true;
};

std::vector<DirichletCharacter> character_group(i64 q);
std::vector<DirichletCharacter> primitive_characters(i64 q);
DirichletCharacter principal_character(i64 q);
// Character mod q with the given linear index (as in character_group order).
DirichletCharacter character_at(i64 q, std::size_t index);
// The primitive character mod conductor inducing chi.
DirichletCharacter primitive_inducer(const DirichletCharacter& chi);
// Character mod lcm(q1, q2) agreeing with chi1 * chi2 on integers coprime to both moduli.
DirichletCharacter lift_product(const DirichletCharacter& a, const DirichletCharacter& b);

cplx gauss_sum(const DirichletCharacter& chi);

// ---------------------------------------------------------------------------
// Kloosterman sums

struct KloostermanQuery {
    i64 m = 0;
    i64 n = 0;
    i64 c = 1;
};

inline constexpr i64 kloosterman_direct_limit = 10000;
inline constexpr double kloosterman_imag_tolerance = 1e-10;

double kloosterman(const KloostermanQuery& q);
double kloosterman_direct(const KloostermanQuery& q);

// Per-modulus tables (units, inverses, roots of unity) for repeated evaluation.
class KloostermanTable {
public:
    explicit KloostermanTable(i64 c);
    i64 modulus() const { return c_; }
    double operator()(i64 m, i64 n) const;

private:
    i64 c_;
    std::vector<std::int32_t> units_;
    std::vector<std::int32_t> inverses_;
    std::vector<cplx> roots_;
};

// Caches tables for moduli <= kloosterman_direct_limit and recombines larger
// moduli over coprime prime-power blocks. Not thread safe; use one per worker.
class KloostermanEvaluator {
public:
    double operator()(i64 m, i64 n, i64 c);

private:
    const KloostermanTable& table(i64 c);
    std::unordered_map<i64, std::unique_ptr<KloostermanTable>> tables_;
    std::size_t bytes_ = 0;
    std::size_t cache_budget_ = std::size_t{64} << 20;
};

// (1/phi(c)) sum over all chi mod c of conj(chi(n)) tau(chi)^2, principal included.
cplx kloosterman_char_expansion(i64 n, i64 c);

cplx sigma_2it(i64 n, double t);

// Weil bound tau(c) sqrt(gcd(m, n, c)) sqrt(c).
double weil_bound(i64 m, i64 n, i64 c);

}  // namespace lowlying::nt
