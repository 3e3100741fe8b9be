#include <array>
#include <cmath>
#include <numbers>

#include "lowlying/errors.hpp"
#include "lowlying/specfun.hpp"

namespace lowlying::sf {

namespace {

// B_{2j} / (2j)! for j = 1..12
constexpr std::array<double, 12> bernoulli_over_factorial = [] {
    constexpr std::array<double, 12> b = {
        1.0 / 6,          -1.0 / 30,     1.0 / 42,          -1.0 / 30,          5.0 / 66,          -691.0 / 2730,
        7.0 / 6,          -3617.0 / 510, 43867.0 / 798,     -174611.0 / 330,    854513.0 / 138,    -236364091.0 / 2730,
    };
    std::array<double, 12> out{};
    double fact = 1.0;
    for (int j = 1; j <= 12; ++j) {
        fact *= (2.0 * j - 1) * (2.0 * j);
        out[static_cast<std::size_t>(j - 1)] = b[static_cast<std::size_t>(j - 1)] / fact;
    }
    return out;
}();

cplx power(double base, cplx e) { return std::exp(e * std::log(base)); }

}  // namespace

cplx hurwitz_zeta(cplx s, double a, const EulerMaclaurin& em) {
    if (s == cplx(1.0, 0.0)) throw DomainError("hurwitz_zeta: pole at s = 1");
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("hurwitz_zeta: a must lie in (0, 1]");
    const int terms = std::min(em.bernoulli_terms, 12);
    const auto M = static_cast<int>(std::ceil(std::max(20.0, 2.0 * std::abs(s.imag())) * em.cutoff_scale));
    cplx sum = 0.0;
    for (int n = 0; n < M; ++n) sum += power(n + a, -s);
    const double x = M + a;
    const cplx xs = power(x, -s);
    sum += x * xs / (s - 1.0) + 0.5 * xs;
    // rising factorial s (s+1) ... (s + 2j - 2) times x^{-s-2j+1}
    cplx rising = s;
    cplx xpow = xs / x;
    for (int j = 1; j <= terms; ++j) {
        sum += bernoulli_over_factorial[static_cast<std::size_t>(j - 1)] * rising * xpow;
        rising *= (s + (2.0 * j - 1.0)) * (s + 2.0 * j);
        xpow /= x * x;
    }
    return sum;
}

cplx riemann_zeta(cplx s, const EulerMaclaurin& em) { return hurwitz_zeta(s, 1.0, em); }

cplx dirichlet_l(cplx s, const nt::DirichletCharacter& chi, const EulerMaclaurin& em) {
    const nt::i64 q = chi.modulus();
    if (q == 1) return riemann_zeta(s, em);
    if (chi.is_principal()) {
        if (s == cplx(1.0, 0.0)) throw DomainError("dirichlet_l: pole at s = 1 for the principal character");
        return zeta_n(s, q, em);
    }
    cplx sum = 0.0;
    const double qd = static_cast<double>(q);
    for (nt::i64 a = 1; a <= q; ++a) {
        cplx v = chi(a);
        if (v == 0.0) continue;
        sum += v * hurwitz_zeta(s, static_cast<double>(a) / qd, em);
    }
    return sum * power(qd, -s);
}

cplx zeta_n(cplx s, nt::i64 N, const EulerMaclaurin& em) {
    if (N < 1) throw DomainError("zeta_n: N must be >= 1");
    cplx z = riemann_zeta(s, em);
    for (const auto& pp : nt::factorize(N)) z *= 1.0 - power(static_cast<double>(pp.p), -s);
    return z;
}

cplx completed_l(cplx s, const nt::DirichletCharacter& chi, const EulerMaclaurin& em) {
    if (!chi.is_primitive()) throw DomainError("completed_l: character must be primitive");
    const nt::i64 q = chi.modulus();
    if (q == 1) {
        if (s == cplx(1.0, 0.0) || s == cplx(0.0, 0.0)) return 0.5;
        return 0.5 * s * (s - 1.0) * power(std::numbers::pi, -0.5 * s) * complex_gamma(0.5 * s) * riemann_zeta(s, em);
    }
    const double a = chi.is_even() ? 0.0 : 1.0;
    const cplx h = 0.5 * (s + a);
    return power(static_cast<double>(q) / std::numbers::pi, h) * complex_gamma(h) * dirichlet_l(s, chi, em);
}

cplx root_number(const nt::DirichletCharacter& chi) {
    if (!chi.is_primitive()) throw DomainError("root_number: character must be primitive");
    if (chi.modulus() == 1) return 1.0;
    const cplx ia = chi.is_even() ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
    return nt::gauss_sum(chi) / (ia * std::sqrt(static_cast<double>(chi.modulus())));
}

double functional_equation_residual(cplx s, const nt::DirichletCharacter& chi, const EulerMaclaurin& em) {
    const cplx lhs = completed_l(s, chi, em);
    const cplx rhs = root_number(chi) * completed_l(1.0 - s, chi.conj(), em);
    return std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
}

}  // namespace lowlying::sf
