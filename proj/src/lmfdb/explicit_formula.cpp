#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lowlying/errors.hpp"
#include "lowlying/kuznetsov.hpp"
#include "lowlying/lmfdb.hpp"
#include "lowlying/ntcore.hpp"
#include "lowlying/specfun.hpp"

namespace lowlying::lmfdb {

namespace {

constexpr double pi = std::numbers::pi;
using gk = boost::math::quadrature::gauss_kronrod<double, 15>;

// integral of f over [lower, upper] by fixed GK15 pieces
template <class F>
double piecewise(F&& f, double lower, double upper, double width) {
    double total = 0.0;
    for (double a = lower; a < upper; a += width) total += gk::integrate(f, a, std::min(a + width, upper), 0);
    return total;
}

// sup of |phi(u)| u^2 sampled on [U - w, U]
double decay_constant(const tr::TestFunction& phi, double U, double w) {
    double c = 0.0;
    for (int i = 0; i <= 64; ++i) {
        const double u = U - w + w * i / 64.0;
        c = std::max(c, std::abs(phi.phi(u)) * u * u);
    }
    return c;
}

}  // namespace

ExplicitFormulaReport explicit_formula_check(const HeckeEigenvalueSource& source, const tr::TestFunction& phi, double X,
                                             std::size_t max_zeros) {
    if (!(X >= 2.0)) throw DomainError("explicit_formula_check: X must be >= 2");
    const std::size_t used = max_zeros == 0 ? source.zeros.size() : std::min(max_zeros, source.zeros.size());
    if (used < 10) throw InsufficientDataError("explicit_formula_check: fewer than 10 zeros");
    const auto prime = kz::prime_sum_side(phi, X, source);  // throws on short coefficient coverage

    const double L = std::log(X);
    const double scale = L / (2.0 * pi);
    ExplicitFormulaReport r;
    r.zeros_used = used;
    for (std::size_t i = 0; i < used; ++i) r.zero_side += 2.0 * phi.phi(source.zeros[i] * scale);
    r.prime_side = prime.value;
    r.gap = std::abs(r.zero_side - r.prime_side);

    // gamma-factor shifts mu_j: delta +- i t for Maass forms, (k -+ 1)/2 for weight k
    std::vector<std::complex<double>> mu;
    if (source.kind == FormKind::maass) {
        const double delta = source.sign == 1 ? 0.0 : 1.0;
        mu = {{delta, source.spectral_parameter}, {delta, -source.spectral_parameter}};
    } else {
        const double k = source.spectral_parameter;
        mu = {{(k - 1.0) / 2.0, 0.0}, {(k + 1.0) / 2.0, 0.0}};
    }
    const double phi_hat0 = phi.phi_hat(0.0);
    auto gamma_density = [&](double u) {
        double s = 0.0;
        for (auto m : mu) s += sf::complex_digamma(0.25 + m / 2.0 + std::complex<double>(0.0, pi * u / L)).real();
        return s;
    };
    const double U = 400.0 / phi.sigma();
    const double width = 0.5 / phi.sigma();
    const double gamma_integral = 2.0 * piecewise([&](double u) { return phi.phi(u) * gamma_density(u); }, 0.0, U, width);
    r.archimedean = phi_hat0 * (std::log(static_cast<double>(source.level)) - 2.0 * std::log(pi)) / L + gamma_integral / L;

    // exact prime-power sum with alpha^nu + beta^nu
    double exact = 0.0;
    const double reach = std::pow(X, phi.sigma());
    for (auto p : nt::primes_up_to(static_cast<nt::i64>(std::floor(reach)))) {
        const double lp = std::log(static_cast<double>(p));
        const bool ramified = source.level % p == 0;
        const double lam = source.lambda(p);
        for (int nu = 1; nu * lp / L < phi.sigma(); ++nu) {
            const double local = ramified ? std::pow(lam, nu)
                                          : kz::hecke_power(lam, nu, false) - (nu >= 2 ? kz::hecke_power(lam, nu - 2, false) : 0.0);
            exact += local * std::pow(static_cast<double>(p), -0.5 * nu) * phi.phi_hat(nu * lp / L) * lp / L;
        }
    }
    exact *= -2.0;
    r.prime_power_correction = exact - r.prime_side;
    r.completed_gap = std::abs(r.zero_side - r.prime_side - r.archimedean - r.prime_power_correction);

    // zeros past the last one used, with a generous zero density
    const double a = std::abs(mu[0]);
    auto density = [&](double g) {
        return (std::log(static_cast<double>(source.level)) + 2.0 * std::max(1.0, std::log((g + a + 2.0 * pi) / (2.0 * pi)))) /
               (2.0 * pi);
    };
    const double u0 = source.zeros[used - 1] * scale;
    const double zero_tail = 2.0 * piecewise([&](double u) { return std::abs(phi.phi(u)) * density(u / scale); }, u0, u0 + U, width) / scale;
    const double c_tail = decay_constant(phi, u0 + U, 1.0 / phi.sigma());
    const double far = u0 + U;
    const double zero_far = 2.0 * c_tail * (density(far / scale) + 1.0) / (far * scale);
    const double arch_far = 2.0 * decay_constant(phi, U, 1.0 / phi.sigma()) * (std::log(U + a + 3.0) + 1.0) / (U * L);
    r.truncation = zero_tail + zero_far + arch_far;
    return r;
}

}  // namespace lowlying::lmfdb
