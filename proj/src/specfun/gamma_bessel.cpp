#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "lowlying/errors.hpp"
#include "lowlying/specfun.hpp"

namespace lowlying::sf {

namespace {

constexpr double lanczos_g = 7.0;
constexpr std::array<double, 9> lanczos_coef = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
};

bool is_nonpositive_integer(cplx z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && std::floor(z.real()) == z.real();
}

// Gamma(z) for Re z >= 1/2
cplx lanczos(cplx z) {
    z -= 1.0;
    cplx x = lanczos_coef[0];
    for (std::size_t i = 1; i < lanczos_coef.size(); ++i) x += lanczos_coef[i] / (z + static_cast<double>(i));
    cplx t = z + lanczos_g + 0.5;
    return std::sqrt(2.0 * std::numbers::pi) * std::exp((z + 0.5) * std::log(t) - t) * x;
}

}  // namespace

cplx complex_gamma(cplx z) {
    if (is_nonpositive_integer(z)) throw DomainError("complex_gamma: pole at a nonpositive integer");
    if (z.real() < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * z) * lanczos(1.0 - z));
    return lanczos(z);
}

cplx complex_rgamma(cplx z) {
    if (is_nonpositive_integer(z)) return 0.0;
    if (z.real() < 0.5) return std::sin(std::numbers::pi * z) * lanczos(1.0 - z) / std::numbers::pi;
    return 1.0 / lanczos(z);
}

cplx complex_digamma(cplx z) {
    if (is_nonpositive_integer(z)) throw DomainError("complex_digamma: pole");
    if (z.real() < 0.5) return complex_digamma(1.0 - z) - std::numbers::pi / std::tan(std::numbers::pi * z);
    cplx shift = 0.0;
    while (std::abs(z) < 12.0 || z.real() < 6.0) {
        shift -= 1.0 / z;
        z += 1.0;
    }
    // asymptotic series with B_2, ..., B_12
    static constexpr double coef[] = {1.0 / 12, -1.0 / 120, 1.0 / 252, -1.0 / 240, 1.0 / 132, -691.0 / 32760};
    const cplx w = 1.0 / (z * z);
    cplx sum = 0.0, pw = w;
    for (double c : coef) {
        sum += c * pw;
        pw *= w;
    }
    return shift + std::log(z) - 0.5 / z - sum;
}

double bessel_j_integer(int k, double x) {
    if (k < 0) throw DomainError("bessel_j_integer: order must be >= 0");
    if (x < 0) throw DomainError("bessel_j_integer: x must be >= 0");
    if (x == 0.0) return k == 0 ? 1.0 : 0.0;
    return boost::math::cyl_bessel_j(k, x);
}

cplx bessel_j_imag(double t, double x) {
    if (!(x > 0.0)) throw DomainError("bessel_j_imag: x must be positive");
    if (x > 4.0 * std::numbers::pi * (1.0 + 1e-12)) throw DomainError("bessel_j_imag: x above 4 pi");
    if (std::abs(t) > 50.0) throw DomainError("bessel_j_imag: |t| above 50");
    const cplx nu(0.0, 2.0 * t);
    const double half = 0.5 * x;
    const double y = half * half;
    cplx coef = complex_rgamma(1.0 + nu);  // 1/(m! Gamma(m + nu + 1)) at m = 0
    cplx sum = coef;
    double biggest = std::abs(coef);
    for (int m = 1; m < 400; ++m) {
        coef *= -y / (static_cast<double>(m) * (static_cast<double>(m) + nu));
        sum += coef;
        double a = std::abs(coef);
        biggest = std::max(biggest, a);
        if (y < 0.5 * m * m && a < 1e-16 * std::max(std::abs(sum), 1e-3 * biggest)) break;
    }
    return sum * std::exp(nu * std::log(half));
}

}  // namespace lowlying::sf
