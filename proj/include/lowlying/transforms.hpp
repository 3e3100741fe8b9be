#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lowlying::tr {

using cplx = std::complex<double>;

// Composite Gauss-Legendre rule on [a, b].
struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    static QuadratureGrid composite(double a, double b, int panels);
    // Concatenation of composite rules on consecutive intervals given by breakpoints.
    static QuadratureGrid piecewise(std::span<const double> breaks, int panels_per_piece);
};

// Even spectral weight, holomorphic on |Im s| <= strip_height.
class WeightFunction {
public:
    using Eval = std::function<cplx(cplx)>;
    WeightFunction(std::string id, double strip_height, double decay_delta, Eval h);

    cplx operator()(cplx s) const { return h_(s); }
    double at_real(double t) const { return h_(cplx(t, 0.0)).real(); }

    const std::string& id() const { return id_; }
    double strip_height() const { return strip_height_; }
    double decay_delta() const { return decay_delta_; }
    // sup over sampled strip points of |h(s)| (1+|s|)^{2+delta}
    double decay_constant() const { return decay_constant_; }

    WeightFunction scaled(double a) const;
    friend WeightFunction linear_combination(double a, const WeightFunction& f, double b, const WeightFunction& g);

private:
    std::string id_;
    double strip_height_;
    double decay_delta_;
    Eval h_;
    double decay_constant_ = 0.0;
};

WeightFunction linear_combination(double a, const WeightFunction& f, double b, const WeightFunction& g);
// exp(-(t/width)^2); the default is width 1 with A = 14, delta = 1.
WeightFunction make_weight_gaussian(double width = 1.0);

// Even Fourier pair with phi_hat supported in (-sigma, sigma).
class TestFunction {
public:
    using Map = std::function<double(double)>;
    TestFunction(std::string id, double sigma, Map phi_hat, Map phi);

    double phi_hat(double u) const { return std::abs(u) >= sigma_ ? 0.0 : phi_hat_(u); }
    double phi(double x) const { return phi_(x); }
    double sigma() const { return sigma_; }
    const std::string& id() const { return id_; }

private:
    std::string id_;
    double sigma_;
    Map phi_hat_;
    Map phi_;
};

TestFunction make_test_triangle(double sigma);
TestFunction make_test_bump(double sigma);
// Piecewise-linear copy of phi_hat on `intervals` equal pieces of [-sigma, sigma];
// phi is the exact transform of the interpolant.
TestFunction make_test_tabulated(const TestFunction& source, int intervals);
// int phi_hat(u) e(ux) du by adaptive quadrature
double fourier_phi(const TestFunction& f, double x, double tol = 1e-13);

double katz_sarnak_functional(const TestFunction& f);

inline constexpr double hplus_t_cutoff = 30.0;
// Point beyond which |h(t)| (1 + t) < 1e-18, capped at hplus_t_cutoff.
double spectral_cutoff(const WeightFunction& h);
// (2i/pi) int h(t) J_{2it}(x) t / cosh(pi t) dt, adaptive, |t| <= 30.
double hplus_integral(const WeightFunction& h, double x);
// (4/pi) sum_{k < terms} (-1)^k (k + 1/2) h(-i(k + 1/2)) J_{2k+1}(x); terms = floor(A) by default.
double hplus_series(const WeightFunction& h, double x, int terms = -1);

// Fixed-grid H+ for repeated evaluation; agrees with hplus_integral to ~1e-12.
class HPlusEvaluator {
public:
    explicit HPlusEvaluator(const WeightFunction& h, int panels = 60, int slope_samples = 2000);
    double operator()(double x) const;
    // sampled sup of |H+(x)| / x over (0, 4 pi]
    double slope_constant() const { return slope_; }

private:
    struct Node {
        double t;
        double factor;  // weight * h(t) * t / cosh(pi t) * (-4 / pi)
        std::vector<cplx> coef;  // (-1)^m / (m! Gamma(m + 1 + 2it))
    };
    std::vector<Node> nodes_;
    double slope_ = 0.0;
};

enum class MellinKind { maass, holomorphic };

struct MellinQuery {
    cplx s;
    double scale = 2.0;  // N or X
    double c = 1.0;
    MellinKind kind = MellinKind::maass;
    int weight = 2;  // holomorphic k
};

// int_{-sigma}^{sigma} scale^{us} phi_hat(u) K(4 pi scale^{u/2} / c) du on a fixed grid, where K is H+ (maass)
// or J_{k-1} (holomorphic). Equal to (1/log N) int x^{s-1} phi_hat(log x/log N) K(4 pi sqrt(x)/c) dx.
class MellinKernel {
public:
    MellinKernel(const MellinQuery& shape, const TestFunction& f, const HPlusEvaluator* hplus, int panels = 100);
    cplx operator()(cplx s) const;
    // The transformed function at x: phi_hat(log x/log N) K(4 pi sqrt(x)/c).
    double target(double x) const;
    // (log N / 2 pi) int_{-t_max}^{t_max} Psi(it) x^{-it} dt
    double invert(double x, double t_max, int panels) const;
    // Same, for several points sharing the Psi(it) samples.
    std::vector<double> invert(std::span<const double> xs, double t_max, int panels) const;

private:
    double kernel(double arg) const;
    MellinQuery shape_;
    const TestFunction* f_;
    const HPlusEvaluator* hplus_;
    double log_scale_;
    QuadratureGrid grid_;
    std::vector<double> values_;  // weight * phi_hat(u) * K(...)
};

cplx mellin_psi(const MellinQuery& q, const TestFunction& f, const WeightFunction& h);
cplx mellin_psi_flat(const MellinQuery& q, const TestFunction& f);

}  // namespace lowlying::tr
