#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lowlying/errors.hpp"
#include "lowlying/specfun.hpp"
#include "lowlying/transforms.hpp"

namespace lowlying::tr {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double four_pi = 4.0 * std::numbers::pi;
using legendre20 = boost::math::quadrature::gauss<double, 20>;

void check_hplus_arg(double x) {
    if (!(x > 0.0) || x > four_pi * (1.0 + 1e-12)) throw DomainError("H+: argument outside (0, 4 pi]");
}

}  // namespace

double spectral_cutoff(const WeightFunction& h) {
    double cut = hplus_t_cutoff;
    for (double t = hplus_t_cutoff; t > 0.0; t -= 0.25) {
        if (std::abs(h(cplx(t, 0.0))) * (1.0 + t) > 1e-18) break;
        cut = t;
    }
    return std::min(cut + 0.5, hplus_t_cutoff);
}

QuadratureGrid QuadratureGrid::composite(double a, double b, int panels) {
    QuadratureGrid g;
    const auto& abs = legendre20::abscissa();
    const auto& wts = legendre20::weights();
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * width;
        const double half = 0.5 * width;
        for (std::size_t i = 0; i < abs.size(); ++i) {
            g.nodes.push_back(mid - half * abs[i]);
            g.weights.push_back(half * wts[i]);
            if (abs[i] != 0.0) {
                g.nodes.push_back(mid + half * abs[i]);
                g.weights.push_back(half * wts[i]);
            }
        }
    }
    return g;
}

QuadratureGrid QuadratureGrid::piecewise(std::span<const double> breaks, int panels_per_piece) {
    QuadratureGrid g;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        auto part = composite(breaks[i], breaks[i + 1], panels_per_piece);
        g.nodes.insert(g.nodes.end(), part.nodes.begin(), part.nodes.end());
        g.weights.insert(g.weights.end(), part.weights.begin(), part.weights.end());
    }
    return g;
}

// ---------------------------------------------------------------------------

WeightFunction::WeightFunction(std::string id, double strip_height, double decay_delta, Eval h)
    : id_(std::move(id)), strip_height_(strip_height), decay_delta_(decay_delta), h_(std::move(h)) {
    if (!(strip_height_ > 13.0)) throw DomainError("WeightFunction: strip height must exceed 13");
    if (!(decay_delta_ > 0.0)) throw DomainError("WeightFunction: decay exponent must be positive");
    bool nonzero = false;
    for (int i = 0; i <= 100; ++i) {
        const double t = 0.1 * i;
        const cplx a = h_(cplx(t, 0.0)), b = h_(cplx(-t, 0.0));
        if (std::abs(a - b) > 1e-10 * std::max(1.0, std::abs(a))) throw InvariantError("WeightFunction: not even");
        if (a.real() < -1e-14 || std::abs(a.imag()) > 1e-12 * std::max(1.0, std::abs(a)))
            throw InvariantError("WeightFunction: not real-nonnegative on the real axis");
        if (a.real() > 0.0) nonzero = true;
    }
    if (!nonzero) throw InvariantError("WeightFunction: identically zero on the sampled axis");
    // 100 x 100 strip samples
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 100; ++j) {
            const cplx s(-60.0 + 120.0 * i / 99.0, -strip_height_ + 2.0 * strip_height_ * j / 99.0);
            const double v = std::abs(h_(s)) * std::pow(1.0 + std::abs(s), 2.0 + decay_delta_);
            if (!std::isfinite(v)) throw InvariantError("WeightFunction: non-finite value on the strip");
            decay_constant_ = std::max(decay_constant_, v);
        }
    }
}

WeightFunction WeightFunction::scaled(double a) const {
    if (!(a > 0.0)) throw DomainError("WeightFunction::scaled: factor must be positive");
    auto inner = h_;
    return WeightFunction(id_ + "*" + std::to_string(a), strip_height_, decay_delta_, [inner, a](cplx s) { return a * inner(s); });
}

WeightFunction linear_combination(double a, const WeightFunction& f, double b, const WeightFunction& g) {
    auto hf = f.h_, hg = g.h_;
    return WeightFunction("lin(" + f.id_ + "," + g.id_ + ")", std::min(f.strip_height_, g.strip_height_),
                          std::min(f.decay_delta_, g.decay_delta_), [=](cplx s) { return a * hf(s) + b * hg(s); });
}

WeightFunction make_weight_gaussian(double width) {
    if (!(width > 0.0)) throw DomainError("make_weight_gaussian: width must be positive");
    const std::string id = width == 1.0 ? std::string("gaussian") : "gaussian_w" + std::to_string(width);
    return WeightFunction(id, 14.0, 1.0, [width](cplx s) {
        const cplx u = s / width;
        return std::exp(-u * u);
    });
}

// ---------------------------------------------------------------------------

TestFunction::TestFunction(std::string id, double sigma, Map phi_hat, Map phi)
    : id_(std::move(id)), sigma_(sigma), phi_hat_(std::move(phi_hat)), phi_(std::move(phi)) {
    if (!(sigma_ > 0.0 && sigma_ < 2.0)) throw DomainError("TestFunction: sigma must lie in (0, 2)");
}

TestFunction make_test_triangle(double sigma) {
    if (!(sigma > 0.0 && sigma < 2.0)) throw DomainError("make_test_triangle: sigma must lie in (0, 2)");
    return TestFunction(
        "triangle", sigma, [sigma](double u) { return std::max(0.0, 1.0 - std::abs(u) / sigma); },
        [sigma](double x) {
            const double a = pi * sigma * x;
            if (std::abs(a) < 1e-8) return sigma * (1.0 - a * a / 3.0);
            const double r = std::sin(a) / a;
            return sigma * r * r;
        });
}

double fourier_phi(const TestFunction& f, double x, double tol) {
    const double s = f.sigma();
    auto g = [&](double u) { return f.phi_hat(u) * std::cos(2.0 * pi * u * x); };
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    // the integrand is even
    return 2.0 * gk::integrate(g, 0.0, s, 20, tol);
}

TestFunction make_test_bump(double sigma) {
    if (!(sigma > 0.0 && sigma < 2.0)) throw DomainError("make_test_bump: sigma must lie in (0, 2)");
    auto hat = [sigma](double u) {
        const double v = u / sigma;
        if (std::abs(v) >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - v * v));
    };
    auto shell = std::make_shared<TestFunction>("bump", sigma, hat, [](double) { return 0.0; });
    return TestFunction("bump", sigma, hat, [shell](double x) { return fourier_phi(*shell, std::abs(x), 1e-14); });
}

TestFunction make_test_tabulated(const TestFunction& source, int intervals) {
    if (intervals < 2) throw DomainError("make_test_tabulated: need at least two intervals");
    const double s = source.sigma();
    auto nodes = std::make_shared<std::vector<double>>();
    auto values = std::make_shared<std::vector<double>>();
    for (int i = 0; i <= intervals; ++i) {
        double u = -s + 2.0 * s * i / intervals;
        if (2 * i == intervals) u = 0.0;
        nodes->push_back(u);
        values->push_back(std::abs(u) >= s ? 0.0 : source.phi_hat(u));
    }
    auto hat = [nodes, values, s](double u) {
        if (std::abs(u) >= s) return 0.0;
        auto it = std::upper_bound(nodes->begin(), nodes->end(), u);
        std::size_t j = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - nodes->begin(), 1, static_cast<std::ptrdiff_t>(nodes->size()) - 1));
        const double a = (*nodes)[j - 1], b = (*nodes)[j];
        const double w = (u - a) / (b - a);
        return (1.0 - w) * (*values)[j - 1] + w * (*values)[j];
    };
    auto phi = [nodes, values](double x) {
        const double w = 2.0 * pi * x;
        double total = 0.0;
        for (std::size_t j = 1; j < nodes->size(); ++j) {
            const double a = (*nodes)[j - 1], b = (*nodes)[j];
            const double fa = (*values)[j - 1], fb = (*values)[j];
            if (std::abs(w) * (b - a) < 0.5) {
                // short piece relative to the oscillation: 20-point rule is exact to rounding
                const auto& abs = legendre20::abscissa();
                const auto& wts = legendre20::weights();
                const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
                for (std::size_t i = 0; i < abs.size(); ++i) {
                    for (double sgn : {-1.0, 1.0}) {
                        if (abs[i] == 0.0 && sgn > 0) continue;
                        const double u = mid + sgn * half * abs[i];
                        const double lin = fa + (fb - fa) * (u - a) / (b - a);
                        total += half * wts[i] * lin * std::cos(w * u);
                    }
                }
            } else {
                const double slope = (fb - fa) / (b - a);
                total += (fb * std::sin(w * b) - fa * std::sin(w * a)) / w + slope * (std::cos(w * b) - std::cos(w * a)) / (w * w);
            }
        }
        return total;
    };
    return TestFunction(source.id() + "_tab" + std::to_string(intervals), s, hat, phi);
}

double katz_sarnak_functional(const TestFunction& f) { return f.phi_hat(0.0) + 0.5 * f.phi(0.0); }

// ---------------------------------------------------------------------------

double hplus_integral(const WeightFunction& h, double x) {
    check_hplus_arg(x);
    const double cut = spectral_cutoff(h);
    auto f = [&](double t) -> cplx {
        if (t == 0.0) return 0.0;
        return sf::bessel_j_imag(t, x) * h(cplx(t, 0.0)) * (t / std::cosh(pi * t));
    };
    using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
    cplx total = 0.0;
    // split the range so each piece is resolved independently
    for (double a = -cut; a < cut - 1e-12; a += 0.5) {
        const double b = std::min(a + 0.5, cut);
        total += gk::integrate(f, a, b, 12, 1e-14);
    }
    const cplx value = cplx(0.0, 2.0 / pi) * total;
    if (std::abs(value.imag()) > 1e-9) throw InvariantError("hplus_integral: imaginary residue " + std::to_string(value.imag()));
    return value.real();
}

double hplus_series(const WeightFunction& h, double x, int terms) {
    check_hplus_arg(x);
    if (terms < 0) terms = static_cast<int>(std::floor(h.strip_height()));
    double s = 0.0;
    for (int k = 0; k < terms; ++k) {
        const double r = k + 0.5;
        const double hv = h(cplx(0.0, -r)).real();
        s += (k % 2 == 0 ? 1.0 : -1.0) * r * hv * sf::bessel_j_integer(2 * k + 1, x);
    }
    return 4.0 / pi * s;
}

namespace {
constexpr int series_terms = 64;
}

HPlusEvaluator::HPlusEvaluator(const WeightFunction& h, int panels, int slope_samples) {
    const double cut = spectral_cutoff(h);
    auto grid = QuadratureGrid::composite(0.0, cut, std::max(1, static_cast<int>(std::ceil(panels * cut / hplus_t_cutoff))));
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        const double t = grid.nodes[i];
        Node n;
        n.t = t;
        n.factor = -4.0 / pi * grid.weights[i] * h.at_real(t) * t / std::cosh(pi * t);
        const cplx nu(0.0, 2.0 * t);
        n.coef.resize(series_terms);
        n.coef[0] = sf::complex_rgamma(1.0 + nu);
        for (int m = 1; m < series_terms; ++m) n.coef[static_cast<std::size_t>(m)] = -n.coef[static_cast<std::size_t>(m - 1)] / (static_cast<double>(m) * (static_cast<double>(m) + nu));
        nodes_.push_back(std::move(n));
    }
    for (int j = 1; j <= slope_samples; ++j) {
        const double x = four_pi * j / slope_samples;
        slope_ = std::max(slope_, std::abs((*this)(x)) / x);
    }
}

double HPlusEvaluator::operator()(double x) const {
    check_hplus_arg(x);
    x = std::min(x, four_pi);
    const double half = 0.5 * x;
    const double y = half * half;
    // terms beyond m_max are below 1e-18 of the leading scale
    int m_max = 1;
    double bound = 1.0;
    for (int m = 1; m < series_terms; ++m) {
        bound *= y / (m * static_cast<double>(m));
        m_max = m + 1;
        if (m > y && bound < 1e-18) break;
    }
    const double lh = std::log(half);
    double total = 0.0;
    for (const auto& n : nodes_) {
        cplx s = n.coef[static_cast<std::size_t>(m_max - 1)];
        for (int m = m_max - 2; m >= 0; --m) s = s * y + n.coef[static_cast<std::size_t>(m)];
        const double th = 2.0 * n.t * lh;
        const double im = std::sin(th) * s.real() + std::cos(th) * s.imag();
        total += n.factor * im;
    }
    return total;
}

// ---------------------------------------------------------------------------

MellinKernel::MellinKernel(const MellinQuery& shape, const TestFunction& f, const HPlusEvaluator* hplus, int panels)
    : shape_(shape), f_(&f), hplus_(hplus) {
    if (!(shape_.scale >= 2.0)) throw DomainError("mellin: scale must be >= 2");
    if (!(shape_.c >= 1.0)) throw DomainError("mellin: c must be >= 1");
    log_scale_ = std::log(shape_.scale);
    const double sig = f.sigma();
    if (shape_.kind == MellinKind::maass) {
        if (!hplus_) throw DomainError("mellin: Maass kind needs an H+ evaluator");
        // largest argument 4 pi scale^{sigma/2} / c must stay inside the H+ domain
        if (0.5 * sig * log_scale_ > std::log(shape_.c) + 1e-12) throw DomainError("mellin: H+ argument reaches beyond 4 pi");
    } else if (shape_.weight < 2 || shape_.weight % 2 != 0) {
        throw DomainError("mellin: holomorphic weight must be even and >= 2");
    }
    const double breaks[] = {-sig, 0.0, sig};
    grid_ = QuadratureGrid::piecewise(breaks, panels);
    values_.resize(grid_.nodes.size());
    for (std::size_t i = 0; i < grid_.nodes.size(); ++i) {
        const double u = grid_.nodes[i];
        values_[i] = grid_.weights[i] * f.phi_hat(u) * kernel(four_pi * std::exp(0.5 * u * log_scale_) / shape_.c);
    }
}

double MellinKernel::kernel(double arg) const {
    if (shape_.kind == MellinKind::maass) return (*hplus_)(std::min(arg, four_pi));
    return sf::bessel_j_integer(shape_.weight - 1, arg);
}

cplx MellinKernel::operator()(cplx s) const {
    cplx total = 0.0;
    const cplx a = s * log_scale_;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] == 0.0) continue;
        total += values_[i] * std::exp(a * grid_.nodes[i]);
    }
    return total;
}

double MellinKernel::target(double x) const {
    const double u = std::log(x) / log_scale_;
    const double v = f_->phi_hat(u);
    if (v == 0.0) return 0.0;
    return v * kernel(four_pi * std::sqrt(x) / shape_.c);
}

std::vector<double> MellinKernel::invert(std::span<const double> xs, double t_max, int panels) const {
    // Psi(-it) = conj Psi(it), so integrate over [0, t_max] and double the real part
    auto grid = QuadratureGrid::composite(0.0, t_max, panels);
    std::vector<double> out(xs.size(), 0.0);
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        const double t = grid.nodes[i];
        const cplx psi = (*this)(cplx(0.0, t));
        for (std::size_t j = 0; j < xs.size(); ++j) {
            const double ph = -t * std::log(xs[j]);
            out[j] += grid.weights[i] * (psi * cplx(std::cos(ph), std::sin(ph))).real();
        }
    }
    for (auto& v : out) v *= 2.0 * log_scale_ / (2.0 * pi);
    return out;
}

double MellinKernel::invert(double x, double t_max, int panels) const {
    const double xs[] = {x};
    return invert(std::span<const double>(xs), t_max, panels)[0];
}

namespace {

cplx adaptive_mellin(const MellinQuery& q, const TestFunction& f, const std::function<double(double)>& kernel) {
    const double L = std::log(q.scale);
    auto g = [&](double u) -> cplx {
        const double v = f.phi_hat(u);
        if (v == 0.0) return 0.0;
        return v * kernel(four_pi * std::exp(0.5 * u * L) / q.c) * std::exp(q.s * (u * L));
    };
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double sig = f.sigma();
    return gk::integrate(g, -sig, 0.0, 20, 1e-13) + gk::integrate(g, 0.0, sig, 20, 1e-13);
}

}  // namespace

cplx mellin_psi(const MellinQuery& q, const TestFunction& f, const WeightFunction& h) {
    if (q.kind != MellinKind::maass) throw DomainError("mellin_psi: Maass kind required");
    if (!(q.scale >= 2.0) || !(q.c >= 1.0)) throw DomainError("mellin_psi: need scale >= 2 and c >= 1");
    if (0.5 * f.sigma() * std::log(q.scale) > std::log(q.c) + 1e-12) throw DomainError("mellin_psi: H+ argument reaches beyond 4 pi");
    HPlusEvaluator hp(h, 60, 0);
    return adaptive_mellin(q, f, [&](double x) { return hp(std::min(x, four_pi)); });
}

cplx mellin_psi_flat(const MellinQuery& q, const TestFunction& f) {
    if (q.kind != MellinKind::holomorphic || q.weight < 2 || q.weight % 2 != 0)
        throw DomainError("mellin_psi_flat: holomorphic kind with even weight >= 2 required");
    if (!(q.scale >= 2.0) || !(q.c >= 1.0)) throw DomainError("mellin_psi_flat: need scale >= 2 and c >= 1");
    return adaptive_mellin(q, f, [&](double x) { return sf::bessel_j_integer(q.weight - 1, x); });
}

}  // namespace lowlying::tr
