#pragma once

#include <complex>
#include <vector>

#include "lowlying/ntcore.hpp"

namespace lowlying::sf {

using cplx = std::complex<double>;

// Lanczos (g = 7, 9 terms), reflection for Re z < 1/2.
cplx complex_gamma(cplx z);
// 1/Gamma(z); entire, zero at the poles of Gamma.
cplx complex_rgamma(cplx z);
// Gamma'/Gamma; throws DomainError at the poles.
cplx complex_digamma(cplx z);

double bessel_j_integer(int k, double x);
// J_{2it}(x) by its power series, 0 < x < 4 pi (the closed end 4 pi is admitted).
cplx bessel_j_imag(double t, double x);

struct EulerMaclaurin {
    double cutoff_scale = 1.0;  // multiplies M = max(20, 2|Im s|)
    int bernoulli_terms = 12;
};

cplx hurwitz_zeta(cplx s, double a, const EulerMaclaurin& em = {});
cplx riemann_zeta(cplx s, const EulerMaclaurin& em = {});
cplx dirichlet_l(cplx s, const nt::DirichletCharacter& chi, const EulerMaclaurin& em = {});
cplx zeta_n(cplx s, nt::i64 N, const EulerMaclaurin& em = {});

// Completed L-function of a primitive character:
//   (q/pi)^{(s+a)/2} Gamma((s+a)/2) L(s, chi), times s(s-1)/2 when q = 1.
cplx completed_l(cplx s, const nt::DirichletCharacter& chi, const EulerMaclaurin& em = {});
// W with completed_l(s, chi) = W completed_l(1 - s, conj chi).
cplx root_number(const nt::DirichletCharacter& chi);
// |completed(s) - W completed(1-s, conj)| / max(|completed(s)|, 1e-300)
double functional_equation_residual(cplx s, const nt::DirichletCharacter& chi, const EulerMaclaurin& em = {});

struct LSeriesHandle {
    nt::DirichletCharacter character;
    double evaluation_precision = 1e-12;
};

struct ZeroCountQuery {
    double beta = 0.5;
    double T = 10.0;
    nt::DirichletCharacter character;
};

struct ZeroCountConfig {
    double scan_step = 0.05;
    int max_halvings = 8;
    double em_scale = 1.0;
    double edge_shift = 1e-3;
    double edge_tolerance = 1e-4;
    double right_edge = 1.5;
    nt::i64 max_modulus = 300;
};

struct ZeroCountResult {
    int box_count = 0;
    int line_count = -1;          // critical-line zeros with |gamma| <= T, when scanned
    bool line_box_disagree = false;
    double final_step = 0.0;
    std::vector<double> line_zeros;  // bracket midpoints of sign changes
};

// Rotated completed function on the critical line; real up to rounding.
double hardy_z(double t, const nt::DirichletCharacter& chi, const EulerMaclaurin& em = {});
// Sign-change count on [-T, T] with step halving until stable twice in a row.
ZeroCountResult critical_line_count(const nt::DirichletCharacter& chi, double T, const ZeroCountConfig& cfg = {});
ZeroCountResult zero_count_detailed(const ZeroCountQuery& q, const ZeroCountConfig& cfg = {});
int zero_count(const ZeroCountQuery& q, const ZeroCountConfig& cfg = {});

}  // namespace lowlying::sf
