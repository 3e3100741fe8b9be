#include <cmath>
#include <numeric>
#include <string>

#include "lowlying/errors.hpp"
#include "lowlying/ntcore.hpp"

namespace lowlying::nt {

namespace {

double checked_real(cplx s, i64 c) {
    if (std::abs(s.imag()) > kloosterman_imag_tolerance)
        throw InvariantError("kloosterman: imaginary residue " + std::to_string(s.imag()) + " for c = " + std::to_string(c));
    return s.real();
}

}  // namespace

double kloosterman_direct(const KloostermanQuery& q) {
    if (q.c < 1) throw DomainError("kloosterman: c must be >= 1");
    const i64 c = q.c;
    const i64 m = mod(q.m, c), n = mod(q.n, c);
    cplx s = 0.0;
    for (i64 x = 0; x < c; ++x) {
        if (std::gcd(x, c) != 1) continue;
        i64 xi = mod_inverse(x, c);
        i64 k = static_cast<i64>((static_cast<__int128>(m) * x + static_cast<__int128>(n) * xi) % c);
        s += unit_root(k, c);
    }
    return checked_real(s, c);
}

KloostermanTable::KloostermanTable(i64 c) : c_(c) {
    if (c < 1) throw DomainError("kloosterman: c must be >= 1");
    if (c > (i64{1} << 30)) throw BudgetError("KloostermanTable: modulus too large");
    roots_.resize(static_cast<std::size_t>(c));
    for (i64 k = 0; k < c; ++k) roots_[static_cast<std::size_t>(k)] = unit_root(k, c);
    for (i64 x = 0; x < c; ++x) {
        if (std::gcd(x, c) != 1) continue;
        units_.push_back(static_cast<std::int32_t>(x));
        inverses_.push_back(static_cast<std::int32_t>(mod_inverse(x, c)));
    }
}

double KloostermanTable::operator()(i64 m, i64 n) const {
    const i64 mm = mod(m, c_), nn = mod(n, c_);
    cplx s = 0.0;
    for (std::size_t i = 0; i < units_.size(); ++i) {
        i64 k = (mm * units_[i] + nn * inverses_[i]) % c_;
        s += roots_[static_cast<std::size_t>(k)];
    }
    return checked_real(s, c_);
}

const KloostermanTable& KloostermanEvaluator::table(i64 c) {
    auto it = tables_.find(c);
    if (it != tables_.end()) return *it->second;
    // roots plus unit and inverse columns
    const std::size_t bytes = static_cast<std::size_t>(c) * (sizeof(cplx) + 2 * sizeof(std::int32_t));
    if (bytes_ + bytes > cache_budget_) {
        tables_.clear();
        bytes_ = 0;
    }
    bytes_ += bytes;
    auto [pos, inserted] = tables_.emplace(c, std::make_unique<KloostermanTable>(c));
    return *pos->second;
}

double KloostermanEvaluator::operator()(i64 m, i64 n, i64 c) {
    if (c < 1) throw DomainError("kloosterman: c must be >= 1");
    if (c <= kloosterman_direct_limit) return table(c)(m, n);
    auto f = factorize(c);
    if (f.size() == 1) return kloosterman_direct({m, n, c});
    // S(m,n;c1 c2) = S(m conj(c2)^2, n; c1) S(m conj(c1)^2, n; c2) for coprime c1, c2
    const i64 c1 = f.front().value();
    const i64 c2 = c / c1;
    const i64 i2 = mod_inverse(c2 % c1, c1);
    const i64 i1 = mod_inverse(c1 % c2, c2);
    const i64 m1 = mod(mod(m, c1) * (i2 * i2 % c1), c1);
    const i64 m2 = static_cast<i64>(static_cast<__int128>(mod(m, c2)) * (static_cast<__int128>(i1) * i1 % c2) % c2);
    return (*this)(m1, n, c1) * (*this)(m2, n, c2);
}

double kloosterman(const KloostermanQuery& q) {
    if (q.c <= kloosterman_direct_limit) return kloosterman_direct(q);
    KloostermanEvaluator ev;
    return ev(q.m, q.n, q.c);
}

cplx kloosterman_char_expansion(i64 n, i64 c) {
    if (c < 2) throw DomainError("kloosterman_char_expansion: c must be >= 2");
    if (std::gcd(mod(n, c), c) != 1) throw DomainError("kloosterman_char_expansion: gcd(n, c) > 1");
    cplx s = 0.0;
    for (const auto& chi : character_group(c)) {
        cplx tau = gauss_sum(chi);
        s += std::conj(chi(n)) * tau * tau;
    }
    return s / static_cast<double>(totient(c));
}

}  // namespace lowlying::nt
