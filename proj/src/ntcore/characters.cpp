#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>

#include "lowlying/errors.hpp"
#include "lowlying/ntcore.hpp"

namespace lowlying::nt {

namespace detail {

struct Component {
    i64 p;       // prime
    int e;       // exponent of p in q
    i64 pe;      // p^e
    i64 order;   // order of the generator
    i64 generator;
    std::vector<std::int32_t> dlog;  // residue mod pe -> exponent, -1 for non-units
};

struct CharacterGroupData {
    i64 q = 1;
    i64 exponent = 1;  // lcm of component orders
    std::vector<Component> comps;
};

}  // namespace detail

namespace {

using detail::CharacterGroupData;
using detail::Component;

bool is_primitive_root(i64 g, i64 pe, i64 order) {
    if (std::gcd(g, pe) != 1) return false;
    for (const auto& f : factorize(order))
        if (mod_pow(g, order / f.p, pe) == 1) return false;
    return true;
}

int valuation(i64 a, i64 p) {
    int v = 0;
    while (a != 0 && a % p == 0) {
        a /= p;
        ++v;
    }
    return v;
}

std::shared_ptr<const CharacterGroupData> build_group(i64 q) {
    auto g = std::make_shared<CharacterGroupData>();
    g->q = q;
    for (const auto& [p, e] : factorize(q)) {
        i64 pe = PrimePower{p, e}.value();
        if (p == 2) {
            if (e == 1) {
                Component c{2, 1, 2, 1, 1, {-1, 0}};
                g->comps.push_back(std::move(c));
            } else if (e == 2) {
                Component c{2, 2, 4, 2, 3, {-1, 0, -1, 1}};
                g->comps.push_back(std::move(c));
            } else {
                i64 ord5 = pe / 4;
                Component minus{2, e, pe, 2, pe - 1, std::vector<std::int32_t>(static_cast<std::size_t>(pe), -1)};
                Component five{2, e, pe, ord5, 5, std::vector<std::int32_t>(static_cast<std::size_t>(pe), -1)};
                i64 x = 1;
                for (i64 a = 0; a < ord5; ++a) {
                    minus.dlog[static_cast<std::size_t>(x)] = 0;
                    five.dlog[static_cast<std::size_t>(x)] = static_cast<std::int32_t>(a);
                    i64 y = pe - x;
                    minus.dlog[static_cast<std::size_t>(y)] = 1;
                    five.dlog[static_cast<std::size_t>(y)] = static_cast<std::int32_t>(a);
                    x = x * 5 % pe;
                }
                g->comps.push_back(std::move(minus));
                g->comps.push_back(std::move(five));
            }
        } else {
            i64 order = pe / p * (p - 1);
            i64 gen = 2;
            while (!is_primitive_root(gen, pe, order)) ++gen;
            Component c{p, e, pe, order, gen, std::vector<std::int32_t>(static_cast<std::size_t>(pe), -1)};
            i64 x = 1;
            for (i64 a = 0; a < order; ++a) {
                c.dlog[static_cast<std::size_t>(x)] = static_cast<std::int32_t>(a);
                x = x * gen % pe;
            }
            g->comps.push_back(std::move(c));
        }
    }
    i64 ex = 1;
    for (const auto& c : g->comps) ex = std::lcm(ex, c.order);
    g->exponent = ex;
    return g;
}

std::shared_ptr<const CharacterGroupData> group_for(i64 q) {
    if (q < 1) throw DomainError("character group: modulus must be >= 1");
    if (q > 1'000'000) throw DomainError("character group: modulus above 1e6");
    static std::mutex mu;
    static std::map<i64, std::shared_ptr<const CharacterGroupData>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(q);
    if (it != cache.end()) return it->second;
    if (cache.size() > 4096) cache.clear();
    auto g = build_group(q);
    cache.emplace(q, g);
    return g;
}

// n with n = target (mod pe of component k) and n = 1 modulo the other prime powers.
i64 crt_lift(const CharacterGroupData& g, std::size_t k, i64 target) {
    const Component& ck = g.comps[k];
    i64 rest = g.q / ck.pe;
    // n = 1 + rest * t, choose t so that n = target mod pe
    i64 need = mod(target - 1, ck.pe);
    i64 t = rest % ck.pe == 0 ? 0 : need * mod_inverse(rest % ck.pe, ck.pe) % ck.pe;
    if (ck.pe == 1) t = 0;
    return mod(1 + rest * t, g.q);
}

// Builds the character mod q whose value at each generator lift has the given phase.
// phase_of(n) returns a rational (num, den) with chi(n) = e(num/den).
template <class PhaseFn>
DirichletCharacter character_from_phases(i64 q, PhaseFn&& phase_of) {
    auto g = group_for(q);
    std::vector<i64> ex(g->comps.size(), 0);
    for (std::size_t k = 0; k < g->comps.size(); ++k) {
        const Component& c = g->comps[k];
        if (c.order == 1) continue;
        i64 lift = crt_lift(*g, k, c.generator);
        auto [num, den] = phase_of(lift);
        // chi(gen) = e(num/den) must be an order-th root of unity
        __int128 a = static_cast<__int128>(num) * c.order;
        if (a % den != 0) throw InvariantError("character_from_phases: value is not a root of unity of the generator order");
        ex[k] = mod(static_cast<i64>(a / den), c.order);
    }
    return DirichletCharacter(g, std::move(ex));
}

}  // namespace

DirichletCharacter::DirichletCharacter(std::shared_ptr<const detail::CharacterGroupData> group, std::vector<i64> exponents)
    : group_(std::move(group)), exponents_(std::move(exponents)) {
    const auto& comps = group_->comps;
    if (exponents_.size() != comps.size()) throw DomainError("DirichletCharacter: exponent vector has wrong length");
    index_ = 0;
    principal_ = true;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        exponents_[i] = mod(exponents_[i], comps[i].order);
        index_ = index_ * static_cast<std::size_t>(comps[i].order) + static_cast<std::size_t>(exponents_[i]);
        if (exponents_[i] != 0) principal_ = false;
    }
    conductor_ = 1;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const Component& c = comps[i];
        i64 a = exponents_[i];
        if (c.p == 2 && c.e >= 3) {
            // components come as (-1, 5) pairs
            i64 b = a;
            i64 a5 = exponents_[i + 1];
            if (a5 == 0) {
                conductor_ *= b ? 4 : 1;
            } else {
                int j = c.e - valuation(a5, 2);
                conductor_ *= PrimePower{2, j}.value();
            }
            ++i;
            continue;
        }
        if (a == 0) continue;
        if (c.p == 2) {
            conductor_ *= c.pe;  // e = 2 with the nontrivial character
            continue;
        }
        int v = std::min(valuation(a, c.p), c.e - 1);
        conductor_ *= PrimePower{c.p, c.e - v}.value();
    }
}

i64 DirichletCharacter::modulus() const { return group_->q; }

i64 DirichletCharacter::order_denominator() const { return group_->exponent; }

i64 DirichletCharacter::phase(i64 n) const {
    const auto& g = *group_;
    i64 r = mod(n, g.q);
    i64 k = 0;
    for (std::size_t i = 0; i < g.comps.size(); ++i) {
        const Component& c = g.comps[i];
        std::int32_t d = c.dlog[static_cast<std::size_t>(r % c.pe)];
        if (d < 0) return -1;
        i64 part = exponents_[i] * d % c.order;
        k = (k + part * (g.exponent / c.order)) % g.exponent;
    }
    return k;
}

cplx DirichletCharacter::operator()(i64 n) const {
    i64 k = phase(n);
    if (k < 0) return 0.0;
    return unit_root(k, group_->exponent);
}

bool DirichletCharacter::is_even() const { return phase(modulus() - 1) == 0; }

DirichletCharacter DirichletCharacter::conj() const {
    std::vector<i64> ex(exponents_.size());
    for (std::size_t i = 0; i < ex.size(); ++i) ex[i] = -exponents_[i];
    return DirichletCharacter(group_, std::move(ex));
}

DirichletCharacter DirichletCharacter::operator*(const DirichletCharacter& other) const {
    if (other.modulus() != modulus()) throw DomainError("character product: moduli differ");
    std::vector<i64> ex(exponents_.size());
    for (std::size_t i = 0; i < ex.size(); ++i) ex[i] = exponents_[i] + other.exponents_[i];
    return DirichletCharacter(group_, std::move(ex));
}

std::vector<DirichletCharacter> character_group(i64 q) {
    auto g = group_for(q);
    std::size_t count = 1;
    for (const auto& c : g->comps) count *= static_cast<std::size_t>(c.order);
    std::vector<DirichletCharacter> out;
    out.reserve(count);
    std::vector<i64> ex(g->comps.size(), 0);
    for (std::size_t idx = 0; idx < count; ++idx) {
        out.emplace_back(g, ex);
        // increment the mixed-radix counter, last component fastest
        for (std::size_t k = ex.size(); k-- > 0;) {
            if (++ex[k] < g->comps[k].order) break;
            ex[k] = 0;
        }
    }
    return out;
}

std::vector<DirichletCharacter> primitive_characters(i64 q) {
    std::vector<DirichletCharacter> out;
    for (auto& chi : character_group(q))
        if (chi.is_primitive()) out.push_back(std::move(chi));
    return out;
}

DirichletCharacter principal_character(i64 q) {
    auto g = group_for(q);
    return DirichletCharacter(g, std::vector<i64>(g->comps.size(), 0));
}

DirichletCharacter character_at(i64 q, std::size_t index) {
    auto g = group_for(q);
    std::vector<i64> ex(g->comps.size(), 0);
    std::size_t rest = index;
    for (std::size_t k = ex.size(); k-- > 0;) {
        auto ord = static_cast<std::size_t>(g->comps[k].order);
        ex[k] = static_cast<i64>(rest % ord);
        rest /= ord;
    }
    if (rest != 0) throw DomainError("character_at: index out of range");
    return DirichletCharacter(g, std::move(ex));
}

DirichletCharacter primitive_inducer(const DirichletCharacter& chi) {
    const i64 q = chi.modulus();
    const i64 f = chi.conductor();
    const i64 den = chi.order_denominator();
    return character_from_phases(f, [&](i64 lift_mod_f) {
        // move to a representative coprime to q in the same class mod f
        i64 n = lift_mod_f;
        while (std::gcd(n, q) != 1) n += f;
        i64 k = chi.phase(n);
        if (k < 0) throw InvariantError("primitive_inducer: lift not coprime");
        return std::pair<i64, i64>{k, den};
    });
}

DirichletCharacter lift_product(const DirichletCharacter& a, const DirichletCharacter& b) {
    const i64 Q = std::lcm(a.modulus(), b.modulus());
    return character_from_phases(Q, [&](i64 n) {
        i64 ka = a.phase(n), kb = b.phase(n);
        if (ka < 0 || kb < 0) throw InvariantError("lift_product: lift not coprime");
        i64 da = a.order_denominator(), db = b.order_denominator();
        i64 l = std::lcm(da, db);
        return std::pair<i64, i64>{(ka * (l / da) + kb * (l / db)) % l, l};
    });
}

cplx gauss_sum(const DirichletCharacter& chi) {
    const i64 q = chi.modulus();
    const i64 den = chi.order_denominator();
    const i64 l = std::lcm(den, q);
    cplx s = 0.0;
    for (i64 b = 0; b < q; ++b) {
        i64 k = chi.phase(b);
        if (k < 0) continue;
        s += unit_root(k * (l / den) + b * (l / q), l);
    }
    return s;
}

}  // namespace lowlying::nt
