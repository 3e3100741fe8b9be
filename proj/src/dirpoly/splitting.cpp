#include <algorithm>
#include <cmath>
#include <numeric>
#include <functional>
#include <random>
#include <string_view>

#include "lowlying/dirpoly.hpp"
#include "lowlying/errors.hpp"
#include "lowlying/parallel.hpp"

namespace lowlying::dp {

namespace {

void check_weight(int weight) {
    if (weight != 0 && (weight < 2 || weight % 2 != 0)) throw DomainError("weight must be 0 (Maass) or an even k >= 2");
}

double subset_sum(const DyadicTuple& t, const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (auto j : idx) s += t.exponent(j);
    return s;
}

double complement_sum(const DyadicTuple& t, std::size_t a, std::size_t b) {
    return t.total_exponent() - t.exponent(a) - t.exponent(b);
}

SplitWitness greedy(const DyadicTuple& t, const SplitThresholds& th) {
    // slots with N_j <= 1 never help a product reach the window; leave them out of I and J
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < tuple_width; ++j)
        if (t.exponent(j) > 0.0) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return t.exponent(a) < t.exponent(b); });

    // a subset of maximal size with sum <= lower: the smallest entries, taken while they fit
    std::vector<std::size_t> I;
    double P = 0.0;
    for (auto j : order) {
        if (P + t.exponent(j) > th.lower) break;
        P += t.exponent(j);
        I.push_back(j);
    }
    std::vector<std::size_t> J(order.begin() + static_cast<std::ptrdiff_t>(I.size()), order.end());

    SplitWitness w;
    bool found = false;
    for (auto j : J) {
        const double s = P + t.exponent(j);
        if (s > th.lower && s <= th.upper) {
            auto trial = I;
            trial.push_back(j);
            std::sort(trial.begin(), trial.end());
            w.which = SplitCase::A;
            w.subset = std::move(trial);
            found = true;
            break;
        }
    }
    if (!found && J.size() <= 2) {
        // the complement of J lies inside I, whose sum is at most the lower threshold
        w.which = SplitCase::B;
        std::vector<std::size_t> pair = J;
        for (std::size_t j = 0; pair.size() < 2; ++j)
            if (std::find(pair.begin(), pair.end(), j) == pair.end()) pair.push_back(j);
        w.pair = {std::min(pair[0], pair[1]), std::max(pair[0], pair[1])};
        found = true;
    }
    if (!found) throw InvariantError("no witness");
    if (!witness_valid(t, w)) throw InvariantError("no witness: greedy output failed re-validation");
    return w;
}

}  // namespace

double theta_k(int k) {
    if (k < 2 || k % 2 != 0) throw DomainError("theta_k: k must be even and >= 2");
    return 2.0 - 1.0 / (5.0 * k - 2.0);
}

SplitThresholds split_thresholds(double epsilon, int weight) {
    check_weight(weight);
    if (!(epsilon > 0.0)) throw DomainError("split_thresholds: epsilon must be positive");
    if (weight == 0) return {15.0 / 8.0, 0.75 + epsilon / 100.0, 9.0 / 8.0 - epsilon / 100.0, 9.0 / 8.0 - epsilon / 100.0};
    const double th = theta_k(weight);
    const double k = weight;
    const double low = k * th - 2.0 * k + 1.0 + epsilon / 100.0;
    return {th, low, th - low, low};
}

// ---------------------------------------------------------------------------

DyadicTuple::DyadicTuple(double N, double epsilon, int weight) : N_(N), epsilon_(epsilon), weight_(weight) {
    if (!(N >= 2.0)) throw DomainError("DyadicTuple: N must be >= 2");
    if (!(epsilon > 0.0)) throw DomainError("DyadicTuple: epsilon must be positive");
    check_weight(weight);
    exponents_.fill(-std::log(2.0) / std::log(N));
    kinds_.fill(CoefKind::one);
}

DyadicTuple DyadicTuple::from_sizes(double N, double epsilon, std::span<const double> sizes, std::span<const CoefKind> kinds,
                                    int weight) {
    if (sizes.size() > tuple_width) throw DomainError("DyadicTuple: at most 40 sizes");
    if (!kinds.empty() && kinds.size() != sizes.size()) throw DomainError("DyadicTuple: kinds must match sizes");
    DyadicTuple t(N, epsilon, weight);
    for (std::size_t j = 0; j < sizes.size(); ++j) t.set_size(j, sizes[j], kinds.empty() ? CoefKind::one : kinds[j]);
    return t;
}

DyadicTuple DyadicTuple::from_exponents(double N, double epsilon, std::span<const double> exponents, int weight) {
    if (exponents.size() > tuple_width) throw DomainError("DyadicTuple: at most 40 exponents");
    DyadicTuple t(N, epsilon, weight);
    t.exponents_.fill(0.0);
    for (std::size_t j = 0; j < exponents.size(); ++j) t.set_exponent(j, exponents[j]);
    return t;
}

double DyadicTuple::size(std::size_t j) const { return std::pow(N_, exponents_.at(j)); }

double DyadicTuple::total_exponent() const { return std::accumulate(exponents_.begin(), exponents_.end(), 0.0); }

void DyadicTuple::set_size(std::size_t j, double size, CoefKind kind) {
    if (!(size >= 0.5)) throw DomainError("DyadicTuple: sizes must be >= 1/2");
    exponents_.at(j) = std::log(size) / std::log(N_);
    kinds_.at(j) = kind;
}

void DyadicTuple::set_exponent(std::size_t j, double e, CoefKind kind) {
    if (!(e >= -std::log(2.0) / std::log(N_) - 1e-15)) throw DomainError("DyadicTuple: exponent below the padding size");
    exponents_.at(j) = e;
    kinds_.at(j) = kind;
}

void DyadicTuple::validate() const {
    const auto th = split_thresholds(epsilon_, weight_);
    // 1e-12 absorbs rounding in sums of lattice exponents that sit exactly on the cap
    if (total_exponent() > th.product_cap - epsilon_ + 1e-12) throw DomainError("DyadicTuple: product exceeds the cap");
    for (std::size_t j = 0; j < tuple_width; ++j)
        if (exponents_[j] > 0.1 && kinds_[j] == CoefKind::moebius)
            throw DomainError("DyadicTuple: moebius coefficients only on slots of size <= N^{1/10}");
}

// ---------------------------------------------------------------------------

std::vector<double> dyadic_sizes(i64 lo, i64 hi) {
    if (lo < 0 || hi < lo) throw DomainError("dyadic_sizes: need 0 <= lo <= hi");
    std::vector<double> out;
    // blocks (M, 2M] with M = 1/2, 1, 2, ... partition the positive integers
    for (double M = 0.5; M < static_cast<double>(hi); M *= 2.0)
        if (2.0 * M > static_cast<double>(lo)) out.push_back(M);
    return out;
}

std::vector<DyadicTuple> dyadic_decompose(std::span<const IntRange> ranges, double N, double epsilon) {
    if (ranges.size() > tuple_width) throw DomainError("dyadic_decompose: at most 40 variables");
    std::vector<std::vector<double>> per_var;
    for (const auto& r : ranges) {
        if (r.lo < 0 || r.hi < r.lo) throw DomainError("dyadic_decompose: need 0 <= lo <= hi");
        per_var.push_back(dyadic_sizes(r.lo, r.hi));
        if (per_var.back().empty()) return {};
    }
    std::vector<DyadicTuple> out;
    std::vector<std::size_t> pos(per_var.size(), 0);
    while (true) {
        DyadicTuple t(N, epsilon);
        for (std::size_t v = 0; v < per_var.size(); ++v) t.set_size(v, per_var[v][pos[v]]);
        out.push_back(t);
        std::size_t v = 0;
        for (; v < per_var.size(); ++v) {
            if (++pos[v] < per_var[v].size()) break;
            pos[v] = 0;
        }
        if (v == per_var.size()) break;
    }
    return out;
}

// ---------------------------------------------------------------------------

bool witness_valid(const DyadicTuple& t, const SplitWitness& w) {
    const auto th = split_thresholds(t.epsilon(), t.weight());
    if (w.which == SplitCase::A) {
        auto s = w.subset;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end()) return false;
        if (!s.empty() && s.back() >= tuple_width) return false;
        const double sum = subset_sum(t, s);
        return sum > th.lower && sum <= th.upper;
    }
    const auto [a, b] = w.pair;
    if (a == b || a >= tuple_width || b >= tuple_width) return false;
    return complement_sum(t, a, b) <= th.case_b;
}

SplitWitness splitting_witness(const DyadicTuple& t) {
    if (t.holomorphic()) throw DomainError("splitting_witness: tuple is in holomorphic mode");
    t.validate();
    return greedy(t, split_thresholds(t.epsilon(), 0));
}

SplitWitness splitting_witness_holo(const DyadicTuple& t, int k) {
    if (t.weight() != k) throw DomainError("splitting_witness_holo: tuple weight differs from k");
    t.validate();
    return greedy(t, split_thresholds(t.epsilon(), k));
}

std::optional<SplitWitness> exhaustive_witness(const DyadicTuple& t) {
    const auto th = split_thresholds(t.epsilon(), t.weight());
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < tuple_width; ++j)
        if (t.exponent(j) != 0.0) active.push_back(j);
    if (active.size() > 24) throw BudgetError("exhaustive_witness: more than 24 nonzero slots");

    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << active.size()); ++mask) {
        std::vector<std::size_t> I;
        for (std::size_t b = 0; b < active.size(); ++b)
            if (mask >> b & 1U) I.push_back(active[b]);
        const double s = subset_sum(t, I);
        if (s > th.lower && s <= th.upper) return SplitWitness{SplitCase::A, I, {0, 1}};
    }
    for (std::size_t a = 0; a < tuple_width; ++a)
        for (std::size_t b = a + 1; b < tuple_width; ++b)
            if (complement_sum(t, a, b) <= th.case_b) return SplitWitness{SplitCase::B, {}, {a, b}};
    return std::nullopt;
}

namespace {

// Outcome of one tuple in a sweep.
struct Probe {
    bool greedy_failed = false;
    bool invalid = false;
    bool oracle_failed = false;
    bool case_a = false;
};

Probe probe(const DyadicTuple& t, bool with_oracle) {
    Probe p;
    try {
        auto w = t.holomorphic() ? splitting_witness_holo(t, t.weight()) : splitting_witness(t);
        p.case_a = w.which == SplitCase::A;
    } catch (const InvariantError& e) {
        if (std::string_view(e.what()).find("re-validation") != std::string_view::npos) p.invalid = true;
        else p.greedy_failed = true;
    }
    if (with_oracle && !exhaustive_witness(t)) p.oracle_failed = true;
    return p;
}

// Partitions of at most `parts` positive integers, non-increasing, total <= budget, largest <= max_part.
void enumerate_partitions(int budget, int parts, int max_part, std::vector<int>& cur,
                          const std::function<void(const std::vector<int>&)>& emit) {
    emit(cur);
    if (parts == 0) return;
    for (int v = std::min(budget, max_part); v >= 1; --v) {
        cur.push_back(v);
        enumerate_partitions(budget - v, parts - 1, v, cur, emit);
        cur.pop_back();
    }
}

}  // namespace

ExhaustiveSummary exhaustive_split_sweep(int grid, double epsilon, int max_active, int weight) {
    if (grid < 1 || max_active < 1 || max_active > 8) throw DomainError("exhaustive_split_sweep: bad grid or max_active");
    const auto th = split_thresholds(epsilon, weight);
    const int budget = static_cast<int>(std::floor((th.product_cap - epsilon) * grid + 1e-9));
    constexpr double scale = 1e12;  // only exponents matter here

    ExhaustiveSummary out;
    out.grid = grid;
    out.epsilon = epsilon;
    out.max_active = max_active;

    // fan out over the largest part, which fixes the subtree
    std::vector<int> firsts;
    for (int v = 1; v <= budget; ++v) firsts.push_back(v);
    std::vector<ExhaustiveSummary> partial(firsts.size() + 1);
    parallel_for(firsts.size() + 1, [&](std::size_t i) {
        auto& acc = partial[i];
        auto visit = [&](const std::vector<int>& parts) {
            std::vector<double> ex(parts.size());
            for (std::size_t j = 0; j < parts.size(); ++j) ex[j] = static_cast<double>(parts[j]) / grid;
            const auto t = DyadicTuple::from_exponents(scale, epsilon, ex, weight);
            const auto p = probe(t, true);
            ++acc.tuples;
            acc.greedy_failures += p.greedy_failed;
            acc.invalid_witnesses += p.invalid;
            acc.oracle_failures += p.oracle_failed;
            (p.case_a ? acc.case_a : acc.case_b) += !(p.greedy_failed || p.invalid);
        };
        if (i == 0) {
            visit({});  // the all-zero tuple
            return;
        }
        const int v = firsts[i - 1];
        std::vector<int> cur{v};
        enumerate_partitions(budget - v, max_active - 1, v, cur, visit);
    });
    for (const auto& p : partial) {
        out.tuples += p.tuples;
        out.greedy_failures += p.greedy_failures;
        out.invalid_witnesses += p.invalid_witnesses;
        out.oracle_failures += p.oracle_failures;
        out.case_a += p.case_a;
        out.case_b += p.case_b;
    }
    return out;
}

RandomSplitSummary random_split_sweep(std::size_t count, double epsilon, std::uint64_t seed, int grid, int weight) {
    if (grid < 1) throw DomainError("random_split_sweep: grid must be positive");
    const auto th = split_thresholds(epsilon, weight);
    const int budget = static_cast<int>(std::floor((th.product_cap - epsilon) * grid + 1e-9));

    struct Outcome {
        bool failed;
        bool invalid;
    };
    auto results = parallel_map<Outcome>(count, [&](std::size_t i) {
        std::seed_seq seq{seed, static_cast<std::uint64_t>(i)};
        std::mt19937_64 rng(seq);
        const int active = std::uniform_int_distribution<int>(1, static_cast<int>(tuple_width))(rng);
        const int total = std::uniform_int_distribution<int>(0, budget)(rng);
        // random composition of `total` into `active` nonnegative parts
        std::vector<int> cuts(static_cast<std::size_t>(active - 1));
        for (auto& c : cuts) c = std::uniform_int_distribution<int>(0, total)(rng);
        std::sort(cuts.begin(), cuts.end());
        std::vector<double> ex;
        int prev = 0;
        for (int c : cuts) {
            ex.push_back(static_cast<double>(c - prev) / grid);
            prev = c;
        }
        ex.push_back(static_cast<double>(total - prev) / grid);
        std::shuffle(ex.begin(), ex.end(), rng);
        const auto t = DyadicTuple::from_exponents(1e12, epsilon, ex, weight);
        const auto p = probe(t, false);
        return Outcome{p.greedy_failed, p.invalid};
    });
    RandomSplitSummary s;
    s.seed = seed;
    s.tuples = count;
    for (const auto& r : results) {
        s.greedy_failures += r.failed;
        s.invalid_witnesses += r.invalid;
    }
    return s;
}

}  // namespace lowlying::dp
