#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lowlying/dirpoly.hpp"
#include "lowlying/errors.hpp"
#include "lowlying/ntcore.hpp"

using namespace lowlying;
using dp::i64;
using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

namespace {

dp::DyadicTuple tuple_of(std::vector<double> exps, double eps = 0.1, int weight = 0) {
    return dp::DyadicTuple::from_exponents(1e6, eps, exps, weight);
}

// int_{-T}^{T} g(t) dt / (1 + t^2) by Simpson, g even assumed not
template <class G>
double weighted_integral(G&& g, double T, long n) {
    const double h = 2 * T / static_cast<double>(n);
    auto f = [&](double t) { return g(t) / (1 + t * t); };
    double s = f(-T) + f(T);
    for (long i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(-T + h * static_cast<double>(i));
    return s * h / 3;
}

// sum over primitive chi mod d of |sum_{lo < n <= hi, (n,d)=1} a(n) chi(n) n^{-1/2-it}|^power
double direct_char_sum(i64 d, i64 lo, i64 hi, double t, double power) {
    double acc = 0.0;
    for (const auto& chi : nt::primitive_characters(d)) {
        cplx s = 0.0;
        for (i64 n = lo + 1; n <= hi; ++n) s += chi(n) * std::polar(1.0 / std::sqrt(1.0 * n), -t * std::log(1.0 * n));
        acc += std::pow(std::abs(s), power);
    }
    return acc;
}

}  // namespace

TEST_SUITE("dirpoly") {
    TEST_CASE("Heath-Brown: exact small cases") {
        const auto one = dp::heath_brown_check(1, 3, 20);
        CHECK(one.max_residual == 0.0);
        CHECK(one.integer_part_is_moebius);
        const auto r = dp::heath_brown_check(10000, 3, 20);
        CHECK(r.max_residual < 1e-10);
        CHECK(r.integer_part_is_moebius);
        const auto k2 = dp::heath_brown_check(400, 20, 2);
        CHECK(k2.max_residual < 1e-11);
        CHECK(k2.integer_part_is_moebius);
    }

    TEST_CASE("Heath-Brown: argument checks") {
        CHECK_THROWS_AS(dp::heath_brown_check(0, 3, 20), DomainError);
        CHECK_THROWS_AS(dp::heath_brown_check(100, 3, 2), DomainError);  // 100 > 3^2
        CHECK_THROWS_AS(dp::heath_brown_check(dp::heath_brown_max_n + 1, 3, 20), BudgetError);
    }

    TEST_CASE("dyadic sizes") {
        CHECK(dp::dyadic_sizes(1, 8) == std::vector<double>{1, 2, 4});
        CHECK(dp::dyadic_sizes(0, 8) == std::vector<double>{0.5, 1, 2, 4});
        CHECK(dp::dyadic_sizes(0, 1) == std::vector<double>{0.5});
        CHECK_THROWS_AS(dp::dyadic_sizes(5, 2), DomainError);
    }

    TEST_CASE("dyadic decomposition covers the box exactly once") {
        const std::vector<dp::IntRange> box{{0, 64}, {0, 64}};
        const auto tuples = dp::dyadic_decompose(box, 1e4, 0.1);
        CHECK(tuples.size() == 49);
        i64 covered = 0;
        for (const auto& t : tuples) {
            i64 cell = 1;
            for (std::size_t j = 0; j < 2; ++j) {
                const double M = t.size(j);
                // integers in (M, 2M] within (0, 64]
                const auto lo = static_cast<i64>(std::floor(M)), hi = std::min<i64>(64, static_cast<i64>(2 * M));
                cell *= hi - lo;
            }
            covered += cell;
            for (std::size_t j = 2; j < dp::tuple_width; ++j) CHECK(t.size(j) == doctest::Approx(0.5));
        }
        CHECK(covered == 64 * 64);
    }

    TEST_CASE("theta_k") {
        CHECK(dp::theta_k(2) == doctest::Approx(15.0 / 8.0));
        CHECK(dp::theta_k(4) == doctest::Approx(2.0 - 1.0 / 18.0));
        for (int k = 2; k <= 40; k += 2) CHECK(dp::theta_k(k) < 2.0);
        CHECK_THROWS_AS(dp::theta_k(3), DomainError);
        CHECK_THROWS_AS(dp::theta_k(0), DomainError);
    }

    TEST_CASE("k = 2 shares the case A window and cap with the Maass thresholds") {
        for (double eps : {0.01, 0.1, 0.3}) {
            const auto m = dp::split_thresholds(eps, 0);
            const auto h = dp::split_thresholds(eps, 2);
            CHECK(m.product_cap == doctest::Approx(h.product_cap));
            CHECK(m.lower == doctest::Approx(h.lower));
            CHECK(m.upper == doctest::Approx(h.upper));
        }
    }

    TEST_CASE("splitting witnesses on worked examples") {
        auto lone = dp::DyadicTuple(1e6, 0.1);  // other slots stay at N_j = 1/2
        lone.set_exponent(0, 0.9);
        const auto a = dp::splitting_witness(lone);
        CHECK(a.which == dp::SplitCase::A);
        CHECK(a.subset == std::vector<std::size_t>{0});

        const auto t = tuple_of({0.4, 0.4, 0.4, 0.4, 0.25}, 0.01);
        const auto w = dp::splitting_witness(t);
        CHECK(dp::witness_valid(t, w));
        CHECK(w.which == dp::SplitCase::A);

        auto holo = dp::DyadicTuple(1e6, 0.1, 4);
        holo.set_exponent(0, 1.5);
        const auto hw = dp::splitting_witness_holo(holo, 4);
        CHECK(hw.which == dp::SplitCase::B);
        CHECK((hw.pair.first == 0 || hw.pair.second == 0));
        CHECK(dp::witness_valid(holo, hw));

        const auto padded = dp::DyadicTuple(1e6, 0.1);
        const auto pw = dp::splitting_witness(padded);
        CHECK(pw.which == dp::SplitCase::B);
        CHECK(dp::witness_valid(padded, pw));

        CHECK_THROWS_AS(dp::splitting_witness(holo), DomainError);
        CHECK_THROWS_AS(dp::splitting_witness(tuple_of({1.0, 0.9})), DomainError);  // above 15/8 - 0.1
    }

    TEST_CASE("witness validation rejects bad witnesses") {
        const auto t = tuple_of({0.9, 0.5});
        dp::SplitWitness bad;
        bad.which = dp::SplitCase::A;
        bad.subset = {1};  // 0.5 is below the window
        CHECK_FALSE(dp::witness_valid(t, bad));
        bad.subset = {0, 0};
        CHECK_FALSE(dp::witness_valid(t, bad));
        dp::SplitWitness pair;
        pair.pair = {1, 1};
        CHECK_FALSE(dp::witness_valid(t, pair));
    }

    TEST_CASE("greedy and exhaustive searches agree on a small sweep") {
        for (int weight : {0, 2, 4}) {
            const auto s = dp::exhaustive_split_sweep(20, 0.1, 4, weight);
            CHECK(s.tuples > 0);
            CHECK(s.greedy_failures == 0);
            CHECK(s.invalid_witnesses == 0);
            CHECK(s.oracle_failures == 0);
            CHECK(s.case_a + s.case_b == s.tuples);
        }
        const auto r = dp::random_split_sweep(2000, 0.1, 42);
        CHECK(r.tuples == 2000);
        CHECK(r.greedy_failures == 0);
        CHECK(r.invalid_witnesses == 0);
    }

    TEST_CASE("exhaustive witness finds the greedy answer's case") {
        std::mt19937_64 rng(9);
        std::uniform_int_distribution<int> lat(1, 40);
        for (int i = 0; i < 300; ++i) {
            std::vector<double> e;
            double total = 0.0;
            while (true) {
                const double x = lat(rng) / 80.0;
                if (total + x > 15.0 / 8.0 - 0.1 || e.size() == 6) break;
                e.push_back(x);
                total += x;
            }
            const auto t = tuple_of(e);
            const auto oracle = dp::exhaustive_witness(t);
            REQUIRE(oracle.has_value());
            CHECK(dp::witness_valid(t, *oracle));
            CHECK(dp::witness_valid(t, dp::splitting_witness(t)));
        }
    }

    TEST_CASE("large sieve against direct character sums") {
        std::mt19937_64 rng(17);
        std::normal_distribution<double> g;
        for (i64 d : {3, 7, 12, 25}) {
            std::vector<cplx> a(40);
            for (auto& v : a) v = {g(rng), g(rng)};
            double lhs = 0.0, norm = 0.0;
            for (const auto& chi : nt::primitive_characters(d)) {
                cplx s = 0.0;
                for (std::size_t n = 1; n <= a.size(); ++n) s += chi(static_cast<i64>(n)) * a[n - 1];
                lhs += std::norm(s);
            }
            for (const auto& v : a) norm += std::norm(v);
            const auto r = dp::large_sieve_check(d, a);
            CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-12));
            CHECK(r.rhs == doctest::Approx((d + 40.0) * norm).epsilon(1e-14));
            CHECK(r.lhs <= r.rhs);
        }
        const auto sweep = dp::large_sieve_sweep(500, 60, 300, 1);
        CHECK(sweep.violations == 0);
        CHECK(sweep.max_ratio <= 1.0);
        CHECK_THROWS_AS(dp::large_sieve_check(1, std::vector<cplx>{1.0}), DomainError);
    }

    TEST_CASE("fourth moment: trivial polynomial") {
        dp::MomentConfig cfg;
        const auto r = dp::fourth_moment_integral(5, 1, dp::CoefKind::one, cfg);
        // three primitive characters mod 5, each |P| = 1
        CHECK(r.lhs == doctest::Approx(3 * 2 * std::atan(cfg.t_max)).epsilon(1e-12));
        CHECK(r.lhs + r.tail_bound == doctest::Approx(3 * pi).epsilon(1e-12));
        CHECK(dp::fourth_moment_integral(5, 1, dp::CoefKind::log, cfg).lhs == 0.0);
    }

    TEST_CASE("fourth moment against a direct integral") {
        dp::MomentConfig cfg;
        cfg.t_max = 20.0;
        for (i64 d : {3, 4, 5}) {
            const auto r = dp::fourth_moment_integral(d, 6, dp::CoefKind::one, cfg);
            const double ref = weighted_integral([&](double t) { return direct_char_sum(d, 0, 6, t, 4.0); }, cfg.t_max, 40000);
            CHECK(r.lhs == doctest::Approx(ref).epsilon(1e-9));
        }
    }

    TEST_CASE("fourth moment stable under panel refinement") {
        dp::MomentConfig coarse, fine;
        fine.panel_width = coarse.panel_width / 2;
        for (auto kind : {dp::CoefKind::one, dp::CoefKind::moebius, dp::CoefKind::log}) {
            const double a = dp::fourth_moment_integral(3, 10, kind, coarse).lhs;
            const double b = dp::fourth_moment_integral(3, 10, kind, fine).lhs;
            CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(b)));
        }
        CHECK_THROWS_AS(dp::fourth_moment_integral(1, 10, dp::CoefKind::one), DomainError);
        CHECK_THROWS_AS(dp::fourth_moment_integral(300, 10, dp::CoefKind::one), BudgetError);
    }

    TEST_CASE("character polynomial integrals") {
        dp::CharPolyConfig cfg;
        const auto padded = dp::char_poly_integral(dp::DyadicTuple(1e4, 0.1), 5, cfg);
        CHECK(padded.lhs == doctest::Approx(3 * 2 * std::atan(cfg.t_max)).epsilon(1e-12));
        CHECK(padded.lhs + padded.tail_bound == doctest::Approx(3 * pi).epsilon(1e-12));

        // one variable of size 4: n in (4, 8]
        auto t = dp::DyadicTuple(1e4, 0.1);
        t.set_size(0, 4.0);
        cfg.t_max = 20.0;
        const auto one = dp::char_poly_integral(t, 3, cfg);
        const double ref = weighted_integral([&](double x) { return direct_char_sum(3, 4, 8, x, 1.0); }, cfg.t_max, 40000);
        CHECK(one.lhs == doctest::Approx(ref).epsilon(1e-9));
        CHECK(one.fitted_constant == doctest::Approx(one.lhs / one.rhs_envelope));
    }

    TEST_CASE("Cauchy-Schwarz across a split of the variables") {
        auto t = dp::DyadicTuple(1e4, 0.1);
        t.set_size(0, 8.0);
        t.set_size(1, 4.0);
        t.set_size(2, 2.0);
        dp::CharPolyConfig cfg;
        cfg.t_max = 20.0;
        const double whole = dp::char_poly_integral(t, 7, cfg).lhs;
        const std::vector<std::size_t> left{0}, right{1, 2};
        const double bound = std::sqrt(dp::char_poly_second_moment(t, left, 7, cfg) * dp::char_poly_second_moment(t, right, 7, cfg));
        CHECK(whole <= bound * (1 + 1e-12));
    }

    TEST_CASE("tailoring inequality") {
        for (int k : {2, 4})
            for (double N : {10.0, 1e3, 1e6})
                for (double d : {1.0, 7.0, 1e2, 1e4, 1e7}) {
                    const auto r = dp::tailoring_check(N, d, k);
                    CHECK(3.0 * r.lhs >= r.rhs * (1 - 1e-12));
                }
        CHECK_THROWS_AS(dp::tailoring_check(1.0, 1.0), DomainError);
    }

    TEST_CASE("grand density") {
        const auto edge = dp::grand_density_ratio(10, 1, 20, 1.0);
        CHECK(edge.lhs == 0);
        const auto r = dp::grand_density_ratio(10, 1, 20, 0.9);
        CHECK(r.lhs == 0);
        CHECK(r.rhs > 0.0);
        const auto half = dp::grand_density_ratio(8, 3, 10, 0.5);
        CHECK(half.lhs == half.line_count);
        CHECK(half.characters > 0);
        CHECK_THROWS_AS(dp::grand_density_ratio(10, 1, 20, 0.3), DomainError);
        CHECK_THROWS_AS(dp::grand_density_ratio(100, 1, 20, 0.9), BudgetError);
    }
}
