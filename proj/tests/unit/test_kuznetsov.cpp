#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lowlying/errors.hpp"
#include "lowlying/kuznetsov.hpp"
#include "lowlying/ntcore.hpp"

using namespace lowlying;
using kz::i64;
constexpr double pi = std::numbers::pi;

namespace {

const kz::KuznetsovContext& shared_context() {
    static const kz::KuznetsovContext ctx(tr::make_weight_gaussian());
    return ctx;
}

}  // namespace

TEST_SUITE("kuznetsov") {
    TEST_CASE("level one, m = n = 1: spectral side vanishes") {
        const auto& ctx = shared_context();
        const auto r = ctx.delta_level_one(1, 1);
        // no cusp forms of level one below t = 9.5, where the Gaussian weight is ~1e-39
        CHECK(std::abs(r.total) <= r.tail_bound + 1e-4);
        CHECK_THROWS_AS(ctx.delta_level_one(1, 2), DomainError);
    }

    TEST_CASE("diagonal integral is stable under panel refinement") {
        kz::KuznetsovConfig fine;
        fine.spectral_panels = 80;
        const kz::KuznetsovContext refined(tr::make_weight_gaussian(), fine);
        CHECK(std::abs(refined.diagonal_integral() - shared_context().diagonal_integral()) < 1e-10);
        CHECK(std::abs(refined.eisenstein_integral(2, 3, 11) - shared_context().eisenstein_integral(2, 3, 11)) < 1e-10);
        // (1/pi^2) int t e^{-t^2} tanh(pi t) dt is close to 1/pi^2 since tanh(pi t) ~ 1 where t e^{-t^2} has mass
        CHECK(shared_context().diagonal_integral() > 0.0);
        CHECK(shared_context().diagonal_integral() < 1.0 / (pi * pi));
    }

    TEST_CASE("off-diagonal pairs carry no diagonal term") {
        const auto r = shared_context().delta_full(1, 2, 11, 121);
        CHECK(r.diagonal == 0.0);
        CHECK(shared_context().delta_full(2, 2, 11, 121).diagonal == shared_context().diagonal_integral());
    }

    TEST_CASE("geometric side is symmetric in m, n") {
        for (auto [m, n] : {std::pair<i64, i64>{1, 2}, {2, 5}, {3, 7}}) {
            const auto a = shared_context().delta_full(m, n, 13, 13 * 12);
            const auto b = shared_context().delta_full(n, m, 13, 13 * 12);
            CHECK(std::abs(a.total - b.total) < 1e-13);
        }
    }

    TEST_CASE("geometric side is linear in h") {
        const auto h1 = tr::make_weight_gaussian(1.0);
        const auto h2 = tr::make_weight_gaussian(0.8);
        const auto mix = tr::linear_combination(1.5, h1, -0.25, h2);
        const auto a = kz::delta_full(1, 3, 11, h1, 110);
        const auto b = kz::delta_full(1, 3, 11, h2, 110);
        const auto c = kz::delta_full(1, 3, 11, mix, 110);
        CHECK(std::abs(c.total - (1.5 * a.total - 0.25 * b.total)) < 1e-10);
    }

    TEST_CASE("delta_star follows from the full and level-one sides") {
        const auto& ctx = shared_context();
        const i64 N = 11;
        const double expected = ctx.delta_full(1, 1, N, 121).total - 2.0 / (N + 1.0) * ctx.delta_level_one(1, 1).total;
        CHECK(std::abs(ctx.delta_star(1, 1, N, 121) - expected) < 1e-12);
        // newform mass: oldforms at prime level are the level-one forms
        const auto om = ctx.omega_star(N, 121);
        CHECK(std::isfinite(om.geometric));
        CHECK(om.geometric > 0.0);
    }

    TEST_CASE("Kloosterman term sits under the Weil envelope") {
        const auto& ctx = shared_context();
        for (auto [m, n] : {std::pair<i64, i64>{1, 1}, {2, 3}, {5, 7}}) {
            const i64 N = 13, c_max = 13 * 12;
            const double x0 = 4 * pi * std::sqrt(static_cast<double>(m * n));
            double envelope = 0.0;
            for (i64 c = N; c <= c_max; c += N) envelope += nt::weil_bound(m, n, c) * ctx.hplus().slope_constant() * x0 / (1.0 * c * c);
            CHECK(std::abs(ctx.delta_full(m, n, N, c_max).kloosterman) <= envelope * (1 + 1e-12));
        }
    }

    TEST_CASE("Kloosterman tail bound shrinks with c_max") {
        const auto& ctx = shared_context();
        double prev = ctx.kloosterman_tail(1, 1, 11, 11);
        for (i64 K = 2; K <= 11; ++K) {
            const double t = ctx.kloosterman_tail(1, 1, 11, 11 * K);
            CHECK(t < prev);
            prev = t;
        }
        CHECK(kz::divisor_tail_bound(100) < kz::divisor_tail_bound(10));
    }

    TEST_CASE("argument checks") {
        const auto& ctx = shared_context();
        CHECK_THROWS_AS(ctx.delta_full(1, 1, 12, 144), DomainError);
        CHECK_THROWS_AS(ctx.delta_full(11, 1, 11, 121), DomainError);
        CHECK_THROWS_AS(ctx.delta_full(1, 1, 11, 5), DomainError);
        CHECK_THROWS_AS(ctx.delta_full(1, 200, 11, 121), DomainError);
        const auto f = tr::make_test_triangle(1.0);
        CHECK_THROWS_AS(kz::density_geometric(f, ctx, 15, 225), DomainError);
        CHECK_THROWS_AS(kz::density_geometric(f, ctx, 11, 10), DomainError);
        CHECK_THROWS_AS(kz::density_geometric(f, ctx, 11, 1000), DomainError);
    }

    TEST_CASE("Hecke powers from the Satake angle") {
        for (double theta : {0.3, 1.1, 2.0, 2.9}) {
            const double lp = 2 * std::cos(theta);
            for (int nu = 0; nu <= 12; ++nu)
                CHECK(std::abs(kz::hecke_power(lp, nu, false) - std::sin((nu + 1) * theta) / std::sin(theta)) < 1e-12);
        }
        CHECK(kz::hecke_power(0.5, 3, true) == doctest::Approx(0.125));
        CHECK(kz::hecke_power(1.7, 0, false) == 1.0);
        CHECK_THROWS_AS(kz::hecke_power(1.0, -1, false), DomainError);
    }

    TEST_CASE("prime sum side with vanishing prime eigenvalues") {
        HeckeEigenvalueSource src;
        src.label = "synthetic";
        src.coefficients.assign(1000, 0.0);
        src.coefficients[0] = 1.0;
        const auto f = tr::make_test_triangle(1.0);
        const auto r = kz::prime_sum_side(f, 100.0, src);
        CHECK(r.half_phi0 == doctest::Approx(0.5 * f.phi(0.0)));
        REQUIRE(!r.by_nu.empty());
        CHECK(r.by_nu[0] == 0.0);
        // lambda(p^2) = -1: the nu = 2 terms are 2 sum_{p <= 10} p^{-1} phi_hat(2 log p / log X) log p / log X
        const double logX = std::log(100.0);
        double nu2 = 0.0;
        for (double p : {2.0, 3.0, 5.0, 7.0}) nu2 += 2.0 / p * f.phi_hat(2 * std::log(p) / logX) * std::log(p) / logX;
        CHECK(std::abs(r.by_nu[1] - nu2) < 1e-14);
        CHECK(std::abs(r.value - (r.half_phi0 + r.tail_from(1))) < 1e-15);

        src.coefficients.resize(50);
        CHECK_THROWS_AS(kz::prime_sum_side(f, 100.0, src), InsufficientDataError);
    }

    TEST_CASE("density is unchanged by an exact tabulated copy of phi") {
        const auto& ctx = shared_context();
        const auto f = tr::make_test_triangle(1.0);
        const auto g = tr::make_test_tabulated(f, 32);
        const auto a = kz::density_geometric(f, ctx, 11, 121);
        const auto b = kz::density_geometric(g, ctx, 11, 121);
        CHECK(std::abs(a.density_value - b.density_value) < 1e-10);
        CHECK(a.ks_prediction == doctest::Approx(1.5));
        CHECK(a.main_terms == doctest::Approx(f.phi_hat(0.0) + 0.5 * f.phi(0.0)));
    }

    TEST_CASE("prime powers below N^sigma") {
        const auto f = tr::make_test_triangle(1.0);
        const auto terms = kz::prime_power_terms(f, 11, 1000);
        // 2, 3, 5, 7, 4, 8, 9 with p != 11; phi_hat vanishes at log 11 / log 11 anyway
        CHECK(terms.size() == 7);
        for (const auto& t : terms) CHECK(t.value < 11);
        CHECK_THROWS_AS(kz::prime_power_terms(tr::make_test_triangle(1.9), 1000003, 10), BudgetError);
    }

    TEST_CASE("character form of the error term reconstructs the Kloosterman sums") {
        const auto f = tr::make_test_triangle(1.0);
        const auto r = kz::error_term_character_form(f, shared_context(), 11, 121, 121);
        CHECK(r.c_checked_max > 0);
        CHECK(r.reconstruction_difference <= 1e-8);
        CHECK(std::isfinite(r.error_expression));
    }

    TEST_CASE("character-form error expression grows with sigma at N = 101") {
        double prev = -1.0;
        for (double sigma : {0.5, 1.0, 1.5}) {
            const auto r = kz::error_term_character_form(tr::make_test_triangle(sigma), shared_context(), 101, 101, 101);
            CHECK(r.reconstruction_difference <= 1e-8);
            CHECK(r.error_expression > prev);
            prev = r.error_expression;
        }
    }

    TEST_CASE("density report serialisation") {
        kz::DensityReport r;
        r.N = 101;
        r.sigma = 1.0;
        r.h_id = "gaussian";
        r.phi_id = "triangle";
        const auto row = kz::density_csv_row(r);
        const auto header = kz::density_csv_header();
        CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
        CHECK(kz::density_json(r).find("\"deviation\"") != std::string::npos);
    }
}
