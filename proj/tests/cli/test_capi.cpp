#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "lowlying/lowlying.h"

namespace {

struct Context {
    ll_context* ctx = nullptr;
    Context() { REQUIRE(ll_context_create(&ctx) == LL_OK); }
    ~Context() { ll_context_destroy(ctx); }
};

}  // namespace

TEST_SUITE("capi") {
    TEST_CASE("version and lifecycle") {
        CHECK(std::string(ll_version()) == "0.1.0");
        CHECK(ll_context_create(nullptr) == LL_ERR_INVALID);
        ll_context_destroy(nullptr);
        ll_weight_destroy(nullptr);
        ll_testfn_destroy(nullptr);
        ll_table_destroy(nullptr);
    }

    TEST_CASE("handles and error codes") {
        Context c;
        ll_weight* h = nullptr;
        CHECK(ll_weight_create(c.ctx, "sawtooth", 1.0, &h) == LL_ERR_INVALID);
        CHECK(std::strlen(ll_last_error(c.ctx)) > 0);
        REQUIRE(ll_weight_create(c.ctx, "gaussian", 1.0, &h) == LL_OK);
        double re = 0, im = 0;
        CHECK(ll_weight_eval(h, 0.0, -0.5, &re, &im) == LL_OK);
        CHECK(re == doctest::Approx(std::exp(0.25)));
        CHECK(std::string(ll_weight_id(h)) == "gaussian");

        ll_testfn* phi = nullptr;
        CHECK(ll_testfn_create(c.ctx, "triangle", 2.5, &phi) == LL_ERR_DOMAIN);
        REQUIRE(ll_testfn_create(c.ctx, "triangle", 1.0, &phi) == LL_OK);
        double v = 0;
        CHECK(ll_testfn_phi_hat(phi, 0.5, &v) == LL_OK);
        CHECK(v == doctest::Approx(0.5));

        ll_hplus_report hp{};
        CHECK(ll_hplus(c.ctx, h, 0.01, &hp) == LL_OK);
        CHECK(std::abs(hp.integral - hp.evaluator) < 1e-11);
        CHECK(ll_hplus(c.ctx, h, 20.0, &hp) == LL_ERR_DOMAIN);

        ll_density_report dr{};
        CHECK(ll_density(c.ctx, h, phi, 100, 1000, &dr) == LL_ERR_DOMAIN);
        CHECK(ll_density(c.ctx, nullptr, phi, 101, 1010, &dr) == LL_ERR_INVALID);

        ll_hb_report hb{};
        CHECK(ll_hb_verify(c.ctx, 1000, 3, 20, &hb) == LL_OK);
        CHECK(hb.integer_part_is_moebius == 1);
        CHECK(ll_hb_verify(c.ctx, (int64_t{1} << 21), 3, 20, &hb) == LL_ERR_BUDGET);

        ll_testfn_destroy(phi);
        ll_weight_destroy(h);
    }

    TEST_CASE("split witness through the C API") {
        Context c;
        const double exps[] = {0.9};
        int which = -1;
        size_t subset[8];
        size_t len = 8;
        size_t pair[2];
        REQUIRE(ll_split_witness(c.ctx, exps, 1, 0.1, 0, &which, subset, &len, pair) == LL_OK);
        if (which == 0) {
            CHECK(len == 1);
            CHECK(subset[0] == 0);
        }
        double th = 0;
        CHECK(ll_theta_k(c.ctx, 2, &th) == LL_OK);
        CHECK(th == doctest::Approx(15.0 / 8.0));
        CHECK(ll_theta_k(c.ctx, 3, &th) == LL_ERR_DOMAIN);
    }

    TEST_CASE("character table") {
        Context c;
        size_t n = 0;
        CHECK(ll_character_count(c.ctx, 8, &n) == LL_OK);
        CHECK(n == 4);
        ll_table* t = nullptr;
        REQUIRE(ll_characters(c.ctx, 8, 1, &t) == LL_OK);
        CHECK(ll_table_rows(t) == 2);
        CHECK(std::string(ll_table_column(t, 0)) == "modulus");
        CHECK(std::string(ll_table_cell(t, 0, 0)) == "8");
        CHECK(ll_table_cell(t, 5, 0) == nullptr);
        ll_table_destroy(t);
    }

    TEST_CASE("offline fetch is a network error") {
        Context c;
        CHECK(ll_context_set_option(c.ctx, "offline", "true") == LL_OK);
        CHECK(ll_context_set_option(c.ctx, "cache_dir", "/nonexistent-lowlying-cache") == LL_OK);
        CHECK(ll_context_set_option(c.ctx, "bogus_key", "1") == LL_ERR_INVALID);
        ll_table* t = nullptr;
        CHECK(ll_fetch(c.ctx, 0, 1, 1, 10, &t) == LL_ERR_NETWORK);
        CHECK(t == nullptr);
    }
}
