#include <doctest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include <nlohmann/json.hpp>

#include "lowlying/errors.hpp"
#include "lowlying/lmfdb.hpp"
#include "lowlying/ntcore.hpp"
#include "lowlying/specfun.hpp"

using namespace lowlying;
namespace fs = std::filesystem;
using json = nlohmann::json;
using clk = std::chrono::steady_clock;

namespace {

// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("lowlying-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// chi_{-4}(n) d(n): coefficients of L(s, chi_{-4})^2, a level-16 Hecke system
std::vector<double> chi4_squared(std::int64_t n_max) {
    std::vector<double> out;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        const double chi = n % 2 == 0 ? 0.0 : (n % 4 == 1 ? 1.0 : -1.0);
        out.push_back(chi * static_cast<double>(nt::divisor_count(n)));
    }
    return out;
}

// ordinates of L(s, chi_{-4}) up to T by sign changes of Hardy's Z and bisection
std::vector<double> chi4_zeros(double T) {
    nt::DirichletCharacter chi = nt::primitive_characters(4).at(0);
    std::vector<double> zeros;
    double a = 0.5, za = sf::hardy_z(a, chi);
    for (double b = a + 0.01; b <= T; b += 0.01) {
        const double zb = sf::hardy_z(b, chi);
        if (za * zb < 0) {
            double lo = b - 0.01, hi = b, zlo = za;
            for (int i = 0; i < 50; ++i) {
                const double mid = 0.5 * (lo + hi), zm = sf::hardy_z(mid, chi);
                if (zlo * zm <= 0) hi = mid;
                else {
                    lo = mid;
                    zlo = zm;
                }
            }
            zeros.push_back(0.5 * (lo + hi));
        }
        za = zb;
    }
    return zeros;
}

HeckeEigenvalueSource chi4_squared_source(std::int64_t n_max, double T) {
    HeckeEigenvalueSource s;
    s.label = "chi4-squared";
    s.kind = FormKind::maass;
    s.level = 16;
    s.spectral_parameter = 0.0;
    s.sign = -1;  // odd: both gamma factors are Gamma_R(s + 1)
    s.coefficients = chi4_squared(n_max);
    for (double g : chi4_zeros(T)) {
        s.zeros.push_back(g);
        s.zeros.push_back(g);  // double zeros of the square
    }
    return s;
}

// Serves canned payloads by URL substring and records request start times.
class FakeTransport final : public lmfdb::Transport {
public:
    std::vector<std::pair<std::string, lmfdb::HttpResponse>> routes;
    std::vector<long> failures_first;  // statuses returned before the routes answer
    std::vector<clk::time_point> starts;
    std::atomic<int> calls{0};

    lmfdb::HttpResponse get(const std::string& url) override {
        starts.push_back(clk::now());
        const auto k = static_cast<std::size_t>(calls++);
        if (k < failures_first.size()) {
            if (failures_first[k] == 0) throw NetworkError("connection reset");
            return {failures_first[k], ""};
        }
        for (const auto& [pattern, response] : routes)
            if (url.find(pattern) != std::string::npos) return response;
        return {404, ""};
    }
};

std::shared_ptr<FakeTransport> synthetic_server(std::int64_t n) {
    auto t = std::make_shared<FakeTransport>();
    json form;
    form["data"] = json::array({{{"maass_id", "synthetic.1"},
                                  {"spectral_parameter", 9.5336952613},
                                  {"symmetry", 1},
                                  {"coefficients", chi4_squared(n)}}});
    json zeros;
    zeros["data"] = json::array({{{"positive_zeros", {6.02, 10.24, 12.99}}, {"root_number", -1}}});
    t->routes.push_back({"/maass_newforms/", {200, form.dump()}});
    t->routes.push_back({"/lfunc_lfunctions/", {200, zeros.dump()}});
    return t;
}

lmfdb::ClientConfig test_config(const fs::path& cache) {
    lmfdb::ClientConfig cfg;
    cfg.cache_dir = cache;
    cfg.backoff = std::chrono::milliseconds(1);
    cfg.spacing = std::chrono::milliseconds(0);
    return cfg;
}

}  // namespace

TEST_SUITE("lmfdb") {
    TEST_CASE("serialisation round trip is byte-identical") {
        auto s = chi4_squared_source(60, 20);
        s.fetched_at = "2026-01-01T00:00:00Z";
        const auto doc = lmfdb::serialize(s);
        const auto back = lmfdb::deserialize(doc);
        CHECK(back == s);
        CHECK(lmfdb::serialize(back) == doc);
        CHECK_THROWS_AS(lmfdb::deserialize("{\"label\": 3}"), SchemaError);
        CHECK_THROWS_AS(lmfdb::deserialize("not json"), SchemaError);
    }

    TEST_CASE("synthetic coefficients pass validation; broken ones do not") {
        auto s = chi4_squared_source(200, 1);
        CHECK_NOTHROW(validate_source(s));
        s.coefficients[8] += 0.5;  // lambda(9)
        CHECK_THROWS_AS(validate_source(s), InvariantError);
        s = chi4_squared_source(50, 1);
        s.coefficients[0] = 2.0;
        CHECK_THROWS_AS(validate_source(s), InvariantError);
    }

    TEST_CASE("client: fetch, cache hit, byte-stable cache files") {
        TempDir dir;
        auto server = synthetic_server(40);
        lmfdb::Client client(test_config(dir.path), server);
        const lmfdb::FetchRequest req{FormKind::maass, 16, 1, 30};
        const auto first = client.fetch_forms(req);
        REQUIRE(first.size() == 1);
        CHECK(first[0].label == "synthetic.1");
        CHECK(first[0].n_max() == 30);
        CHECK(first[0].sign == -1);
        CHECK(first[0].zeros.size() == 3);
        CHECK(client.network_calls() == 2);

        const auto entry = client.cache().entry_dir(req.key(test_config(dir.path)));
        std::map<fs::path, std::string> before;
        for (const auto& f : fs::directory_iterator(entry)) {
            std::ifstream in(f.path(), std::ios::binary);
            before[f.path()] = std::string(std::istreambuf_iterator<char>(in), {});
        }

        auto offline_cfg = test_config(dir.path);
        offline_cfg.offline = true;
        lmfdb::Client again(offline_cfg, server);
        const auto second = again.fetch_forms(req);
        CHECK(second == first);
        CHECK(again.network_calls() == 0);
        client.cache().store(req.key(test_config(dir.path)), second);
        for (const auto& [path, bytes] : before) {
            std::ifstream in(path, std::ios::binary);
            CHECK(std::string(std::istreambuf_iterator<char>(in), {}) == bytes);
        }
    }

    TEST_CASE("client: corrupt cache entries are quarantined and refetched") {
        TempDir dir;
        auto server = synthetic_server(40);
        lmfdb::Client client(test_config(dir.path), server);
        const lmfdb::FetchRequest req{FormKind::maass, 16, 1, 30};
        client.fetch_forms(req);
        const auto entry = client.cache().entry_dir(req.key(test_config(dir.path)));
        for (const auto& f : fs::directory_iterator(entry))
            if (f.path().filename() != "index.json") std::ofstream(f.path()) << "{ truncated";
        CHECK_FALSE(client.cache().load(req.key(test_config(dir.path))).has_value());
        CHECK(client.cache().quarantined() >= 1);
        const auto refetched = client.fetch_forms(req);
        CHECK(refetched.size() == 1);
        CHECK(client.network_calls() == 4);
    }

    TEST_CASE("client: count zero, offline miss, bad arguments") {
        TempDir dir;
        auto server = synthetic_server(40);
        auto cfg = test_config(dir.path);
        lmfdb::Client client(cfg, server);
        CHECK(client.fetch_forms({FormKind::maass, 16, 0, 30}).empty());
        CHECK(client.network_calls() == 0);
        CHECK_THROWS_AS(client.fetch_forms({FormKind::maass, 0, 1, 30}), DomainError);
        cfg.offline = true;
        lmfdb::Client offline(cfg, server);
        CHECK_THROWS_AS(offline.fetch_forms({FormKind::maass, 16, 1, 30}), NetworkError);
        CHECK(server->calls == 0);
    }

    TEST_CASE("client: payload without the configured field is a schema error") {
        TempDir dir;
        auto server = synthetic_server(40);
        auto cfg = test_config(dir.path);
        cfg.maass_coefficients_field = "coeffs";
        lmfdb::Client client(cfg, server);
        CHECK_THROWS_AS(client.fetch_forms({FormKind::maass, 16, 1, 30}), SchemaError);
    }

    TEST_CASE("config overrides") {
        lmfdb::ClientConfig cfg;
        cfg.apply({{"api_base_url", "http://localhost:1/api"}, {"zeros_field", "z"}});
        CHECK(cfg.api_base_url == "http://localhost:1/api");
        CHECK(cfg.zeros_field == "z");
        CHECK_THROWS_AS(cfg.apply({{"no_such_key", "1"}}), DomainError);
        CHECK(lmfdb::host_of("https://www.example.org/api/x?y=1") == "www.example.org");
        CHECK(lmfdb::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    TEST_CASE("polite transport retries 5xx, 429 and resets") {
        auto inner = std::make_shared<FakeTransport>();
        inner->failures_first = {503, 429, 0};
        inner->routes.push_back({"/", {200, "ok"}});
        lmfdb::ClientConfig cfg = test_config({});
        cfg.max_attempts = 4;
        lmfdb::PoliteTransport polite(inner, cfg);
        CHECK(polite.get("http://h/x").body == "ok");
        CHECK(inner->calls == 4);

        auto failing = std::make_shared<FakeTransport>();
        failing->failures_first = {500, 500, 500};
        cfg.max_attempts = 3;
        lmfdb::PoliteTransport giving_up(failing, cfg);
        CHECK_THROWS_AS(giving_up.get("http://h/x"), NetworkError);

        auto missing = std::make_shared<FakeTransport>();
        lmfdb::PoliteTransport no_retry(missing, cfg);
        CHECK(no_retry.get("http://h/x").status == 404);
        CHECK(missing->calls == 1);
    }

    TEST_CASE("polite transport spaces request starts per host") {
        auto inner = std::make_shared<FakeTransport>();
        inner->routes.push_back({"/", {200, "ok"}});
        lmfdb::ClientConfig cfg = test_config({});
        cfg.spacing = std::chrono::milliseconds(40);
        lmfdb::PoliteTransport polite(inner, cfg);
        for (int i = 0; i < 4; ++i) polite.get("http://same-host/x");
        for (std::size_t i = 1; i < inner->starts.size(); ++i)
            CHECK(inner->starts[i] - inner->starts[i - 1] >= std::chrono::milliseconds(39));
    }

    TEST_CASE("explicit formula on L(s, chi_{-4})^2") {
        const auto src = chi4_squared_source(40000, 80);
        REQUIRE(src.zeros.size() > 40);
        CHECK(src.zeros.front() == doctest::Approx(6.0209).epsilon(1e-4));
        CHECK_NOTHROW(validate_source(chi4_squared_source(300, 1)));
        for (double sigma : {1.0, 0.5}) {
            const auto phi = tr::make_test_triangle(sigma);
            for (double X : {10.0, 100.0}) {
                const auto r = lmfdb::explicit_formula_check(src, phi, X);
                CHECK(r.zeros_used == src.zeros.size());
                CHECK(r.completed_gap <= r.truncation);
                CHECK(r.gap == doctest::Approx(std::abs(r.zero_side - r.prime_side)));
            }
        }
        // fewer zeros: a larger truncation term that still covers the gap
        const auto phi = tr::make_test_triangle(1.0);
        double prev = 0.0;
        for (std::size_t m : {60, 40, 20}) {
            const auto r = lmfdb::explicit_formula_check(src, phi, 100.0, m);
            CHECK(r.truncation > prev);
            CHECK(r.completed_gap <= r.truncation);
            prev = r.truncation;
        }
        CHECK_THROWS_AS(lmfdb::explicit_formula_check(src, phi, 100.0, 5), InsufficientDataError);
        CHECK_THROWS_AS(lmfdb::explicit_formula_check(src, phi, 1.0), DomainError);
        auto shortened = src;
        shortened.coefficients.resize(50);
        CHECK_THROWS_AS(lmfdb::explicit_formula_check(shortened, phi, 100.0), InsufficientDataError);
    }
}
