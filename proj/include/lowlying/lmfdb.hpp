#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lowlying/hecke_source.hpp"
#include "lowlying/transforms.hpp"

namespace lowlying::lmfdb {

// Endpoints and payload field names; every entry is a configuration value.
struct ClientConfig {
    std::string api_base_url = "https://www.lmfdb.org/api";
    std::string maass_query_path = "/maass_newforms/";
    std::string newform_query_path = "/mf_newforms/";
    std::string zeros_query_path = "/lfunc_lfunctions/";

    std::string data_field = "data";
    std::string maass_label_field = "maass_id";
    std::string maass_spectral_field = "spectral_parameter";
    std::string maass_symmetry_field = "symmetry";  // 0 even, 1 odd
    std::string maass_coefficients_field = "coefficients";
    std::string maass_sort_field = "spectral_parameter";
    std::string newform_label_field = "label";
    std::string newform_weight_field = "weight";
    std::string newform_dim_field = "dim";
    std::string newform_coefficients_field = "traces";
    std::string zeros_origin_field = "origin";
    std::string zeros_field = "positive_zeros";
    std::string root_number_field = "root_number";
    std::string maass_origin_template = "ModularForm/GL2/Q/Maass/{label}";
    std::string newform_origin_template = "ModularForm/GL2/Q/holomorphic/{label_path}";

    std::filesystem::path cache_dir;  // empty: LOWLYING_CACHE_DIR, else ~/.cache/lowlying
    bool offline = false;

    int max_attempts = 3;
    std::chrono::milliseconds backoff{500};
    std::chrono::milliseconds spacing{500};  // between request starts, per host
    int max_concurrent = 2;                  // per host
    long timeout_seconds = 30;

    // Applies flat key=value overrides; unknown keys throw DomainError.
    void apply(const std::map<std::string, std::string>& kv);
};

std::filesystem::path default_cache_dir();

struct HttpResponse {
    long status = 0;
    std::string body;
};

class Transport {
public:
    virtual ~Transport() = default;
    // Throws NetworkError when no response arrives.
    virtual HttpResponse get(const std::string& url) = 0;
};

class CurlTransport final : public Transport {
public:
    explicit CurlTransport(long timeout_seconds = 30);
    HttpResponse get(const std::string& url) override;

private:
    long timeout_;
};

// Politeness layer: per-host concurrency cap and start spacing, retries with exponential backoff
// on transport failures, 429 and 5xx.
class PoliteTransport final : public Transport {
public:
    PoliteTransport(std::shared_ptr<Transport> inner, const ClientConfig& cfg);
    HttpResponse get(const std::string& url) override;

private:
    struct HostState {
        int active = 0;
        std::chrono::steady_clock::time_point next_start{};
    };
    HttpResponse attempt(const std::string& url);

    std::shared_ptr<Transport> inner_;
    int max_attempts_;
    std::chrono::milliseconds backoff_;
    std::chrono::milliseconds spacing_;
    int max_concurrent_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::string, HostState> hosts_;
};

std::string host_of(const std::string& url);
std::string sha256_hex(const std::string& data);

std::string serialize(const HeckeEigenvalueSource& s);
// Throws SchemaError on malformed documents.
HeckeEigenvalueSource deserialize(const std::string& doc);

// One JSON document per label under <root>/<sha256(request key)>/, plus index.json listing the labels.
class FormCache {
public:
    explicit FormCache(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path entry_dir(const std::string& request_key) const;

    // nullopt when absent; corrupt or invalid entries are moved to <root>/quarantine and reported absent.
    std::optional<std::vector<HeckeEigenvalueSource>> load(const std::string& request_key) const;
    void store(const std::string& request_key, const std::vector<HeckeEigenvalueSource>& sources) const;
    std::size_t quarantined() const;

private:
    void quarantine(const std::filesystem::path& file) const;
    std::filesystem::path root_;
};

void write_atomic(const std::filesystem::path& target, const std::string& contents);

struct FetchRequest {
    FormKind kind = FormKind::maass;
    std::int64_t level = 1;
    std::int64_t count = 1;
    std::int64_t n_max = 100;
    std::string key(const ClientConfig& cfg) const;
};

class Client {
public:
    // A null transport selects libcurl behind the politeness layer.
    explicit Client(ClientConfig cfg, std::shared_ptr<Transport> transport = nullptr);

    std::vector<HeckeEigenvalueSource> fetch_forms(const FetchRequest& req);
    std::size_t network_calls() const { return network_calls_; }
    const FormCache& cache() const { return cache_; }

private:
    std::string get_json(const std::string& url);
    std::vector<double> fetch_zeros(const std::string& origin, int* root_number);
    std::vector<HeckeEigenvalueSource> fetch_remote(const FetchRequest& req);

    ClientConfig cfg_;
    std::shared_ptr<Transport> transport_;
    FormCache cache_;
    std::size_t network_calls_ = 0;
};

struct ExplicitFormulaReport {
    double zero_side = 0.0;   // sum over +-gamma of phi(gamma log X / 2 pi)
    double prime_side = 0.0;  // phi(0)/2 - 2 sum lambda(p^nu) ..., remainder term dropped
    double gap = 0.0;         // |zero_side - prime_side|
    double truncation = 0.0;  // zeros beyond the last one used
    // Remainder of the short form, computed: gamma-factor and conductor terms, and the exact
    // prime-power sum (alpha^nu + beta^nu) minus its short form.
    double archimedean = 0.0;
    double prime_power_correction = 0.0;
    double completed_gap = 0.0;  // |zero_side - prime_side - archimedean - prime_power_correction|
    std::size_t zeros_used = 0;
};

// max_zeros = 0 uses all available ordinates.
ExplicitFormulaReport explicit_formula_check(const HeckeEigenvalueSource& source, const tr::TestFunction& phi, double X,
                                             std::size_t max_zeros = 0);

}  // namespace lowlying::lmfdb
