#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <curl/curl.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "lowlying/errors.hpp"
#include "lowlying/lmfdb.hpp"

namespace lowlying::lmfdb {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// configuration

void ClientConfig::apply(const std::map<std::string, std::string>& kv) {
    const std::map<std::string, std::string*> strings = {
        {"api_base_url", &api_base_url},
        {"maass_query_path", &maass_query_path},
        {"newform_query_path", &newform_query_path},
        {"zeros_query_path", &zeros_query_path},
        {"data_field", &data_field},
        {"maass_label_field", &maass_label_field},
        {"maass_spectral_field", &maass_spectral_field},
        {"maass_symmetry_field", &maass_symmetry_field},
        {"maass_coefficients_field", &maass_coefficients_field},
        {"maass_sort_field", &maass_sort_field},
        {"newform_label_field", &newform_label_field},
        {"newform_weight_field", &newform_weight_field},
        {"newform_dim_field", &newform_dim_field},
        {"newform_coefficients_field", &newform_coefficients_field},
        {"zeros_origin_field", &zeros_origin_field},
        {"zeros_field", &zeros_field},
        {"root_number_field", &root_number_field},
        {"maass_origin_template", &maass_origin_template},
        {"newform_origin_template", &newform_origin_template},
    };
    for (const auto& [k, v] : kv) {
        if (auto it = strings.find(k); it != strings.end()) *it->second = v;
        else if (k == "cache_dir") cache_dir = v;
        else if (k == "offline") offline = v == "1" || v == "true" || v == "yes";
        else throw DomainError("unknown client configuration key: " + k);
    }
}

fs::path default_cache_dir() {
    if (const char* env = std::getenv("LOWLYING_CACHE_DIR"); env && *env) return env;
    if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "lowlying";
    return fs::temp_directory_path() / "lowlying-cache";
}

// ---------------------------------------------------------------------------
// transports

namespace {

std::size_t write_body(char* data, std::size_t size, std::size_t n, void* out) {
    static_cast<std::string*>(out)->append(data, size * n);
    return size * n;
}

struct CurlHandle {
    CURL* h;
    CurlHandle() : h(curl_easy_init()) {
        if (!h) throw NetworkError("curl_easy_init failed");
    }
    ~CurlHandle() { curl_easy_cleanup(h); }
    CurlHandle(const CurlHandle&) = delete;
    CurlHandle& operator=(const CurlHandle&) = delete;
};

}  // namespace

CurlTransport::CurlTransport(long timeout_seconds) : timeout_(timeout_seconds) {
    static std::once_flag once;
    std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

HttpResponse CurlTransport::get(const std::string& url) {
    CurlHandle c;
    HttpResponse r;
    curl_easy_setopt(c.h, CURLOPT_URL, url.c_str());
    curl_easy_setopt(c.h, CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(c.h, CURLOPT_TIMEOUT, timeout_);
    curl_easy_setopt(c.h, CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(c.h, CURLOPT_USERAGENT, "lowlying/0.1");
    curl_easy_setopt(c.h, CURLOPT_WRITEFUNCTION, write_body);
    curl_easy_setopt(c.h, CURLOPT_WRITEDATA, &r.body);
    if (CURLcode rc = curl_easy_perform(c.h); rc != CURLE_OK)
        throw NetworkError(std::string("request failed: ") + curl_easy_strerror(rc));
    curl_easy_getinfo(c.h, CURLINFO_RESPONSE_CODE, &r.status);
    return r;
}

std::string host_of(const std::string& url) {
    auto start = url.find("://");
    start = start == std::string::npos ? 0 : start + 3;
    const auto end = url.find_first_of("/?#", start);
    return url.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

PoliteTransport::PoliteTransport(std::shared_ptr<Transport> inner, const ClientConfig& cfg)
    : inner_(std::move(inner)),
      max_attempts_(std::max(1, cfg.max_attempts)),
      backoff_(cfg.backoff),
      spacing_(cfg.spacing),
      max_concurrent_(std::max(1, cfg.max_concurrent)) {}

HttpResponse PoliteTransport::attempt(const std::string& url) {
    const auto host = host_of(url);
    {
        std::unique_lock lock(mu_);
        auto& st = hosts_[host];
        while (true) {
            const auto now = std::chrono::steady_clock::now();
            if (st.active < max_concurrent_ && now >= st.next_start) break;
            if (st.active < max_concurrent_) cv_.wait_until(lock, st.next_start);
            else cv_.wait(lock);
        }
        ++st.active;
        st.next_start = std::chrono::steady_clock::now() + spacing_;
    }
    struct Release {
        PoliteTransport* self;
        std::string host;
        ~Release() {
            {
                std::lock_guard lock(self->mu_);
                --self->hosts_[host].active;
            }
            self->cv_.notify_all();
        }
    } release{this, host};
    return inner_->get(url);
}

HttpResponse PoliteTransport::get(const std::string& url) {
    std::string last_error;
    for (int k = 0; k < max_attempts_; ++k) {
        if (k > 0) std::this_thread::sleep_for(backoff_ * (1 << (k - 1)));
        try {
            auto r = attempt(url);
            if (r.status == 429 || r.status >= 500) {
                last_error = "HTTP " + std::to_string(r.status);
                continue;
            }
            return r;
        } catch (const NetworkError& e) {
            last_error = e.what();
        }
    }
    throw NetworkError("giving up after " + std::to_string(max_attempts_) + " attempts: " + last_error);
}

// ---------------------------------------------------------------------------
// serialization and cache

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error(ErrorKind::invariant, "sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string serialize(const HeckeEigenvalueSource& s) {
    json j;
    j["label"] = s.label;
    j["kind"] = s.kind == FormKind::maass ? "maass" : "holomorphic";
    j["level"] = s.level;
    j["spectral_parameter"] = s.spectral_parameter;
    j["sign"] = s.sign;
    j["coefficients"] = s.coefficients;
    j["zeros"] = s.zeros;
    j["fetched_at"] = s.fetched_at;
    return j.dump(1) + "\n";
}

HeckeEigenvalueSource deserialize(const std::string& doc) {
    try {
        const auto j = json::parse(doc);
        HeckeEigenvalueSource s;
        s.label = j.at("label").get<std::string>();
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "maass") s.kind = FormKind::maass;
        else if (kind == "holomorphic") s.kind = FormKind::holomorphic;
        else throw SchemaError("unknown kind " + kind);
        s.level = j.at("level").get<std::int64_t>();
        s.spectral_parameter = j.at("spectral_parameter").get<double>();
        s.sign = j.at("sign").get<int>();
        s.coefficients = j.at("coefficients").get<std::vector<double>>();
        s.zeros = j.at("zeros").get<std::vector<double>>();
        s.fetched_at = j.at("fetched_at").get<std::string>();
        return s;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed source document: ") + e.what());
    }
}

namespace {

std::string file_stem(const std::string& label) {
    std::string out;
    for (char c : label) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') ? c : '_';
    return out.empty() ? "_" : out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw SchemaError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void write_atomic(const fs::path& target, const std::string& contents) {
    static std::atomic<unsigned long> counter{0};
    fs::create_directories(target.parent_path());
    const auto tmp = target.parent_path() /
                     ("." + target.filename().string() + ".tmp." +
                      std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
                      std::to_string(counter++));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << contents;
        if (!out.flush()) throw Error(ErrorKind::invariant, "write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

FormCache::FormCache(fs::path root) : root_(std::move(root)) {}

fs::path FormCache::entry_dir(const std::string& request_key) const { return root_ / sha256_hex(request_key); }

void FormCache::quarantine(const fs::path& file) const {
    const auto dir = root_ / "quarantine";
    fs::create_directories(dir);
    auto target = dir / (file.parent_path().filename().string() + "-" + file.filename().string());
    for (int k = 1; fs::exists(target); ++k)
        target = dir / (file.parent_path().filename().string() + "-" + std::to_string(k) + "-" + file.filename().string());
    std::error_code ec;
    fs::rename(file, target, ec);
    if (ec) fs::remove(file, ec);
}

std::size_t FormCache::quarantined() const {
    const auto dir = root_ / "quarantine";
    if (!fs::exists(dir)) return 0;
    return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}));
}

std::optional<std::vector<HeckeEigenvalueSource>> FormCache::load(const std::string& request_key) const {
    const auto dir = entry_dir(request_key);
    const auto index = dir / "index.json";
    if (!fs::exists(index)) return std::nullopt;
    std::vector<std::string> labels;
    try {
        const auto j = json::parse(read_file(index));
        if (j.at("request").get<std::string>() != request_key) throw SchemaError("index belongs to another request");
        labels = j.at("labels").get<std::vector<std::string>>();
    } catch (const std::exception&) {
        quarantine(index);
        return std::nullopt;
    }
    std::vector<HeckeEigenvalueSource> out;
    for (const auto& label : labels) {
        const auto file = dir / (file_stem(label) + ".json");
        if (!fs::exists(file)) {
            quarantine(index);
            return std::nullopt;
        }
        try {
            auto s = deserialize(read_file(file));
            if (s.label != label) throw SchemaError("label mismatch");
            validate_source(s);
            out.push_back(std::move(s));
        } catch (const Error&) {
            quarantine(file);
            quarantine(index);
            return std::nullopt;
        }
    }
    return out;
}

void FormCache::store(const std::string& request_key, const std::vector<HeckeEigenvalueSource>& sources) const {
    const auto dir = entry_dir(request_key);
    json index;
    index["request"] = request_key;
    index["labels"] = json::array();
    for (const auto& s : sources) {
        write_atomic(dir / (file_stem(s.label) + ".json"), serialize(s));
        index["labels"].push_back(s.label);
    }
    // the index goes last so readers never see a partial entry
    write_atomic(dir / "index.json", index.dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// client

std::string FetchRequest::key(const ClientConfig& cfg) const {
    std::ostringstream ss;
    ss << (kind == FormKind::maass ? "maass" : "holomorphic") << '|' << level << '|' << count << '|' << n_max << '|'
       << cfg.api_base_url << (kind == FormKind::maass ? cfg.maass_query_path : cfg.newform_query_path);
    return ss.str();
}

namespace {

std::string url_escape(const std::string& s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == '/') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

std::string substitute(std::string tpl, const std::string& label) {
    std::string path = label;
    for (auto& c : path)
        if (c == '.') c = '/';
    for (auto [key, value] : {std::pair<std::string, std::string>{"{label_path}", path}, {"{label}", label}}) {
        for (auto pos = tpl.find(key); pos != std::string::npos; pos = tpl.find(key)) tpl.replace(pos, key.size(), value);
    }
    return tpl;
}

double number_of(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            return std::stod(v.get<std::string>());
        } catch (const std::exception&) {
            throw SchemaError("non-numeric string " + v.get<std::string>());
        }
    }
    if (v.is_array() && v.size() == 2) {
        const double im = number_of(v[1]);
        if (std::abs(im) > 1e-6) throw SchemaError("coefficient with nonzero imaginary part");
        return number_of(v[0]);
    }
    throw SchemaError("expected a number");
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const json& field(const json& obj, const std::string& name) {
    if (!obj.is_object() || !obj.contains(name)) throw SchemaError("payload lacks field " + name);
    return obj.at(name);
}

}  // namespace

Client::Client(ClientConfig cfg, std::shared_ptr<Transport> transport)
    : cfg_(std::move(cfg)),
      transport_(transport ? std::move(transport)
                           : std::make_shared<PoliteTransport>(std::make_shared<CurlTransport>(cfg_.timeout_seconds), cfg_)),
      cache_(cfg_.cache_dir.empty() ? default_cache_dir() : cfg_.cache_dir) {}

std::string Client::get_json(const std::string& url) {
    if (cfg_.offline) throw NetworkError("offline mode: no cached entry for " + url);
    ++network_calls_;
    const auto r = transport_->get(url);
    if (r.status != 200) throw NetworkError("HTTP " + std::to_string(r.status) + " for " + url);
    return r.body;
}

std::vector<double> Client::fetch_zeros(const std::string& origin, int* root_number) {
    const auto url = cfg_.api_base_url + cfg_.zeros_query_path + "?" + cfg_.zeros_origin_field + "=" + url_escape(origin) +
                     "&_format=json";
    json j;
    try {
        j = json::parse(get_json(url));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("zeros payload: ") + e.what());
    }
    const auto& data = field(j, cfg_.data_field);
    if (!data.is_array()) throw SchemaError("zeros payload: data is not an array");
    if (data.empty()) return {};
    std::vector<double> zeros;
    if (data[0].contains(cfg_.zeros_field)) {
        const auto& arr = data[0].at(cfg_.zeros_field);
        if (!arr.is_array()) throw SchemaError("zeros field is not an array");
        for (const auto& z : arr) zeros.push_back(number_of(z));
    }
    if (root_number && data[0].contains(cfg_.root_number_field)) {
        const double w = number_of(data[0].at(cfg_.root_number_field));
        if (std::abs(std::abs(w) - 1.0) > 1e-6) throw SchemaError("root number is not +-1");
        *root_number = w > 0 ? 1 : -1;
    }
    return zeros;
}

std::vector<HeckeEigenvalueSource> Client::fetch_remote(const FetchRequest& req) {
    const bool maass = req.kind == FormKind::maass;
    std::ostringstream url;
    url << cfg_.api_base_url << (maass ? cfg_.maass_query_path : cfg_.newform_query_path) << "?level=" << req.level;
    if (maass) url << "&_sort=" << url_escape(cfg_.maass_sort_field);
    else url << "&" << cfg_.newform_dim_field << "=1";
    url << "&_format=json&_limit=" << req.count;

    json j;
    try {
        j = json::parse(get_json(url.str()));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("form payload: ") + e.what());
    }
    const auto& data = field(j, cfg_.data_field);
    if (!data.is_array()) throw SchemaError("form payload: data is not an array");

    std::vector<HeckeEigenvalueSource> out;
    const auto stamp = utc_now();
    for (const auto& rec : data) {
        if (static_cast<std::int64_t>(out.size()) >= req.count) break;
        HeckeEigenvalueSource s;
        s.kind = req.kind;
        s.level = req.level;
        s.fetched_at = stamp;
        const auto& coeffs = field(rec, maass ? cfg_.maass_coefficients_field : cfg_.newform_coefficients_field);
        if (!coeffs.is_array()) throw SchemaError("coefficients are not an array");
        if (maass) {
            const auto& lab = field(rec, cfg_.maass_label_field);
            s.label = lab.is_string() ? lab.get<std::string>() : lab.dump();
            s.spectral_parameter = number_of(field(rec, cfg_.maass_spectral_field));
            s.sign = number_of(field(rec, cfg_.maass_symmetry_field)) == 0.0 ? 1 : -1;
            for (const auto& c : coeffs) {
                if (static_cast<std::int64_t>(s.coefficients.size()) >= req.n_max) break;
                s.coefficients.push_back(number_of(c));
            }
        } else {
            s.label = field(rec, cfg_.newform_label_field).get<std::string>();
            const double k = number_of(field(rec, cfg_.newform_weight_field));
            s.spectral_parameter = k;
            for (const auto& c : coeffs) {
                const auto n = static_cast<double>(s.coefficients.size() + 1);
                if (static_cast<std::int64_t>(s.coefficients.size()) >= req.n_max) break;
                s.coefficients.push_back(number_of(c) / std::pow(n, (k - 1.0) / 2.0));
            }
        }
        const auto origin = substitute(maass ? cfg_.maass_origin_template : cfg_.newform_origin_template, s.label);
        s.zeros = fetch_zeros(origin, &s.sign);
        validate_source(s);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<HeckeEigenvalueSource> Client::fetch_forms(const FetchRequest& req) {
    if (req.level < 1) throw DomainError("fetch_forms: level must be >= 1");
    if (req.count < 0 || req.n_max < 1) throw DomainError("fetch_forms: count >= 0 and n_max >= 1 required");
    if (req.count == 0) return {};
    const auto key = req.key(cfg_);
    if (auto hit = cache_.load(key)) return *hit;
    auto fresh = fetch_remote(req);
    cache_.store(key, fresh);
    return fresh;
}

}  // namespace lowlying::lmfdb
