#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace lowlying::cli {

namespace {

std::vector<OptionSpec> with_common(std::vector<OptionSpec> own) {
    own.push_back({"seed", "--seed", "1", "seed recorded in the report"});
    own.push_back({"output_path", "-o,--output_path", "-", "report destination, - for stdout"});
    own.push_back({"output_format", "--output_format,--format", "csv", "csv or json"});
    own.push_back({"offline", "--offline", "false", "never touch the network", true});
    own.push_back({"threads", "--threads", "0", "worker threads, 0 for all cores"});
    return own;
}

const OptionSpec h_id{"h_id", "--h_id", "gaussian", "spectral weight"};
const OptionSpec h_width{"h_width", "--h_width", "1", "Gaussian weight width"};
const OptionSpec phi_id{"phi_id", "--phi_id", "triangle", "test function: triangle or bump"};
const OptionSpec sigma{"sigma", "--sigma", "1", "support of phi_hat, in (0, 2)"};
const OptionSpec n_list{"N_list", "--N,--N_list", "101", "comma-separated prime levels"};
const OptionSpec c_mult{"c_max_multiplier", "--c_max_multiplier", "40", "Kloosterman truncation c_max = multiplier * N"};
const OptionSpec level_one{"level_one_c_max", "--level_one_c_max", "10000", "truncation of the level-one Kloosterman sum"};

std::vector<SubcommandSpec> build() {
    std::vector<SubcommandSpec> s;
    s.push_back({"density", "one-level density from the geometric side",
                 with_common({sigma, h_id, h_width, phi_id, n_list, c_mult, level_one})});
    s.push_back({"kuznetsov-check", "geometric side of the trace formula and total mass",
                 with_common({h_id, h_width, n_list, c_mult, level_one, {"m", "--m", "1", "first index"},
                              {"n", "--n", "1", "second index"}})});
    s.push_back({"hplus", "Bessel transform H+ by integral, residue series and fixed grid",
                 with_common({h_id, h_width, {"x_list", "--x,--x_list", "0.001,0.01,0.1,0.5,1,2,3", "arguments"}})});
    s.push_back({"mellin", "Mellin transforms of the Bessel kernels and their inversion",
                 with_common({sigma, h_id, h_width, phi_id, n_list,
                              {"mode", "--mode", "psi", "psi or invert"},
                              {"kind", "--kind", "maass", "maass or holomorphic"},
                              {"k", "--k", "2", "weight of the holomorphic kernel"},
                              {"c_list", "--c,--c_list", "", "moduli; empty uses c = N"},
                              {"re_list", "--re,--re_list", "-1,-0.5,0,0.5,1", "real parts of s"},
                              {"im_list", "--im,--im_list", "0,5,10,20", "imaginary parts of s"},
                              {"x_list", "--x,--x_list", "2,3,5,10,30", "inversion points"},
                              {"t_max", "--t_max", "160", "inversion truncation"}})});
    s.push_back({"hb-verify", "exact check of the Heath-Brown decomposition",
                 with_common({{"z", "--z", "3", "truncation of mu"}, {"K", "--K", "20", "number of factors"},
                              {"nmax", "--nmax,--n_max", "10000", "largest n checked"},
                              {"tolerance", "--tolerance", "1e-8", "residual allowed"}})});
    s.push_back({"split-lemma", "witnesses for the splitting lemmas",
                 with_common({{"exhaustive", "--exhaustive", "false", "sweep the full grid family", true},
                              {"grid", "--grid", "80", "exponent lattice 1/grid"},
                              {"epsilon", "--epsilon", "0.1", "epsilon"},
                              {"max_active", "--max_active", "5", "nonzero exponents, exhaustive mode"},
                              {"k", "--k", "0", "0 for Maass thresholds, else holomorphic weight"},
                              {"count", "--count", "100000", "random tuples"}})});
    s.push_back({"lsieve", "randomized large-sieve trials",
                 with_common({{"trials", "--trials", "10000", "number of trials"},
                              {"d_max", "--d_max", "100", "largest modulus"},
                              {"X_max", "--X_max", "1000", "largest length"}})});
    s.push_back({"fourth-moment", "fourth moment of character twists of Dirichlet polynomials",
                 with_common({{"d_list", "--d,--d_list", "3,5,7", "moduli"},
                              {"X_list", "--X,--X_list", "10,100", "polynomial lengths"},
                              {"coef", "--coef", "one", "one, moebius or log"},
                              {"t_max", "--t_max", "50", "integration cutoff"},
                              {"panel_width", "--panel_width", "0.5", "quadrature panel width"},
                              {"log_power", "--log_power", "13", "power of log(dX)"}})});
    s.push_back({"grand-density", "zero-density count over twisted characters",
                 with_common({{"Q", "--Q", "10", "largest modulus q"}, {"k", "--k", "1", "twisting modulus"},
                              {"T", "--T", "20", "height"}, {"beta", "--beta", "0.9", "abscissa"},
                              {"log_power", "--log_power", "4", "power of log(kQT)"}})});
    s.push_back({"zeros", "functional equation and zero counts of Dirichlet L-functions",
                 with_common({{"q_list", "--q,--q_list", "5", "moduli"},
                              {"primitive_only", "--primitive_only", "true", "skip imprimitive characters"},
                              {"beta", "--beta", "0.5", "box abscissa"}, {"T", "--T", "20", "height"},
                              {"s_re", "--s_re", "0.3", "residual point, real part"},
                              {"s_im", "--s_im", "2", "residual point, imaginary part"}})});
    s.push_back({"fetch", "download or load cached Hecke eigenvalue data",
                 with_common({{"kind", "--kind", "maass", "maass or holomorphic"}, {"level", "--level", "1", "level"},
                              {"count", "--count", "1", "number of forms"}, {"n_max", "--n_max", "100", "coefficients"}})});
    s.push_back({"explicit-formula", "explicit formula on one fetched form",
                 with_common({sigma, phi_id, {"kind", "--kind", "maass", "maass or holomorphic"},
                              {"level", "--level", "1", "level"}, {"form", "--form", "0", "position in the fetch result"},
                              {"n_max", "--n_max", "1000", "coefficients"}, {"X", "--X", "100", "X"},
                              {"max_zeros", "--max_zeros", "0", "0 uses all zeros"}})});
    return s;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, ',');)
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw UsageError("invalid value for " + key + ": '" + text + "'");
    return v;
}

bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace

const std::vector<SubcommandSpec>& subcommands() {
    static const auto specs = build();
    return specs;
}

const SubcommandSpec& subcommand(std::string_view name) {
    for (const auto& s : subcommands())
        if (s.name == name) return s;
    throw UsageError("unknown subcommand: " + std::string(name));
}

const std::vector<std::string>& client_keys() {
    static const std::vector<std::string> keys = {
        "api_base_url", "maass_query_path", "newform_query_path", "zeros_query_path", "data_field",
        "maass_label_field", "maass_spectral_field", "maass_symmetry_field", "maass_coefficients_field",
        "maass_sort_field", "newform_label_field", "newform_weight_field", "newform_dim_field",
        "newform_coefficients_field", "zeros_origin_field", "zeros_field", "root_number_field",
        "maass_origin_template", "newform_origin_template", "cache_dir"};
    return keys;
}

KeyValues parse_flat(std::string_view text) {
    KeyValues kv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        auto key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
        kv[key] = trim(std::string_view(line).substr(eq + 1));
    }
    return kv;
}

KeyValues read_flat_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_flat(buf.str());
}

RunConfig::RunConfig(const SubcommandSpec& spec, const KeyValues& file, const KeyValues& flags)
    : subcommand_(spec.name) {
    std::set<std::string> elsewhere;
    for (const auto& s : subcommands())
        for (const auto& o : s.options) elsewhere.insert(o.key);
    const std::set<std::string> client(client_keys().begin(), client_keys().end());

    for (const auto& o : spec.options) values_[o.key] = o.fallback;
    for (const auto& [k, v] : file) {
        if (values_.count(k)) values_[k] = v;
        else if (client.count(k)) client_[k] = v;
        else if (!elsewhere.count(k)) throw UsageError("unknown config key: " + k);
    }
    for (const auto& [k, v] : flags) {
        if (!values_.count(k)) throw UsageError("unknown flag for " + spec.name + ": " + k);
        values_[k] = v;
    }
    validate();
}

const std::string& RunConfig::text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("missing config key: " + key);
    return it->second;
}

double RunConfig::real(const std::string& key) const { return parse_number<double>(key, text(key)); }
std::int64_t RunConfig::integer(const std::string& key) const { return parse_number<std::int64_t>(key, text(key)); }
std::uint64_t RunConfig::seed() const { return parse_number<std::uint64_t>("seed", text("seed")); }

bool RunConfig::flag(const std::string& key) const {
    const auto& v = text(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError("invalid boolean for " + key + ": '" + v + "'");
}

std::vector<double> RunConfig::reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(text(key))) out.push_back(parse_number<double>(key, item));
    return out;
}

std::vector<std::int64_t> RunConfig::integers(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const auto& item : split_list(text(key))) out.push_back(parse_number<std::int64_t>(key, item));
    return out;
}

void RunConfig::validate() const {
    const auto& fmt = text("output_format");
    if (fmt != "csv" && fmt != "json") throw UsageError("output_format must be csv or json");
    seed();
    flag("offline");
    if (integer("threads") < 0) throw UsageError("threads must be >= 0");
    if (values_.count("sigma")) {
        const double s = real("sigma");
        if (!(s > 0.0 && s < 2.0)) throw UsageError("sigma must lie in (0, 2)");
    }
    if (values_.count("N_list")) {
        const auto levels = integers("N_list");
        if (levels.empty()) throw UsageError("N_list is empty");
        for (auto N : levels)
            if (!is_prime(N)) throw UsageError("N_list entry " + std::to_string(N) + " is not prime");
    }
    for (const auto& key : {"exhaustive", "primitive_only"})
        if (values_.count(key)) flag(key);
}

}  // namespace lowlying::cli
