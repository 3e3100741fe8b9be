#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lowlying::cli {

using KeyValues = std::map<std::string, std::string>;

// Malformed flags, config lines or values; maps to exit code 64.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OptionSpec {
    std::string key;
    std::string flags;  // CLI11 flag string, e.g. "--N,--N_list"
    std::string fallback;
    std::string help;
    bool is_switch = false;
};

struct SubcommandSpec {
    std::string name;
    std::string help;
    std::vector<OptionSpec> options;  // common options included
};

const std::vector<SubcommandSpec>& subcommands();
const SubcommandSpec& subcommand(std::string_view name);
// Keys accepted in a config file but only forwarded to the database client.
const std::vector<std::string>& client_keys();

// `key = value` lines; blank lines and lines starting with '#' are skipped.
KeyValues parse_flat(std::string_view text);
KeyValues read_flat_file(const std::string& path);

// defaults < file < flags. File keys owned by other subcommands are ignored; unknown keys are usage errors.
class RunConfig {
public:
    RunConfig(const SubcommandSpec& spec, const KeyValues& file, const KeyValues& flags);

    const std::string& subcommand() const { return subcommand_; }
    const KeyValues& values() const { return values_; }
    const KeyValues& client_values() const { return client_; }

    const std::string& text(const std::string& key) const;
    double real(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::uint64_t seed() const;
    bool flag(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    std::vector<std::int64_t> integers(const std::string& key) const;

private:
    void validate() const;
    std::string subcommand_;
    KeyValues values_;
    KeyValues client_;
};

}  // namespace lowlying::cli
