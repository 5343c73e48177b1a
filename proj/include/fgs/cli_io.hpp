#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fgs/asymptotics.hpp"

namespace fgs {

inline constexpr const char* kToolVersion = "1.0.0";

enum class ExitCode : int { ok = 0, assertion = 1, convergence = 2, config = 3 };

enum class KeyType { integer, real, boolean, text, real_list, integer_list };

struct ConfigKey {
    std::string name;  // section.key
    KeyType type;
    std::string default_value;
    std::string help;
};

// Every accepted key with its default.
const std::vector<ConfigKey>& config_schema();

// Resolved configuration: every schema key has a canonical value.
struct RunConfig {
    std::map<std::string, std::string> values;
    std::set<std::string> defaulted;  // keys still holding their default

    // Type-checks and canonicalizes; unknown keys throw ConfigError.
    void set(const std::string& key, const std::string& value);

    const std::string& text(const std::string& key) const;
    int integer(const std::string& key) const;
    double real(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::vector<double> real_list(const std::string& key) const;
    std::vector<int> integer_list(const std::string& key) const;

    bool strict() const { return boolean("run.strict"); }
    bool box_mode() const { return text("problem.mode") == "box"; }
    ProblemParams params() const;  // at problem.s
    ProblemParams params(double s) const;
    Potential potential() const;
    MinimizeConfig solver() const;
    SweepConfig sweep() const;
    RadialGrid radial_grid() const;
    BoxGrid box_grid() const;
};

RunConfig default_config();

// Flat "[section]" blocks of "key = value" lines; '#' and ';' start comments.
// Keys may also be written dotted (section.key) or by a unique short name.
RunConfig parse_config(const std::string& text);

// Cross-field checks; with run.strict the potential assumptions must hold.
void validate_config(const RunConfig& cfg);

// Resolves a dotted or unique short key name; empty if unknown.
std::string resolve_key(const std::string& name);

struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;  // resolved echo
    std::set<std::string> defaulted;
    std::vector<std::pair<std::string, double>> derived;
    std::vector<std::pair<std::string, double>> stages;  // wall seconds
    std::vector<std::pair<std::string, bool>> convergence;
    double symbol_cap = 0.0;
    double resolvable_mu_min = 0.0;
    double resolvable_s_min = 0.0;
    int cache_hits = 0;
    int cache_misses = 0;
    int exit_code = 0;
};

std::string manifest_json(const RunManifest& m);

// Runs one subcommand, writing artifacts into output.dir.
int run(const std::string& command, const RunConfig& cfg, std::ostream& out);

// Full command line entry point: subcommand, --config, --strict and one flag per key.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fgs
