#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dnls/lattice.hpp"

namespace dnls {

/// One configuration key. `commands` lists the CLI subcommands exposing it as
/// `--flag` ("*" for all).
struct ConfigKey {
    std::string section;
    std::string key;
    std::string default_value;
    std::string flag;
    std::string help;
    std::vector<std::string> commands;
};

/// Every key with its default, in file order.
const std::vector<ConfigKey>& config_schema();

struct PotentialSpec {
    std::string family = "exponential";  // zero | single-site | two-site | exponential | file
    double c = -0.5;
    double c2 = 0.0;
    double a = 1.0;
    int site = 0;
    int site2 = 1;
    int radius = 40;
    std::string file;
};

/// Sectioned key/value run configuration stored as INI text. Values are kept
/// as the exact strings read or set, so serialization round-trips losslessly.
class RunConfig {
public:
    /// All schema defaults.
    RunConfig();

    static RunConfig from_ini(const std::string& text);
    static RunConfig load(const std::string& path);
    std::string to_ini() const;

    /// Throws std::invalid_argument for keys outside the schema.
    void set(const std::string& section, const std::string& key, const std::string& value);
    void set(const std::string& section, const std::string& key, double value);
    const std::string& get(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    int get_int(const std::string& section, const std::string& key) const;
    bool get_bool(const std::string& section, const std::string& key) const;
    /// Comma-separated list of reals; empty string gives an empty list.
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

    LatticeWindow window() const;
    PotentialSpec potential_spec() const;
    int theta_grid_size() const { return get_int("grids", "theta_grid_size"); }
    int lambda_grid_size() const { return get_int("grids", "lambda_grid_size"); }
    std::map<std::string, double> tolerances() const;
    std::uint64_t seed() const;
    std::string output_dir() const { return get("run", "output_dir"); }

    /// Positive tolerances, grid sizes >= 64, a valid window and potential family.
    void validate() const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const { return values_; }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;

private:
    std::map<std::string, std::map<std::string, std::string>> values_;
};

/// "%.17g": 17 significant digits, reads back to the same double.
std::string format_double(double x);

Potential make_potential(const PotentialSpec& spec, const LatticeWindow& window);

}  // namespace dnls
