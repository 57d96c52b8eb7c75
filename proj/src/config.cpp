#include "dnls/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dnls {

namespace {

const std::vector<std::string> kAll{"*"};

std::vector<ConfigKey> build_schema() {
    const std::vector<std::string> sw{"standing-wave", "simulate", "sweep"};
    const std::vector<std::string> dyn{"simulate", "sweep"};
    return {
        {"run", "seed", "1", "seed", "seed for random test fields", kAll},
        {"run", "output_dir", "", "output-dir", "output directory (default: $DNLS_OUTPUT_DIR, else ./dnls_out)", kAll},
        {"run", "threads", "0", "threads", "worker thread cap (0: all cores)", kAll},

        {"window", "n_min", "-256", "n-min", "first lattice site of the window", kAll},
        {"window", "n_max", "256", "n-max", "last lattice site of the window", kAll},

        {"potential", "family", "exponential", "potential", "zero | single-site | two-site | exponential | file", kAll},
        {"potential", "c", "-0.5", "c", "amplitude (single-site, exponential) or first site value (two-site)", kAll},
        {"potential", "c2", "0", "c2", "second site value (two-site)", kAll},
        {"potential", "a", "1", "a", "decay rate of the exponential family", kAll},
        {"potential", "site", "0", "site", "first site (single-site, two-site)", kAll},
        {"potential", "site2", "1", "site2", "second site (two-site)", kAll},
        {"potential", "radius", "40", "radius", "truncation radius of the exponential family", kAll},
        {"potential", "file", "", "potential-file", "potential file with 'n value' lines (family = file)", kAll},

        {"grids", "theta_grid_size", "200", "theta-grid-size", "number of real angles in theta grids", kAll},
        {"grids", "lambda_grid_size", "64", "lambda-grid-size", "number of energies in the limiting-absorption grid", kAll},

        {"tolerances", "consistency", "1e-9", "tol-consistency", "agreement of the two T forms and Wronskian constancy", kAll},
        {"tolerances", "contour", "1e-6", "tol-contour", "contour-formula projector check", kAll},
        {"tolerances", "residual", "1e-10", "tol-residual", "standing-wave residual", kAll},
        {"tolerances", "norm", "1e-8", "tol-norm", "l2 norm drift per unit time", kAll},
        {"tolerances", "propagator_convergence", "1e-9", "tol-propagator", "quadrature doubling check", kAll},
        {"tolerances", "fourier_cutoff", "1e-14", "tol-fourier", "stopping size of the Fourier iteration terms", kAll},

        {"jost", "sign", "+", "sign", "Jost side: + or -", {"jost"}},
        {"jost", "theta", "1", "theta", "real part of the spectral angle", {"jost"}},
        {"jost", "theta_im", "0", "theta-im", "imaginary part of the spectral angle (<= 0)", {"jost"}},
        {"jost", "sigma", "2", "sigma", "weight exponent of the bound report (1 or 2)", {"jost"}},
        {"jost", "nu_max", "0", "nu-max", "Fourier coefficients per row (0: none written)", {"jost"}},

        {"scattering", "theta_lo", "0.05", "theta-lo", "first angle of the scattering grid", {"scatter"}},
        {"scattering", "theta_hi", "3.0915926535897933", "theta-hi", "last angle of the scattering grid", {"scatter"}},
        {"scattering", "relative_threshold", "1e-8", "threshold", "edge Wronskian threshold relative to max |W|", {"classify"}},

        {"spectral", "edge_guard", "1e-6", "edge-guard", "eigenvalues within this of [0, 4] count as continuous", {"spectrum", "resolvent"}},
        {"spectral", "contour_radius", "64", "contour-radius", "block radius of the contour projector check", {"spectrum"}},
        {"spectral", "contour_points", "512", "contour-points", "quadrature points of the contour check", {"spectrum"}},
        {"spectral", "tau", "2", "tau", "weight exponent of the limiting-absorption constant", {"spectrum"}},
        {"spectral", "lap_block_radius", "128", "lap-radius", "block radius of the limiting-absorption computation", {"spectrum", "norms"}},

        {"resolvent", "z_re", "-1", "z-re", "real part of z", {"resolvent"}},
        {"resolvent", "z_im", "0.5", "z-im", "imaginary part of z", {"resolvent"}},
        {"resolvent", "lambda", "", "lambda", "band energy in [0, 4] for a boundary value (overrides z)", {"resolvent"}},
        {"resolvent", "side", "1", "side", "boundary side: +1 (lambda + i0) or -1", {"resolvent"}},
        {"resolvent", "block_radius", "16", "block-radius", "kernel block radius", {"resolvent"}},

        {"propagator", "t", "1", "t", "time", {"propagate"}},
        {"propagator", "sign", "forward", "time-sign", "forward: e^{-itH}; backward: e^{+itH}", {"propagate", "decay-scan"}},
        {"propagator", "block_radius", "64", "block-radius", "kernel block radius (0: whole window)", {"propagate"}},
        {"propagator", "scan_block_radius", "0", "block-radius", "sup block radius (0: 2 t_max + 32; the window widens to fit)", {"decay-scan"}},
        {"propagator", "quadrature_points", "0", "quadrature-points", "theta nodes (0: automatic)", {"propagate"}},
        {"propagator", "convergence_check", "false", "convergence-check", "recompute a central block with doubled nodes", {"propagate"}},
        {"propagator", "t_min", "1", "t-min", "first positive time of the scan (t = 0 is always included)", {"decay-scan"}},
        {"propagator", "t_max", "200", "t-max", "last time of the scan", {"decay-scan"}},
        {"propagator", "t_count", "40", "t-count", "log-spaced positive times", {"decay-scan"}},
        {"propagator", "fit_lo", "10", "fit-lo", "start of the log-log fit", {"decay-scan"}},
        {"propagator", "fit_hi", "0", "fit-hi", "end of the log-log fit (0: last time)", {"decay-scan"}},

        {"norms", "tau", "1.5", "tau", "smoothing weight exponent (> 1)", {"norms"}},
        {"norms", "t_max", "100", "t-max", "time horizon", {"norms"}},
        {"norms", "dt", "0.03125", "dt", "time step of the sampled flows", {"norms"}},
        {"norms", "source_decay", "1", "source-decay", "source g(s) = exp(-decay s) f", {"norms"}},
        {"norms", "site", "0", "data-site", "initial datum delta at this site", {"norms"}},
        {"norms", "strichartz_r", "6", "strichartz-r", "time exponent r of the Strichartz pair", {"norms"}},
        {"norms", "strichartz_p", "6", "strichartz-p", "space exponent p of the Strichartz pair", {"norms"}},

        {"standing_wave", "power", "7", "power", "nonlinearity power p in |u|^{p-1} u", sw},
        {"standing_wave", "eta_fraction", "0.2", "eta-fraction", "branch extent (omega - E0) / E0", {"standing-wave"}},
        {"standing_wave", "delta_lo", "1e-4", "delta-lo", "smallest (omega - E0) / E0 of the grid", {"standing-wave"}},
        {"standing_wave", "delta_hi", "0.2", "delta-hi", "largest (omega - E0) / E0 of the grid", {"standing-wave"}},
        {"standing_wave", "count", "10", "count", "number of omega values", {"standing-wave"}},
        {"standing_wave", "omegas", "", "omegas", "explicit comma-separated omega list (overrides the grid)", {"standing-wave"}},
        {"standing_wave", "max_iterations", "500", "max-iterations", "fixed-point iteration cap", {"standing-wave"}},
        {"standing_wave", "damping", "0.5", "damping", "fixed-point damping once the plain step grows", {"standing-wave"}},

        {"dynamics", "omega0_rel", "0.1", "omega0-rel", "omega0 = E0 (1 + omega0_rel)", dyn},
        {"dynamics", "epsilon", "1e-3", "epsilon", "l2 size of the perturbation", {"simulate"}},
        {"dynamics", "perturbation", "gaussian", "perturbation", "gaussian | delta | file", dyn},
        {"dynamics", "width", "3", "width", "width of the gaussian perturbation", dyn},
        {"dynamics", "perturbation_site", "0", "perturbation-site", "center of the perturbation", dyn},
        {"dynamics", "perturbation_file", "", "perturbation-file", "perturbation file with 'n re [im]' lines", dyn},
        {"dynamics", "dt", "0.0078125", "dt", "time step", dyn},
        {"dynamics", "t_final", "200", "t-final", "final time", dyn},
        {"dynamics", "stride", "0.5", "stride", "output spacing of the curves", dyn},
        {"dynamics", "snapshot_stride", "10", "snapshot-stride", "spacing of full state snapshots (0: none)", {"simulate"}},
        {"dynamics", "family_radius", "128", "family-radius", "half width of the standing-wave window", dyn},
        {"dynamics", "sigma", "2", "sigma", "weight of the l^{2,-sigma} norm of r", dyn},
        {"dynamics", "scattering_samples", "8", "scattering-samples", "snapshots used for the scattering state", dyn},
        {"dynamics", "scattering_spacing", "10", "scattering-spacing", "spacing of those snapshots", dyn},

        {"sweep", "epsilons", "1e-3,5e-4", "epsilons", "comma-separated epsilon values", {"sweep"}},
        {"sweep", "omega0_rels", "0.05,0.1", "omega0-rels", "comma-separated (omega0 - E0) / E0 values", {"sweep"}},
    };
}

const ConfigKey* find_key(const std::string& section, const std::string& key) {
    for (const auto& k : config_schema()) {
        if (k.section == section && k.key == key) return &k;
    }
    return nullptr;
}

double parse_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": '" + s + "' is not a number");
    }
    if (pos != s.size()) throw std::invalid_argument(what + ": '" + s + "' is not a number");
    return v;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> schema = build_schema();
    return schema;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RunConfig::RunConfig() {
    for (const auto& k : config_schema()) values_[k.section][k.key] = k.default_value;
}

RunConfig RunConfig::from_ini(const std::string& text) {
    boost::property_tree::ptree pt;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    RunConfig cfg;
    for (const auto& [section, node] : pt) {
        if (node.empty()) throw std::invalid_argument("config: key '" + section + "' outside a section");
        for (const auto& [key, value] : node) cfg.set(section, key, value.get_value<std::string>());
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_ini(ss.str());
}

std::string RunConfig::to_ini() const {
    std::ostringstream out;
    std::string current;
    for (const auto& k : config_schema()) {
        if (k.section != current) {
            if (!current.empty()) out << "\n";
            out << "[" << k.section << "]\n";
            current = k.section;
        }
        out << k.key << " = " << values_.at(k.section).at(k.key) << "\n";
    }
    return out.str();
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    if (!find_key(section, key)) throw std::invalid_argument("unknown config key [" + section + "] " + key);
    values_[section][key] = value;
}

void RunConfig::set(const std::string& section, const std::string& key, double value) {
    set(section, key, format_double(value));
}

const std::string& RunConfig::get(const std::string& section, const std::string& key) const {
    if (!find_key(section, key)) throw std::invalid_argument("unknown config key [" + section + "] " + key);
    return values_.at(section).at(key);
}

double RunConfig::get_double(const std::string& section, const std::string& key) const {
    return parse_double(get(section, key), "[" + section + "] " + key);
}

int RunConfig::get_int(const std::string& section, const std::string& key) const {
    const double v = get_double(section, key);
    if (v != std::floor(v) || std::abs(v) > 2e9) {
        throw std::invalid_argument("[" + section + "] " + key + " must be an integer");
    }
    return static_cast<int>(v);
}

bool RunConfig::get_bool(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off" || v.empty()) return false;
    throw std::invalid_argument("[" + section + "] " + key + " must be a boolean");
}

std::vector<double> RunConfig::get_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(get(section, key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        out.push_back(parse_double(item.substr(b, e - b + 1), "[" + section + "] " + key));
    }
    return out;
}

LatticeWindow RunConfig::window() const {
    const int lo = get_int("window", "n_min"), hi = get_int("window", "n_max");
    if (!(lo < 0 && hi > 0)) throw std::invalid_argument("window must satisfy n_min < 0 < n_max");
    return {lo, hi};
}

PotentialSpec RunConfig::potential_spec() const {
    PotentialSpec p;
    p.family = get("potential", "family");
    p.c = get_double("potential", "c");
    p.c2 = get_double("potential", "c2");
    p.a = get_double("potential", "a");
    p.site = get_int("potential", "site");
    p.site2 = get_int("potential", "site2");
    p.radius = get_int("potential", "radius");
    p.file = get("potential", "file");
    return p;
}

std::map<std::string, double> RunConfig::tolerances() const {
    std::map<std::string, double> out;
    for (const auto& [k, v] : values_.at("tolerances")) out[k] = parse_double(v, "[tolerances] " + k);
    return out;
}

std::uint64_t RunConfig::seed() const {
    const std::string& s = get("run", "seed");
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("[run] seed must be a nonnegative integer");
    }
}

void RunConfig::validate() const {
    for (const auto& [k, v] : tolerances()) {
        if (!(v > 0.0)) throw std::invalid_argument("tolerance " + k + " must be positive");
    }
    if (theta_grid_size() < 64) throw std::invalid_argument("theta_grid_size must be at least 64");
    if (lambda_grid_size() < 64) throw std::invalid_argument("lambda_grid_size must be at least 64");
    const LatticeWindow w = window();
    if (w.size() < 3) throw std::invalid_argument("window must hold at least 3 sites");
    const PotentialSpec p = potential_spec();
    static const char* families[] = {"zero", "single-site", "two-site", "exponential", "file"};
    bool known = false;
    for (const char* f : families) known = known || p.family == f;
    if (!known) throw std::invalid_argument("unknown potential family '" + p.family + "'");
    if (p.family == "file" && p.file.empty()) throw std::invalid_argument("potential family 'file' needs [potential] file");
    if (get_int("run", "threads") < 0) throw std::invalid_argument("threads must be nonnegative");
    (void)seed();
}

Potential make_potential(const PotentialSpec& spec, const LatticeWindow& window) {
    if (spec.family == "zero") return potentials::zero(window);
    if (spec.family == "single-site") return potentials::single_site(window, spec.c, spec.site);
    if (spec.family == "two-site") return potentials::two_site(window, spec.c, spec.c2, spec.site, spec.site2);
    if (spec.family == "exponential") return potentials::exponential(window, spec.c, spec.a, spec.radius);
    if (spec.family == "file") return potentials::from_file(spec.file, window);
    throw std::invalid_argument("unknown potential family '" + spec.family + "'");
}

}  // namespace dnls
