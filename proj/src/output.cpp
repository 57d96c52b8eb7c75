#include "dnls/output.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace dnls {

namespace fs = std::filesystem;

fs::path resolve_output_dir(const std::string& flag, const RunConfig& cfg) {
    if (!flag.empty()) return flag;
    if (!cfg.output_dir().empty()) return cfg.output_dir();
    if (const char* env = std::getenv("DNLS_OUTPUT_DIR"); env && *env) return env;
    return "dnls_out";
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_double(row[i]);
        f << '\n';
    }
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

nlohmann::json json_number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

nlohmann::json config_json(const RunConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [section, keys] : cfg.sections()) {
        for (const auto& [k, v] : keys) j[section][k] = v;
    }
    return j;
}

RunOutput::RunOutput(fs::path dir, std::string subcommand, const RunConfig& cfg)
    : dir_(std::move(dir)), subcommand_(std::move(subcommand)), config_(cfg),
      start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
}

void RunOutput::write_csv(const std::string& name, const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& rows) {
    fs::create_directories((dir_ / name).parent_path());
    dnls::write_csv(dir_ / name, header, rows);
    files_.push_back(name);
}

void RunOutput::write_json(const std::string& name, const nlohmann::json& j) {
    fs::create_directories((dir_ / name).parent_path());
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << j.dump(2) << '\n';
    files_.push_back(name);
}

void RunOutput::measure(const std::string& key, nlohmann::json value) { measured_[key] = std::move(value); }

void RunOutput::note(const std::string& key, nlohmann::json value) { notes_[key] = std::move(value); }

fs::path RunOutput::finish() {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    nlohmann::json m;
    m["status"] = "ok";
    m["subcommand"] = subcommand_;
    m["versions"] = {{"dnls", kVersion},
                     {"compiler", __VERSION__},
                     {"cxx_standard", static_cast<long>(__cplusplus)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    m["wall_time_seconds"] = wall;
    m["config"] = config_json(config_);
    m["measured"] = measured_;
    for (const auto& [k, v] : notes_.items()) m[k] = v;
    m["files"] = files_;
    const fs::path path = dir_ / "manifest.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << m.dump(2) << '\n';
    return path;
}

nlohmann::json write_error_record(const fs::path& dir, const std::string& subcommand, const std::string& kind,
                                  const std::string& message) {
    nlohmann::json j{{"status", "error"}, {"subcommand", subcommand}, {"kind", kind}, {"message", message}};
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!ec) {
        std::ofstream f(dir / "error.json", std::ios::binary);
        if (f) f << j.dump(2) << '\n';
    }
    return j;
}

}  // namespace dnls
