#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnls/config.hpp"

namespace dnls {

inline constexpr const char* kVersion = "0.1.0";

/// Output directory: explicit flag, then [run] output_dir, then $DNLS_OUTPUT_DIR,
/// then ./dnls_out.
std::filesystem::path resolve_output_dir(const std::string& flag, const RunConfig& cfg);

/// CSV with a header row, %.17g numbers, comma separator and LF endings.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Artifacts of one run. Every file goes through write_csv / write_json and is
/// listed in manifest.json by finish().
class RunOutput {
public:
    RunOutput(std::filesystem::path dir, std::string subcommand, const RunConfig& cfg);

    const std::filesystem::path& dir() const { return dir_; }

    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);
    void write_json(const std::string& name, const nlohmann::json& j);
    /// Value reported under "measured" in the manifest.
    void measure(const std::string& key, nlohmann::json value);
    /// Extra manifest entry (sub-run index and the like).
    void note(const std::string& key, nlohmann::json value);

    /// Writes manifest.json; returns its path.
    std::filesystem::path finish();

private:
    std::filesystem::path dir_;
    std::string subcommand_;
    RunConfig config_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> files_;
    nlohmann::json measured_ = nlohmann::json::object();
    nlohmann::json notes_ = nlohmann::json::object();
};

/// Config as nested JSON objects of strings.
nlohmann::json config_json(const RunConfig& cfg);

/// {"status": "error", "subcommand", "kind", "message"} as error.json in dir
/// (created if needed). Returns the record.
nlohmann::json write_error_record(const std::filesystem::path& dir, const std::string& subcommand,
                                  const std::string& kind, const std::string& message);

/// JSON number, or null when x is not finite.
nlohmann::json json_number(double x);

}  // namespace dnls
