#pragma once

// Command-line front end. JSON reports go to stdout, a short table to stderr.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace advht {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kInput = 2;
inline constexpr int kSolver = 3;
inline constexpr int kProperty = 4;
inline constexpr int kMismatch = 5;
}  // namespace exit_code

struct RunReport {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::map<std::string, std::string> file_hashes;  // path -> sha256 hex
  nlohmann::json outputs = nlohmann::json::object();
  std::string version;
  std::uint64_t seed = 0;
  std::int64_t wall_time_ms = 0;
  int exit_code = 0;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

nlohmann::json to_json(const RunReport& r);
RunReport run_report_from_json(const nlohmann::json& doc);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

enum class LogLevel { kError, kInfo, kDebug };
/// Reads ADVHT_LOG; unknown or unset values mean info.
LogLevel log_level_from_env();

/// Rows of "name  value" pairs for the stderr table.
using TableRows = std::vector<std::pair<std::string, std::string>>;
void print_table(std::ostream& err, const std::string& title, const TableRows& rows);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace advht
