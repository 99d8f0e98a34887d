#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <memory>
#include <ostream>
#include <sstream>

#include "advht/cli.hpp"
#include "advht/model.hpp"

namespace advht {

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json files = nlohmann::json::object();
  for (const auto& [path, hash] : r.file_hashes) files[path] = hash;
  return nlohmann::json{{"command", r.command},
                        {"inputs", {{"parameters", r.parameters}, {"files", files}}},
                        {"outputs", r.outputs},
                        {"versions", {{"advht", r.version}}},
                        {"seed", r.seed},
                        {"wall_time_ms", r.wall_time_ms},
                        {"exit_code", r.exit_code}};
}

RunReport run_report_from_json(const nlohmann::json& doc) {
  try {
    RunReport r;
    r.command = doc.at("command").get<std::string>();
    const auto& in = doc.at("inputs");
    r.parameters = in.at("parameters");
    for (const auto& [path, hash] : in.at("files").items()) r.file_hashes[path] = hash.get<std::string>();
    r.outputs = doc.at("outputs");
    r.version = doc.at("versions").at("advht").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.wall_time_ms = doc.at("wall_time_ms").get<std::int64_t>();
    r.exit_code = doc.at("exit_code").get<int>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed run report: ") + e.what());
  }
}

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

LogLevel log_level_from_env() {
  const char* v = std::getenv("ADVHT_LOG");
  if (!v) return LogLevel::kInfo;
  const std::string s(v);
  if (s == "error") return LogLevel::kError;
  if (s == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void print_table(std::ostream& err, const std::string& title, const TableRows& rows) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  err << title << '\n';
  for (const auto& [k, v] : rows) err << "  " << std::left << std::setw(static_cast<int>(width)) << k << "  " << v << '\n';
}

}  // namespace advht
