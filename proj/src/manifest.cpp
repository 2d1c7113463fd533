#include "tourexp/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tourexp/errors.hpp"

namespace tourexp {

namespace {

std::string digest_hex(const unsigned char* data, unsigned len) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[data[i] >> 4];
    out += hex[data[i] & 0xf];
  }
  return out;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw Error("sha256 digest failed");
  return digest_hex(digest, len);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for hashing: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.good()) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void RunManifest::add_output(const std::filesystem::path& out_dir,
                             const std::filesystem::path& file) {
  Output o;
  o.path = std::filesystem::relative(file, out_dir).generic_string();
  o.sha256 = sha256_file(file);
  o.bytes = static_cast<std::uint64_t>(std::filesystem::file_size(file));
  outputs.push_back(std::move(o));
}

std::string RunManifest::to_json() const {
  std::vector<Output> sorted = outputs;
  std::sort(sorted.begin(), sorted.end(),
            [](const Output& a, const Output& b) { return a.path < b.path; });
  nlohmann::json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["inputs"] = inputs;
  j["parameters"] = parameters;
  j["outputs"] = nlohmann::json::array();
  for (const auto& o : sorted)
    j["outputs"].push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  return j.dump(2) + "\n";
}

std::filesystem::path RunManifest::write(const std::filesystem::path& out_dir) const {
  const std::filesystem::path path = out_dir / "manifest.json";
  atomic_write(path, to_json());
  return path;
}

}  // namespace tourexp
