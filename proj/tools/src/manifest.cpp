#include "stirring_cli/manifest.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>

#ifndef STIRRING_VERSION
#define STIRRING_VERSION "unknown"
#endif

namespace stirring::cli {
namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("SHA-256 initialisation failed");
  }
  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

Manifest::Manifest(std::string command, std::string experiment, const std::string& config_text, int threads)
    : command_(std::move(command)),
      experiment_(std::move(experiment)),
      config_hash_(sha256_hex(config_text)),
      threads_(threads) {}

void Manifest::add_file(const std::filesystem::path& path) {
  files_.emplace_back(path.filename().string(), sha256_file(path));
}

void Manifest::add_timing(const std::string& phase, double seconds) { timings_.emplace_back(phase, seconds); }

void Manifest::add_note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }

void Manifest::write(const std::filesystem::path& dir) const {
  nlohmann::ordered_json j;
  j["tool"] = "stirring";
  j["version"] = STIRRING_VERSION;
  j["command"] = command_;
  j["experiment"] = experiment_;
  j["config_sha256"] = config_hash_;
  j["threads"] = threads_;
  auto& files = j["files"] = nlohmann::ordered_json::object();
  for (const auto& [name, hash] : files_) files[name] = hash;
  auto& timings = j["timings_s"] = nlohmann::ordered_json::object();
  for (const auto& [phase, s] : timings_) timings[phase] = s;
  if (!notes_.empty()) {
    auto& notes = j["notes"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : notes_) notes[k] = v;
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", (dir / "manifest.json").string()));
  out << j.dump(2) << '\n';
}

}  // namespace stirring::cli
