#include "affectbench/ledger.hpp"

#include "affectbench/errors.hpp"
#include "affectbench/report_io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>

namespace affectbench {

namespace fs = std::filesystem;

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
  Impl() : ctx(EVP_MD_CTX_new()) {
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) throw std::runtime_error("SHA-256 init failed");
  }
  ~Impl() { EVP_MD_CTX_free(ctx); }
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {}
Sha256::~Sha256() = default;
Sha256::Sha256(Sha256&&) noexcept = default;
Sha256& Sha256::operator=(Sha256&&) noexcept = default;

Sha256& Sha256::update(std::string_view bytes) {
  EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
  return *this;
}

Sha256& Sha256::update_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) update(std::string_view(buf, std::size_t(in.gcount())));
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  return *this;
}

std::string Sha256::hex_digest() {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, md, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) { return Sha256().update(bytes).hex_digest(); }

std::string tree_digest(const fs::path& base, std::span<const std::string> subdirs) {
  std::vector<fs::path> files;
  for (const auto& sub : subdirs) {
    const fs::path root = base / sub;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) continue;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file()) files.push_back(entry.path().lexically_relative(base));
    }
  }
  std::sort(files.begin(), files.end());
  Sha256 h;
  for (const auto& rel : files) {
    const std::string name = rel.generic_string();
    h.update(name).update(std::string_view("\0", 1));
    h.update(sha256_hex(read_text_file(base / rel)));
  }
  return h.hex_digest();
}

RunLedger::RunLedger(fs::path file) : file_(std::move(file)) {
  std::error_code ec;
  if (!fs::exists(file_, ec)) return;
  try {
    const auto j = nlohmann::json::parse(read_text_file(file_));
    for (const auto& [stage, rec] : j.at("stages").items()) {
      records_[stage] = {rec.at("input").get<std::string>(), rec.at("output").get<std::string>()};
    }
  } catch (const nlohmann::json::exception&) {
    // Unreadable ledger: every stage runs again.
    records_.clear();
  }
}

bool RunLedger::is_current(const std::string& stage, const std::string& input_digest,
                           const std::string& output_digest) const {
  const auto* r = find(stage);
  return r && r->input_digest == input_digest && r->output_digest == output_digest;
}

const RunLedger::Record* RunLedger::find(const std::string& stage) const {
  const auto it = records_.find(stage);
  return it == records_.end() ? nullptr : &it->second;
}

void RunLedger::record(const std::string& stage, Record record) {
  records_[stage] = std::move(record);
  save();
}

void RunLedger::save() const {
  nlohmann::ordered_json j;
  j["stages"] = nlohmann::ordered_json::object();
  for (const auto& [stage, rec] : records_) {
    j["stages"][stage] = {{"input", rec.input_digest}, {"output", rec.output_digest}};
  }
  write_text_file(file_, j.dump(2) + '\n');
}

}  // namespace affectbench
