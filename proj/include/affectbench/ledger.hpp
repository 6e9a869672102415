#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affectbench {

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(Sha256&&) noexcept;
  Sha256& operator=(Sha256&&) noexcept;

  Sha256& update(std::string_view bytes);
  /// Throws IoError if the file cannot be read.
  Sha256& update_file(const std::filesystem::path& path);
  std::string hex_digest();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view bytes);

/// Digest of every regular file below base/subdir for each subdir (path
/// relative to `base` + contents), visited in sorted order. Missing
/// subdirectories contribute nothing.
std::string tree_digest(const std::filesystem::path& base, std::span<const std::string> subdirs);

/// Per-stage completion records persisted as JSON. A stage counts as done
/// when its recorded input digest matches and its output tree still hashes
/// to the recorded output digest.
class RunLedger {
 public:
  struct Record {
    std::string input_digest;
    std::string output_digest;
  };

  explicit RunLedger(std::filesystem::path file);

  bool is_current(const std::string& stage, const std::string& input_digest,
                  const std::string& output_digest) const;
  /// Records and persists immediately.
  void record(const std::string& stage, Record record);
  const Record* find(const std::string& stage) const;

 private:
  void save() const;

  std::filesystem::path file_;
  std::map<std::string, Record> records_;
};

}  // namespace affectbench
