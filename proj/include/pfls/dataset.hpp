#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace pfls {

/// Dense n x d matrix of finite doubles, one point per row. Point ids are
/// the row indices 0..n-1.
class Dataset {
 public:
  Dataset(std::size_t n, std::size_t d, std::vector<double> values);

  static Dataset from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * d_, d_};
  }
  const std::vector<double>& values() const { return values_; }

  /// Rows selected by `ids`, in that order.
  Dataset subset(std::span<const std::size_t> ids) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> values_;
};

enum class FileFormat { csv, pfls_bin };

FileFormat parse_file_format(std::string_view name);

/// CSV without header; comma separated; one point per line.
Dataset read_csv(std::istream& in);
void write_csv(const Dataset& data, std::ostream& out);

// pfls-bin: "PFLS" | u32 version=1 | u64 n | u64 d | n*d f64, all little endian.
Dataset read_pfls_bin(std::istream& in);
void write_pfls_bin(const Dataset& data, std::ostream& out);

Dataset load_dataset(const std::filesystem::path& path, FileFormat format);
void save_dataset(const Dataset& data, const std::filesystem::path& path, FileFormat format);

/// FNV-1a over the raw little-endian bytes of shape and values.
std::uint64_t content_hash(const Dataset& data);

}  // namespace pfls
