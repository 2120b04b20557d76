#include "pfls/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "pfls/error.hpp"

namespace pfls {

namespace {

constexpr char kMagic[4] = {'P', 'F', 'L', 'S'};
constexpr std::uint32_t kVersion = 1;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Dataset::Dataset(std::size_t n, std::size_t d, std::vector<double> values)
    : n_(n), d_(d), values_(std::move(values)) {
  if (n_ == 0 || d_ == 0) throw FormatError("dataset must have at least one row and one column");
  if (values_.size() != n_ * d_) throw FormatError("dataset value count does not match n*d");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw FormatError("non-finite coordinate at row " + std::to_string(i / d_ + 1) + ", column " +
                        std::to_string(i % d_ + 1));
    }
  }
}

Dataset Dataset::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw FormatError("dataset must have at least one row");
  const std::size_t d = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw FormatError("ragged rows: row " + std::to_string(i + 1) + " has wrong width");
    values.insert(values.end(), rows[i].begin(), rows[i].end());
  }
  return Dataset(rows.size(), d, std::move(values));
}

Dataset Dataset::subset(std::span<const std::size_t> ids) const {
  std::vector<double> values;
  values.reserve(ids.size() * d_);
  for (std::size_t id : ids) {
    if (id >= n_) throw ParameterError("subset id out of range");
    const auto r = row(id);
    values.insert(values.end(), r.begin(), r.end());
  }
  return Dataset(ids.size(), d_, std::move(values));
}

FileFormat parse_file_format(std::string_view name) {
  if (name == "csv") return FileFormat::csv;
  if (name == "pfls-bin") return FileFormat::pfls_bin;
  throw ParameterError("unknown file format '" + std::string(name) + "' (expected csv or pfls-bin)");
}

Dataset read_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t d = 0;
  std::size_t n = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    std::size_t cols = 0;
    std::size_t pos = 0;
    while (true) {
      const auto comma = content.find(',', pos);
      const std::string_view cell =
          trim(content.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      ++cols;
      double value = 0.0;
      const auto* begin = cell.data();
      const auto* end = cell.data() + cell.size();
      if (!cell.empty() && *begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw FormatError("parse error at row " + std::to_string(line_no) + ", column " + std::to_string(cols) +
                          ": '" + std::string(cell) + "'");
      }
      values.push_back(value);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (n == 0) {
      d = cols;
    } else if (cols != d) {
      throw FormatError("ragged rows: row " + std::to_string(line_no) + " has " + std::to_string(cols) +
                        " columns, expected " + std::to_string(d));
    }
    ++n;
  }
  if (n == 0) throw FormatError("empty dataset file");
  return Dataset(n, d, std::move(values));
}

void write_csv(const Dataset& data, std::ostream& out) {
  char buf[32];
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto r = data.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out.put(',');
      // Shortest round-trip representation.
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r[j]);
      out.write(buf, ptr - buf);
    }
    out.put('\n');
  }
}

Dataset read_pfls_bin(std::istream& in) {
  char magic[4];
  detail::read_exact(in, magic, 4, "pfls-bin magic");
  if (!std::equal(magic, magic + 4, kMagic)) throw FormatError("bad magic bytes; not a pfls-bin file");
  const std::uint32_t version = detail::read_u32(in, "pfls-bin version");
  if (version != kVersion) throw FormatError("unsupported pfls-bin version " + std::to_string(version));
  const std::uint64_t n = detail::read_u64(in, "pfls-bin n");
  const std::uint64_t d = detail::read_u64(in, "pfls-bin d");
  if (n == 0 || d == 0) throw FormatError("empty dataset in pfls-bin file");
  if (d > (std::uint64_t(1) << 32) || n > (std::uint64_t(1) << 40) / d) {
    throw FormatError("implausible pfls-bin shape");
  }
  auto values = detail::read_f64s(in, n * d, "pfls-bin values");
  return Dataset(n, d, std::move(values));
}

void write_pfls_bin(const Dataset& data, std::ostream& out) {
  out.write(kMagic, 4);
  detail::write_u32(out, kVersion);
  detail::write_u64(out, data.n());
  detail::write_u64(out, data.d());
  detail::write_f64s(out, data.values());
}

Dataset load_dataset(const std::filesystem::path& path, FileFormat format) {
  std::ifstream in(path, format == FileFormat::csv ? std::ios::in : std::ios::in | std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return format == FileFormat::csv ? read_csv(in) : read_pfls_bin(in);
}

void save_dataset(const Dataset& data, const std::filesystem::path& path, FileFormat format) {
  std::ofstream out(path, format == FileFormat::csv ? std::ios::out : std::ios::out | std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  if (format == FileFormat::csv) {
    write_csv(data, out);
  } else {
    write_pfls_bin(data, out);
  }
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

std::uint64_t content_hash(const Dataset& data) {
  std::ostringstream buf;
  detail::write_u64(buf, data.n());
  detail::write_u64(buf, data.d());
  detail::write_f64s(buf, data.values());
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : buf.str()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace pfls
