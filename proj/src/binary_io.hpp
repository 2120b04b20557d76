#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pfls/error.hpp"

namespace pfls::detail {

// Little-endian fixed-width encoding shared by the dataset and index containers.

template <typename T>
T byteswap_if_needed(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
  v = byteswap_if_needed(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  v = byteswap_if_needed(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void write_f64s(std::ostream& out, std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) write_f64(out, v);
  }
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void read_exact(std::istream& in, void* dst, std::size_t bytes, const char* what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw FormatError(std::string("truncated input while reading ") + what);
  }
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
  std::uint32_t v;
  read_exact(in, &v, sizeof v, what);
  return byteswap_if_needed(v);
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
  std::uint64_t v;
  read_exact(in, &v, sizeof v, what);
  return byteswap_if_needed(v);
}

inline double read_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(read_u64(in, what));
}

inline std::vector<double> read_f64s(std::istream& in, std::size_t count, const char* what) {
  std::vector<double> values(count);
  read_exact(in, values.data(), count * sizeof(double), what);
  if constexpr (std::endian::native == std::endian::big) {
    for (double& v : values) v = byteswap_if_needed(v);
  }
  return values;
}

inline std::string read_string(std::istream& in, const char* what) {
  const std::uint64_t size = read_u64(in, what);
  if (size > (1u << 20)) throw FormatError(std::string("implausible string length in ") + what);
  std::string s(size, '\0');
  read_exact(in, s.data(), size, what);
  return s;
}

}  // namespace pfls::detail
