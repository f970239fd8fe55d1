#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "fdp/error.hpp"

namespace fdp::binary {

static_assert(std::endian::native == std::endian::little, "binary IO assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error(ErrorKind::Io, "truncated binary stream");
  return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
  put<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > (1u << 30)) throw Error(ErrorKind::Io, "implausible string length in binary stream");
  std::string s(n, '\0');
  if (!is.read(s.data(), static_cast<std::streamsize>(n))) throw Error(ErrorKind::Io, "truncated binary stream");
  return s;
}

inline void put_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
  os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

inline Eigen::MatrixXd get_matrix(std::istream& is) {
  const auto r = get<std::uint32_t>(is);
  const auto c = get<std::uint32_t>(is);
  Eigen::MatrixXd m(r, c);
  if (!is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double))))
    throw Error(ErrorKind::Io, "truncated binary stream");
  return m;
}

}  // namespace fdp::binary
