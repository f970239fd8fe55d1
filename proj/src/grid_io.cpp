#include "fdp/grid_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "binary_io.hpp"
#include "fdp/error.hpp"

namespace fdp {

namespace {

constexpr char kMagic[4] = {'F', 'D', 'P', 'G'};
constexpr std::uint32_t kVersion = 1;
using binary::get;
using binary::put;

}  // namespace

void write_grid(std::ostream& os, const GridFunction& f) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.ndim()));
  for (const auto& a : f.axes()) put<std::uint32_t>(os, static_cast<std::uint32_t>(a.size));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.channels()));
  for (const auto& a : f.axes()) {
    put<double>(os, a.lo);
    put<double>(os, a.hi);
  }
  const auto vals = f.values();
  os.write(reinterpret_cast<const char*>(vals.data()), static_cast<std::streamsize>(vals.size() * sizeof(double)));
  if (!os) throw Error(ErrorKind::Io, "failed writing grid stream");
}

GridFunction read_grid(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::Io, "bad grid magic");
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) throw Error(ErrorKind::Io, "unsupported grid version " + std::to_string(version));
  const auto ndim = get<std::uint32_t>(is);
  if (ndim == 0 || ndim > 8) throw Error(ErrorKind::Io, "implausible grid rank");
  std::vector<Axis> axes(ndim);
  for (auto& a : axes) a.size = get<std::uint32_t>(is);
  const auto channels = get<std::uint32_t>(is);
  for (auto& a : axes) {
    a.lo = get<double>(is);
    a.hi = get<double>(is);
  }
  std::vector<double> vals(num_points(axes) * channels);
  if (!is.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size() * sizeof(double))))
    throw Error(ErrorKind::Io, "truncated grid values");
  return GridFunction(std::move(axes), channels, std::move(vals));
}

void save_grid(const std::filesystem::path& path, const GridFunction& f) { save_grids(path, {f}); }

GridFunction load_grid(const std::filesystem::path& path) {
  auto all = load_grids(path);
  if (all.size() != 1) throw Error(ErrorKind::Io, path.string() + ": expected exactly one grid function");
  return std::move(all.front());
}

void save_grids(const std::filesystem::path& path, const std::vector<GridFunction>& fs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string());
  for (const auto& f : fs) write_grid(os, f);
}

std::vector<GridFunction> load_grids(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<GridFunction> out;
  while (is.peek() != std::char_traits<char>::eof()) out.push_back(read_grid(is));
  return out;
}

void save_csv(const std::filesystem::path& path, const std::vector<GridFunction>& fs) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string());
  os << std::setprecision(17);
  for (const auto& f : fs) {
    if (f.ndim() != 1 || f.channels() != 1) throw Error(ErrorKind::InvalidArgument, "CSV export is 1D single-channel only");
    const auto v = f.values();
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << '\n';
  }
}

std::vector<GridFunction> load_csv(const std::filesystem::path& path, double lo, double hi) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<GridFunction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw Error(ErrorKind::Io, path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    out.emplace_back(std::vector<Axis>{{vals.size(), lo, hi}}, 1, std::move(vals));
  }
  return out;
}

}  // namespace fdp
