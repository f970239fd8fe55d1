#include "svg.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "fdp/error.hpp"

namespace fdp::cli {

void write_curves_svg(const std::filesystem::path& path, const std::vector<CurveSet>& sets, const std::string& title) {
  constexpr double W = 640, H = 400, pad = 40;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : sets)
    for (const auto& f : s.curves) {
      const Axis& a = f.axes().front();
      x0 = std::min(x0, a.lo);
      x1 = std::max(x1, a.point(a.size - 1));
      for (std::size_t i = 0; i < f.num_points(); ++i) {
        y0 = std::min(y0, f.value(i, 0));
        y1 = std::max(y1, f.value(i, 0));
      }
    }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); };
  auto py = [&](double y) { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); };

  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << pad << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n"
      << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
  if (y0 < 0 && y1 > 0)
    out << "<line x1=\"" << pad << "\" x2=\"" << W - pad << "\" y1=\"" << py(0) << "\" y2=\"" << py(0)
        << "\" stroke=\"#ccc\"/>\n";
  for (const auto& s : sets)
    for (const auto& f : s.curves) {
      const Axis& a = f.axes().front();
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-opacity=\"0.5\" stroke-width=\"1\" points=\"";
      for (std::size_t i = 0; i < f.num_points(); ++i)
        out << px(a.point(i)) << ',' << py(f.value(i, 0)) << ' ';
      out << "\"/>\n";
    }
  out << "</svg>\n";
}

}  // namespace fdp::cli
