#include "ensmc/svgplot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "ensmc/errors.hpp"

namespace ensmc {

namespace {

constexpr double kWidth = 900.0, kHeight = 420.0;
constexpr double kLeft = 60.0, kRight = 880.0, kTop = 20.0, kBottom = 380.0;
constexpr double kLog10E = 0.43429448190325182765;

void append_fixed(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  out.append(buf, ptr);
}

void polyline(std::string& out, const Trace& trace, double TraceRecord::* field,
              const char* color, double lo, double hi) {
  const double n = static_cast<double>(trace.size());
  const double yspan = hi > lo ? hi - lo : 1.0;
  out += "<polyline fill=\"none\" stroke=\"";
  out += color;
  out += "\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double x = n > 1 ? kLeft + (kRight - kLeft) * (i / (n - 1)) : (kLeft + kRight) / 2;
    const double v = trace[i].*field * kLog10E;
    const double y = kBottom - (kBottom - kTop) * ((v - lo) / yspan);
    if (i) out.push_back(' ');
    append_fixed(out, x);
    out.push_back(',');
    append_fixed(out, y);
  }
  out += "\"/>\n";
}

}  // namespace

std::string trace_svg(const Trace& trace) {
  if (trace.empty()) throw IoError("trace_svg: empty trace");

  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const TraceRecord& r : trace) {
    for (double v : {r.mean_log_nu, r.log_eta, r.log_sigma}) {
      const double d = v * kLog10E;
      if (first) {
        lo = hi = d;
        first = false;
      } else {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    }
  }
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi == lo) hi = lo + 1.0;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
  append_fixed(out, kWidth);
  out += "\" height=\"";
  append_fixed(out, kHeight);
  out += "\" viewBox=\"0 0 900 420\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"900\" height=\"420\" fill=\"white\"/>\n";

  // decade gridlines and labels
  for (double d = lo; d <= hi + 0.5; d += 1.0) {
    const double y = kBottom - (kBottom - kTop) * ((d - lo) / (hi - lo));
    out += "<line x1=\"";
    append_fixed(out, kLeft);
    out += "\" y1=\"";
    append_fixed(out, y);
    out += "\" x2=\"";
    append_fixed(out, kRight);
    out += "\" y2=\"";
    append_fixed(out, y);
    out += "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"8\" y=\"";
    append_fixed(out, y + 4.0);
    out += "\" font-size=\"12\" font-family=\"sans-serif\">1e";
    out += std::to_string(static_cast<long>(d));
    out += "</text>\n";
  }
  out += "<line x1=\"";
  append_fixed(out, kLeft);
  out += "\" y1=\"";
  append_fixed(out, kBottom);
  out += "\" x2=\"";
  append_fixed(out, kRight);
  out += "\" y2=\"";
  append_fixed(out, kBottom);
  out += "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  polyline(out, trace, &TraceRecord::mean_log_nu, "red", lo, hi);
  polyline(out, trace, &TraceRecord::log_eta, "green", lo, hi);
  polyline(out, trace, &TraceRecord::log_sigma, "blue", lo, hi);

  out += "<text x=\"620\" y=\"404\" font-size=\"12\" font-family=\"sans-serif\" fill=\"red\">"
         "geometric mean nu</text>\n";
  out += "<text x=\"760\" y=\"404\" font-size=\"12\" font-family=\"sans-serif\" fill=\"green\">"
         "eta</text>\n";
  out += "<text x=\"800\" y=\"404\" font-size=\"12\" font-family=\"sans-serif\" fill=\"blue\">"
         "sigma</text>\n";
  out += "</svg>\n";
  return out;
}

void write_trace_svg(const Trace& trace, const std::string& path) {
  const std::string svg = trace_svg(trace);  // build first so failures write nothing
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << svg;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace ensmc
