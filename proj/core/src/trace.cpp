#include "ensmc/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "ensmc/errors.hpp"

namespace ensmc {

const char* const kTraceCsvHeader =
    "iter,slow_evals,fast_evals,log_post,mean_log_nu,log_eta,log_sigma,acc_slow,acc_fast";

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError("trace csv: bad numeric field '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError("trace csv: bad integer field '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string trace_to_csv(const Trace& trace) {
  std::string out(kTraceCsvHeader);
  out.push_back('\n');
  for (const TraceRecord& r : trace) {
    out += std::to_string(r.iter);
    out.push_back(',');
    out += std::to_string(r.slow_evals);
    out.push_back(',');
    out += std::to_string(r.fast_evals);
    out.push_back(',');
    append_double(out, r.log_post);
    out.push_back(',');
    append_double(out, r.mean_log_nu);
    out.push_back(',');
    append_double(out, r.log_eta);
    out.push_back(',');
    append_double(out, r.log_sigma);
    out.push_back(',');
    append_double(out, r.acc_slow);
    out.push_back(',');
    append_double(out, r.acc_fast);
    out.push_back('\n');
  }
  return out;
}

Trace trace_from_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("trace csv: empty input");
  if (line != kTraceCsvHeader) throw IoError("trace csv: unexpected header '" + line + "'");
  Trace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view rest(line);
    std::string_view field[9];
    for (int i = 0; i < 9; ++i) {
      const std::size_t comma = rest.find(',');
      if (i < 8) {
        if (comma == std::string_view::npos) throw IoError("trace csv: short row '" + line + "'");
        field[i] = rest.substr(0, comma);
        rest = rest.substr(comma + 1);
      } else {
        if (comma != std::string_view::npos) throw IoError("trace csv: long row '" + line + "'");
        field[i] = rest;
      }
    }
    TraceRecord r;
    r.iter = parse_u64(field[0]);
    r.slow_evals = parse_u64(field[1]);
    r.fast_evals = parse_u64(field[2]);
    r.log_post = parse_double(field[3]);
    r.mean_log_nu = parse_double(field[4]);
    r.log_eta = parse_double(field[5]);
    r.log_sigma = parse_double(field[6]);
    r.acc_slow = parse_double(field[7]);
    r.acc_fast = parse_double(field[8]);
    trace.push_back(r);
  }
  return trace;
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << trace_to_csv(trace);
  if (!out) throw IoError("write failed for '" + path + "'");
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return trace_from_csv_text(ss.str());
}

}  // namespace ensmc
