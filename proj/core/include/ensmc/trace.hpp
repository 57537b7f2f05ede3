#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ensmc {

// One diagnostics row.  acc_slow / acc_fast are cumulative acceptance
// fractions of the slow-coordinate and fast-only update groups, so the final
// row reproduces the run's aggregate rates.
struct TraceRecord {
  std::uint64_t iter = 0;
  std::uint64_t slow_evals = 0;
  std::uint64_t fast_evals = 0;
  double log_post = 0.0;
  double mean_log_nu = 0.0;
  double log_eta = 0.0;
  double log_sigma = 0.0;
  double acc_slow = 0.0;
  double acc_fast = 0.0;
};

using Trace = std::vector<TraceRecord>;

// CSV persistence.  Doubles are written in shortest round-trip form, so
// write -> read -> write is byte-identical.
extern const char* const kTraceCsvHeader;
std::string trace_to_csv(const Trace& trace);
Trace trace_from_csv_text(const std::string& text);
void write_trace_csv(const Trace& trace, const std::string& path);
Trace read_trace_csv(const std::string& path);

}  // namespace ensmc
