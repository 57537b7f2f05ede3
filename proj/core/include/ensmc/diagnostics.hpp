#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ensmc/trace.hpp"

namespace ensmc {

// Effective sample size by the initial-positive-sequence autocorrelation
// estimator: N / (1 + 2 sum rho_t), with the sum truncated at the first
// nonpositive even-lag pair sum (rho_2m + rho_2m+1).  Clamped to [1, N].
// Requires length >= 10.
double ess(std::span<const double> series);

// Sign changes of (log_sigma - threshold) across consecutive records.
int mode_switch_count(std::span<const double> log_sigma, double threshold);
int mode_switch_count(const Trace& trace, double threshold);

// Everything a stored trace determines about its run; the live summary
// embeds exactly these values, so recomputation from disk matches it.
struct TraceStats {
  std::uint64_t records = 0;
  std::uint64_t slow_evals = 0;
  std::uint64_t fast_evals = 0;
  double acc_slow = 0.0;
  double acc_fast = 0.0;
  int mode_switches = 0;
  double ess_log_sigma = 1.0;
};

TraceStats trace_stats(const Trace& trace, double mode_threshold);

}  // namespace ensmc
