#include "ensmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ensmc {

double ess(std::span<const double> series) {
  const int n = static_cast<int>(series.size());
  if (n < 10) throw std::invalid_argument("ess: need at least 10 points");

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= n;
  if (var == 0.0) return 1.0;

  auto rho = [&](int t) {
    double g = 0.0;
    for (int i = 0; i + t < n; ++i) g += (series[i] - mean) * (series[i + t] - mean);
    return g / (n * var);
  };

  double sum = rho(1);
  for (int m = 1; 2 * m + 1 <= n - 1; ++m) {
    const double pair = rho(2 * m) + rho(2 * m + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  const double tau = 1.0 + 2.0 * sum;
  double e = tau > 0.0 ? n / tau : static_cast<double>(n);
  return std::clamp(e, 1.0, static_cast<double>(n));
}

int mode_switch_count(std::span<const double> log_sigma, double threshold) {
  int switches = 0;
  for (std::size_t i = 1; i < log_sigma.size(); ++i) {
    const bool above_prev = log_sigma[i - 1] > threshold;
    const bool above = log_sigma[i] > threshold;
    if (above != above_prev) ++switches;
  }
  return switches;
}

int mode_switch_count(const Trace& trace, double threshold) {
  std::vector<double> s;
  s.reserve(trace.size());
  for (const TraceRecord& r : trace) s.push_back(r.log_sigma);
  return mode_switch_count(s, threshold);
}

TraceStats trace_stats(const Trace& trace, double mode_threshold) {
  TraceStats st;
  st.records = trace.size();
  if (trace.empty()) return st;
  const TraceRecord& last = trace.back();
  st.slow_evals = last.slow_evals;
  st.fast_evals = last.fast_evals;
  st.acc_slow = last.acc_slow;
  st.acc_fast = last.acc_fast;
  st.mode_switches = mode_switch_count(trace, mode_threshold);
  if (trace.size() >= 10) {
    std::vector<double> s;
    s.reserve(trace.size());
    for (const TraceRecord& r : trace) s.push_back(r.log_sigma);
    st.ess_log_sigma = ess(s);
  }
  return st;
}

}  // namespace ensmc
