#include "ensmc/fastslow.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "ensmc/errors.hpp"

namespace ensmc {

namespace {
std::atomic<std::uint64_t> g_context_counter{0};
}

SlowContext::SlowContext(std::vector<double> slow, std::shared_ptr<const SlowPayload> payload)
    : slow_(std::move(slow)),
      payload_(std::move(payload)),
      id_(g_context_counter.fetch_add(1, std::memory_order_relaxed)) {}

std::array<double, 3> FastSlowTarget::trace_summary(const FastSlowPoint& p) const {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  if (!p.slow.empty()) out[0] = p.slow[0];
  if (!p.fast.empty()) out[1] = p.fast[0];
  if (p.fast.size() > 1) out[2] = p.fast[1];
  return out;
}

SlowContext slow_phase(const FastSlowTarget& target, std::span<const double> slow,
                       EvalCounters& counters) {
  if (static_cast<int>(slow.size()) != target.slow_dim())
    throw DimensionMismatch("slow_phase: slow vector has wrong dimension");
  for (double v : slow)
    if (!std::isfinite(v)) throw TargetDegenerate("slow_phase: non-finite slow coordinate");
  counters.slow_evals += 1;
  counters.slow_work += target.slow_work_units();
  return SlowContext(std::vector<double>(slow.begin(), slow.end()), target.compute_slow(slow));
}

double fast_phase(const FastSlowTarget& target, const SlowContext& ctx,
                  std::span<const double> fast, EvalCounters& counters) {
  if (static_cast<int>(fast.size()) != target.fast_dim())
    throw DimensionMismatch("fast_phase: fast vector has wrong dimension");
  counters.fast_evals += 1;
  counters.fast_work += target.fast_work_units();
  for (double v : fast)
    if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
  return target.compute_fast(ctx, fast);
}

double full_log_density(const FastSlowTarget& target, const FastSlowPoint& p,
                        EvalCounters& counters) {
  const SlowContext ctx = slow_phase(target, p.slow, counters);
  return fast_phase(target, ctx, p.fast, counters);
}

}  // namespace ensmc
