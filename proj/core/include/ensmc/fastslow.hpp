#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace ensmc {

// A state split into slow coordinates (whose change forces the expensive
// recomputation) and fast coordinates (cheap to re-evaluate against a cache).
struct FastSlowPoint {
  std::vector<double> slow;
  std::vector<double> fast;
};

// Target-defined cache produced by the slow phase.
struct SlowPayload {
  virtual ~SlowPayload() = default;
};

// Immutable snapshot of a slow-phase computation.  The payload is a pure
// function of the slow coordinates (and the target's data), so contexts can
// be held, shared, and compared freely.
class SlowContext {
 public:
  SlowContext(std::vector<double> slow, std::shared_ptr<const SlowPayload> payload);

  std::span<const double> slow() const { return slow_; }
  const SlowPayload& payload() const { return *payload_; }
  template <class T>
  const T& payload_as() const {
    return dynamic_cast<const T&>(*payload_);
  }
  std::uint64_t id() const { return id_; }  // monotone creation token

 private:
  std::vector<double> slow_;
  std::shared_ptr<const SlowPayload> payload_;
  std::uint64_t id_;
};

// Evaluation accounting; owned by exactly one chain.  The work fields
// accumulate the target's per-call abstract operation counts, used for
// cost-model assertions that must not depend on wall clocks.
struct EvalCounters {
  std::uint64_t slow_evals = 0;
  std::uint64_t fast_evals = 0;
  double slow_work = 0.0;
  double fast_work = 0.0;
};

// A log-density target with a fast/slow split.  Implementations must be
// immutable after construction (safe to share across chains).  Densities are
// handled in log space end-to-end; -inf is the first-class "zero density".
class FastSlowTarget {
 public:
  virtual ~FastSlowTarget() = default;

  virtual int slow_dim() const = 0;
  virtual int fast_dim() const = 0;

  // The expensive phase.  May throw TargetDegenerate for irrecoverably
  // invalid slow values; merely zero-density regions are instead reported
  // as -inf by compute_fast for every fast vector.
  virtual std::shared_ptr<const SlowPayload> compute_slow(std::span<const double> slow) const = 0;

  // The cheap phase: unnormalized log density of (ctx.slow, fast).  The
  // additive constant is fixed per target.
  virtual double compute_fast(const SlowContext& ctx, std::span<const double> fast) const = 0;

  // Abstract operation counts per call, for budget-independent cost checks.
  virtual double slow_work_units() const { return 1.0; }
  virtual double fast_work_units() const { return 1.0; }

  // (mean_log_nu, log_eta, log_sigma)-style summary used by trace records;
  // targets without that structure report leading coordinates.
  virtual std::array<double, 3> trace_summary(const FastSlowPoint& p) const;
};

// Counted entry points.  slow_phase increments slow_evals exactly once;
// fast_phase increments fast_evals exactly once and returns -inf for
// non-finite fast vectors.
SlowContext slow_phase(const FastSlowTarget& target, std::span<const double> slow,
                       EvalCounters& counters);
double fast_phase(const FastSlowTarget& target, const SlowContext& ctx,
                  std::span<const double> fast, EvalCounters& counters);

// Uncached composition slow_phase + fast_phase (oracle path).
double full_log_density(const FastSlowTarget& target, const FastSlowPoint& p,
                        EvalCounters& counters);

}  // namespace ensmc
