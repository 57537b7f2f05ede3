#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ensmc/ensemble.hpp"
#include "ensmc/fastslow.hpp"
#include "ensmc/rng.hpp"
#include "ensmc/trace.hpp"

namespace ensmc {

enum class KernelKind {
  kJointRwm,
  kSingleVarRwm,
  kExtraFastRwm,
  kRandomGrid,
  kEnsembleChol,
  kEnsembleEig,
};

enum class MeasureKind { kIndependent, kExchangeable, kGrid, kChain };

struct KernelConfig {
  KernelKind kind = KernelKind::kSingleVarRwm;

  std::vector<double> slow_sds;  // per slow coordinate
  std::vector<double> fast_sds;  // per fast coordinate

  double joint_sd = 0.25;   // common sd of the all-at-once proposal
  int extra_fast_count = 49;

  int grid_drag_count = 10;
  std::vector<double> grid_slow_step_sds;  // random-grid displacement sds

  int ensemble_size = 49;  // K
  MeasureKind measure = MeasureKind::kGrid;
  int regen_every = 1;      // sweeps per ensemble before collapse + regrow
  bool shifted_fast = false;
  std::vector<double> shift_sds;  // common-offset sds for shifted proposals

  void validate(int slow_dim, int fast_dim) const;  // throws ConfigError
};

struct GroupTally {
  std::string name;
  bool slow_group = false;
  std::uint64_t proposals = 0;
  std::uint64_t accepts = 0;
  double rejection_rate() const {
    return proposals == 0 ? 0.0 : 1.0 - static_cast<double>(accepts) / proposals;
  }
};

struct AcceptTally {
  std::vector<GroupTally> groups;
  std::uint64_t slow_proposals = 0, slow_accepts = 0;
  std::uint64_t fast_proposals = 0, fast_accepts = 0;

  int add_group(std::string name, bool slow_group);
  void bump(int group, bool accepted);
  double slow_accept_fraction() const {
    return slow_proposals == 0 ? 0.0 : static_cast<double>(slow_accepts) / slow_proposals;
  }
  double fast_accept_fraction() const {
    return fast_proposals == 0 ? 0.0 : static_cast<double>(fast_accepts) / fast_proposals;
  }
};

// ---- kernel step primitives ------------------------------------------------

// All-coordinates Gaussian proposal with common sd s; one slow eval per
// proposal.  Updates p/logdens in place, returns the accept flag.
bool joint_rwm_step(const FastSlowTarget& target, FastSlowPoint& p, double& logdens, double s,
                    EvalCounters& counters, RngStream& rng);

// One Metropolis update per coordinate, slow coordinates first then fast.
// Slow-coordinate proposals cost one slow eval each; fast-coordinate
// proposals reuse ctx.  Returns per-coordinate accept flags.
std::vector<bool> single_var_sweep(const FastSlowTarget& target, FastSlowPoint& p,
                                   SlowContext& ctx, double& logdens,
                                   std::span<const double> slow_sds,
                                   std::span<const double> fast_sds, EvalCounters& counters,
                                   RngStream& rng);

// count single-variable updates cycling over the fast coordinates only;
// zero slow evals.  Returns the number accepted.
int extra_fast_updates(const FastSlowTarget& target, const SlowContext& ctx, FastSlowPoint& p,
                       double& logdens, std::span<const double> fast_sds, int count,
                       EvalCounters& counters, RngStream& rng);

// Random-grid Metropolis: one displacement delta per invocation, drag_count
// proposals of (slow +/- delta, fast'), with slow contexts cached per
// integer multiple of delta so revisits cost no slow eval.  ctx0, when
// given, seeds the cache at offset zero; final_ctx, when given, receives the
// context of the returned point.  Returns the number accepted.
int random_grid_metropolis(const FastSlowTarget& target, FastSlowPoint& p, double& logdens,
                           std::span<const double> fast_sds, int drag_count,
                           std::span<const double> slow_step_sds, const SlowContext* ctx0,
                           EvalCounters& counters, RngStream& rng,
                           std::optional<SlowContext>* final_ctx = nullptr);

// ---- chain driver -----------------------------------------------------------

class Kernel {
 public:
  virtual ~Kernel() = default;
  // Evaluates the initial state; throws InitDegenerate on zero density.
  virtual void init(const FastSlowPoint& p, EvalCounters& counters, RngStream& rng) = 0;
  virtual void iterate(EvalCounters& counters, RngStream& rng) = 0;
  virtual const FastSlowPoint& state() const = 0;
  virtual double state_log_density() const = 0;
  const AcceptTally& tally() const { return tally_; }

 protected:
  AcceptTally tally_;
};

// measure is required for the ensemble kinds and ignored otherwise.
std::unique_ptr<Kernel> make_kernel(const FastSlowTarget& target, const KernelConfig& config,
                                    std::shared_ptr<const EnsembleMeasure> measure = nullptr);

struct RunResult {
  Trace trace;
  AcceptTally tally;
  EvalCounters counters;
  std::uint64_t iterations = 0;
};

// Runs the kernel until the total slow-eval count reaches the budget,
// recording a trace row whenever that count crosses a multiple of
// thin_slow_evals (and at the end if nothing was recorded).  Deterministic
// given (config, seed).
RunResult run_chain(const FastSlowTarget& target, Kernel& kernel, const FastSlowPoint& init,
                    std::uint64_t budget_slow_evals, std::uint64_t thin_slow_evals,
                    RngStream& rng);

}  // namespace ensmc
