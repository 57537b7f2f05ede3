#include "ensmc/samplers.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "ensmc/errors.hpp"

namespace ensmc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}
}  // namespace

void KernelConfig::validate(int slow_dim, int fast_dim) const {
  require(extra_fast_count >= 0, "extra_fast_count must be >= 0");
  require(grid_drag_count >= 0, "grid_drag_count must be >= 0");
  require(regen_every >= 1, "regen_every must be >= 1");
  for (double s : slow_sds) require(s > 0.0, "slow proposal sds must be > 0");
  for (double s : fast_sds) require(s > 0.0, "fast proposal sds must be > 0");
  require(joint_sd > 0.0, "joint proposal sd must be > 0");
  switch (kind) {
    case KernelKind::kJointRwm:
      break;
    case KernelKind::kSingleVarRwm:
    case KernelKind::kExtraFastRwm:
      require(static_cast<int>(slow_sds.size()) == slow_dim, "need one sd per slow coordinate");
      require(static_cast<int>(fast_sds.size()) == fast_dim, "need one sd per fast coordinate");
      break;
    case KernelKind::kRandomGrid:
      require(static_cast<int>(fast_sds.size()) == fast_dim, "need one sd per fast coordinate");
      require(static_cast<int>(grid_slow_step_sds.size()) == slow_dim,
              "need one displacement sd per slow coordinate");
      for (double s : grid_slow_step_sds) require(s > 0.0, "displacement sds must be > 0");
      break;
    case KernelKind::kEnsembleChol:
    case KernelKind::kEnsembleEig:
      require(static_cast<int>(slow_sds.size()) == slow_dim, "need one sd per slow coordinate");
      require(ensemble_size >= 2, "ensemble size must be >= 2");
      if (shifted_fast)
        require(static_cast<int>(shift_sds.size()) == fast_dim,
                "need one shift sd per fast coordinate");
      break;
  }
}

int AcceptTally::add_group(std::string name, bool slow_group) {
  groups.push_back(GroupTally{std::move(name), slow_group, 0, 0});
  return static_cast<int>(groups.size()) - 1;
}

void AcceptTally::bump(int group, bool accepted) {
  GroupTally& g = groups[group];
  g.proposals += 1;
  if (accepted) g.accepts += 1;
  if (g.slow_group) {
    slow_proposals += 1;
    if (accepted) slow_accepts += 1;
  } else {
    fast_proposals += 1;
    if (accepted) fast_accepts += 1;
  }
}

bool joint_rwm_step(const FastSlowTarget& target, FastSlowPoint& p, double& logdens, double s,
                    EvalCounters& counters, RngStream& rng) {
  FastSlowPoint prop = p;
  for (double& v : prop.slow) v += rng.normal(0.0, s);
  for (double& v : prop.fast) v += rng.normal(0.0, s);
  const double logdens_new = full_log_density(target, prop, counters);
  const double a = accept_probability(logdens_new - logdens);
  if (rng.uniform() < a) {
    p = std::move(prop);
    logdens = logdens_new;
    return true;
  }
  return false;
}

std::vector<bool> single_var_sweep(const FastSlowTarget& target, FastSlowPoint& p,
                                   SlowContext& ctx, double& logdens,
                                   std::span<const double> slow_sds,
                                   std::span<const double> fast_sds, EvalCounters& counters,
                                   RngStream& rng) {
  std::vector<bool> accepted;
  accepted.reserve(p.slow.size() + p.fast.size());
  for (std::size_t i = 0; i < p.slow.size(); ++i) {
    std::vector<double> slow_new = p.slow;
    slow_new[i] += rng.normal(0.0, slow_sds[i]);
    SlowContext ctx_new = slow_phase(target, slow_new, counters);
    const double logdens_new = fast_phase(target, ctx_new, p.fast, counters);
    const double a = accept_probability(logdens_new - logdens);
    if (rng.uniform() < a) {
      p.slow = std::move(slow_new);
      ctx = std::move(ctx_new);
      logdens = logdens_new;
      accepted.push_back(true);
    } else {
      accepted.push_back(false);
    }
  }
  for (std::size_t i = 0; i < p.fast.size(); ++i) {
    std::vector<double> fast_new = p.fast;
    fast_new[i] += rng.normal(0.0, fast_sds[i]);
    const double logdens_new = fast_phase(target, ctx, fast_new, counters);
    const double a = accept_probability(logdens_new - logdens);
    if (rng.uniform() < a) {
      p.fast = std::move(fast_new);
      logdens = logdens_new;
      accepted.push_back(true);
    } else {
      accepted.push_back(false);
    }
  }
  return accepted;
}

int extra_fast_updates(const FastSlowTarget& target, const SlowContext& ctx, FastSlowPoint& p,
                       double& logdens, std::span<const double> fast_sds, int count,
                       EvalCounters& counters, RngStream& rng) {
  const int d_fast = static_cast<int>(p.fast.size());
  int accepted = 0;
  for (int u = 0; u < count; ++u) {
    const int c = u % d_fast;
    std::vector<double> fast_new = p.fast;
    fast_new[c] += rng.normal(0.0, fast_sds[c]);
    const double logdens_new = fast_phase(target, ctx, fast_new, counters);
    const double a = accept_probability(logdens_new - logdens);
    if (rng.uniform() < a) {
      p.fast = std::move(fast_new);
      logdens = logdens_new;
      ++accepted;
    }
  }
  return accepted;
}

int random_grid_metropolis(const FastSlowTarget& target, FastSlowPoint& p, double& logdens,
                           std::span<const double> fast_sds, int drag_count,
                           std::span<const double> slow_step_sds, const SlowContext* ctx0,
                           EvalCounters& counters, RngStream& rng,
                           std::optional<SlowContext>* final_ctx) {
  const int d_slow = static_cast<int>(p.slow.size());
  std::vector<double> delta(d_slow);
  for (int i = 0; i < d_slow; ++i) delta[i] = rng.normal(0.0, slow_step_sds[i]);

  const std::vector<double> origin = p.slow;
  // slow contexts keyed by the integer multiple of delta; valid only within
  // this invocation since delta is redrawn each call
  std::map<int, SlowContext> cache;
  if (ctx0) cache.emplace(0, *ctx0);
  int pos = 0;
  int accepted = 0;

  auto context_at = [&](int offset) -> const SlowContext& {
    auto it = cache.find(offset);
    if (it == cache.end()) {
      std::vector<double> slow(d_slow);
      for (int i = 0; i < d_slow; ++i) slow[i] = origin[i] + offset * delta[i];
      it = cache.emplace(offset, slow_phase(target, slow, counters)).first;
    }
    return it->second;
  };

  for (int u = 0; u < drag_count; ++u) {
    const int sign = rng.uniform() < 0.5 ? -1 : 1;
    const int pos_new = pos + sign;
    std::vector<double> fast_new = p.fast;
    for (std::size_t c = 0; c < fast_new.size(); ++c)
      fast_new[c] += rng.normal(0.0, fast_sds[c]);
    const SlowContext& ctx_new = context_at(pos_new);
    const double logdens_new = fast_phase(target, ctx_new, fast_new, counters);
    const double a = accept_probability(logdens_new - logdens);
    if (rng.uniform() < a) {
      pos = pos_new;
      p.fast = std::move(fast_new);
      logdens = logdens_new;
      ++accepted;
    }
  }
  for (int i = 0; i < d_slow; ++i) p.slow[i] = origin[i] + pos * delta[i];
  if (final_ctx) final_ctx->emplace(context_at(pos));
  return accepted;
}

// ---- kernels ----------------------------------------------------------------

namespace {

class JointRwmKernel final : public Kernel {
 public:
  JointRwmKernel(const FastSlowTarget& target, const KernelConfig& cfg)
      : target_(target), s_(cfg.joint_sd) {
    group_ = tally_.add_group("joint", /*slow_group=*/true);
  }
  void init(const FastSlowPoint& p, EvalCounters& counters, RngStream&) override {
    p_ = p;
    logdens_ = full_log_density(target_, p_, counters);
    if (logdens_ == kNegInf) throw InitDegenerate("joint RWM: initial state has zero density");
  }
  void iterate(EvalCounters& counters, RngStream& rng) override {
    tally_.bump(group_, joint_rwm_step(target_, p_, logdens_, s_, counters, rng));
  }
  const FastSlowPoint& state() const override { return p_; }
  double state_log_density() const override { return logdens_; }

 private:
  const FastSlowTarget& target_;
  double s_;
  int group_;
  FastSlowPoint p_;
  double logdens_ = kNegInf;
};

class SingleVarKernel final : public Kernel {
 public:
  SingleVarKernel(const FastSlowTarget& target, const KernelConfig& cfg, bool with_extra)
      : target_(target), cfg_(cfg), with_extra_(with_extra) {
    for (int i = 0; i < target.slow_dim(); ++i)
      tally_.add_group("slow" + std::to_string(i + 1), true);
    for (int i = 0; i < target.fast_dim(); ++i)
      tally_.add_group("fast" + std::to_string(i + 1), false);
    if (with_extra_) extra_group_ = tally_.add_group("extra-fast", false);
  }
  void init(const FastSlowPoint& p, EvalCounters& counters, RngStream&) override {
    p_ = p;
    ctx_.emplace(slow_phase(target_, p_.slow, counters));
    logdens_ = fast_phase(target_, *ctx_, p_.fast, counters);
    if (logdens_ == kNegInf)
      throw InitDegenerate("single-variable RWM: initial state has zero density");
  }
  void iterate(EvalCounters& counters, RngStream& rng) override {
    const std::vector<bool> acc = single_var_sweep(target_, p_, *ctx_, logdens_, cfg_.slow_sds,
                                                   cfg_.fast_sds, counters, rng);
    for (std::size_t i = 0; i < acc.size(); ++i) tally_.bump(static_cast<int>(i), acc[i]);
    if (with_extra_ && cfg_.extra_fast_count > 0) {
      const int got = extra_fast_updates(target_, *ctx_, p_, logdens_, cfg_.fast_sds,
                                         cfg_.extra_fast_count, counters, rng);
      GroupTally& g = tally_.groups[extra_group_];
      g.proposals += cfg_.extra_fast_count;
      g.accepts += got;
      tally_.fast_proposals += cfg_.extra_fast_count;
      tally_.fast_accepts += got;
    }
  }
  const FastSlowPoint& state() const override { return p_; }
  double state_log_density() const override { return logdens_; }

 private:
  const FastSlowTarget& target_;
  KernelConfig cfg_;
  bool with_extra_;
  int extra_group_ = -1;
  FastSlowPoint p_;
  std::optional<SlowContext> ctx_;
  double logdens_ = kNegInf;
};

class RandomGridKernel final : public Kernel {
 public:
  RandomGridKernel(const FastSlowTarget& target, const KernelConfig& cfg)
      : target_(target), cfg_(cfg) {
    group_ = tally_.add_group("grid", /*slow_group=*/true);
  }
  void init(const FastSlowPoint& p, EvalCounters& counters, RngStream&) override {
    p_ = p;
    ctx_.emplace(slow_phase(target_, p_.slow, counters));
    logdens_ = fast_phase(target_, *ctx_, p_.fast, counters);
    if (logdens_ == kNegInf)
      throw InitDegenerate("random-grid: initial state has zero density");
  }
  void iterate(EvalCounters& counters, RngStream& rng) override {
    std::optional<SlowContext> final_ctx;
    const int got = random_grid_metropolis(target_, p_, logdens_, cfg_.fast_sds,
                                           cfg_.grid_drag_count, cfg_.grid_slow_step_sds,
                                           &*ctx_, counters, rng, &final_ctx);
    GroupTally& g = tally_.groups[group_];
    g.proposals += cfg_.grid_drag_count;
    g.accepts += got;
    tally_.slow_proposals += cfg_.grid_drag_count;
    tally_.slow_accepts += got;
    ctx_ = std::move(final_ctx);
  }
  const FastSlowPoint& state() const override { return p_; }
  double state_log_density() const override { return logdens_; }

 private:
  const FastSlowTarget& target_;
  KernelConfig cfg_;
  int group_;
  FastSlowPoint p_;
  std::optional<SlowContext> ctx_;
  double logdens_ = kNegInf;
};

class EnsembleKernel final : public Kernel {
 public:
  EnsembleKernel(const FastSlowTarget& target, const KernelConfig& cfg,
                 std::shared_ptr<const EnsembleMeasure> measure)
      : target_(target), cfg_(cfg), measure_(std::move(measure)) {
    if (!measure_) throw ConfigError("ensemble kernel requires a measure");
    if (measure_->fast_dim() != target.fast_dim())
      throw ConfigError("measure fast dimension does not match target");
    if (cfg_.shifted_fast && !measure_->supports_shift())
      throw UnsupportedMeasure("shifted-fast proposals are not supported for this measure");
    for (int i = 0; i < target.slow_dim(); ++i)
      tally_.add_group("slow" + std::to_string(i + 1), true);
  }
  void init(const FastSlowPoint& p, EvalCounters& counters, RngStream&) override {
    p_ = p;
    const SlowContext ctx = slow_phase(target_, p_.slow, counters);
    logdens_ = fast_phase(target_, ctx, p_.fast, counters);
    if (logdens_ == kNegInf)
      throw InitDegenerate("ensemble kernel: initial state has zero density");
  }
  void iterate(EvalCounters& counters, RngStream& rng) override {
    if (!ensemble_) ensemble_.emplace(map_up(measure_, target_, p_, counters, rng));
    SlowProposal prop{cfg_.slow_sds, 0};
    for (int i = 0; i < static_cast<int>(ensemble_->slow.size()); ++i) {
      prop.coordinate = i;
      UpdateResult r = cfg_.shifted_fast
                           ? update_slow_shifted_fast(*ensemble_, target_, prop, cfg_.shift_sds,
                                                      counters, rng)
                           : update_slow_fixed_fast(*ensemble_, target_, prop, counters, rng);
      tally_.bump(i, r.accepted);
      *ensemble_ = std::move(r.ensemble);
    }
    if (++sweeps_since_regen_ >= cfg_.regen_every) {
      auto [p, choice] = map_down(*ensemble_, rng);
      p_ = std::move(p);
      logdens_ = ensemble_->member_logdens[choice.index];
      ensemble_.reset();
      sweeps_since_regen_ = 0;
    }
  }
  const FastSlowPoint& state() const override { return p_; }
  double state_log_density() const override { return logdens_; }

 private:
  const FastSlowTarget& target_;
  KernelConfig cfg_;
  std::shared_ptr<const EnsembleMeasure> measure_;
  FastSlowPoint p_;
  double logdens_ = kNegInf;
  std::optional<Ensemble> ensemble_;
  int sweeps_since_regen_ = 0;
};

}  // namespace

std::unique_ptr<Kernel> make_kernel(const FastSlowTarget& target, const KernelConfig& config,
                                    std::shared_ptr<const EnsembleMeasure> measure) {
  config.validate(target.slow_dim(), target.fast_dim());
  switch (config.kind) {
    case KernelKind::kJointRwm:
      return std::make_unique<JointRwmKernel>(target, config);
    case KernelKind::kSingleVarRwm:
      return std::make_unique<SingleVarKernel>(target, config, false);
    case KernelKind::kExtraFastRwm:
      return std::make_unique<SingleVarKernel>(target, config, true);
    case KernelKind::kRandomGrid:
      return std::make_unique<RandomGridKernel>(target, config);
    case KernelKind::kEnsembleChol:
    case KernelKind::kEnsembleEig:
      return std::make_unique<EnsembleKernel>(target, config, std::move(measure));
  }
  throw ConfigError("unknown kernel kind");
}

RunResult run_chain(const FastSlowTarget& target, Kernel& kernel, const FastSlowPoint& init,
                    std::uint64_t budget_slow_evals, std::uint64_t thin_slow_evals,
                    RngStream& rng) {
  if (budget_slow_evals < 1) throw ConfigError("run_chain: budget must be >= 1");
  if (thin_slow_evals < 1) throw ConfigError("run_chain: thin must be >= 1");

  RunResult out;
  kernel.init(init, out.counters, rng);

  auto record = [&]() {
    const AcceptTally& t = kernel.tally();
    const std::array<double, 3> s = target.trace_summary(kernel.state());
    out.trace.push_back(TraceRecord{out.iterations, out.counters.slow_evals,
                                    out.counters.fast_evals, kernel.state_log_density(), s[0],
                                    s[1], s[2], t.slow_accept_fraction(),
                                    t.fast_accept_fraction()});
  };

  std::uint64_t next_record = thin_slow_evals;
  while (out.counters.slow_evals < budget_slow_evals) {
    const std::uint64_t before = out.counters.slow_evals;
    kernel.iterate(out.counters, rng);
    out.iterations += 1;
    if (out.counters.slow_evals == before)
      throw ConfigError("run_chain: budget unreachable, kernel performs no slow evaluations");
    if (out.counters.slow_evals >= next_record) {
      record();
      next_record = (out.counters.slow_evals / thin_slow_evals + 1) * thin_slow_evals;
    }
  }
  if (out.trace.empty()) record();
  out.tally = kernel.tally();
  return out;
}

}  // namespace ensmc
