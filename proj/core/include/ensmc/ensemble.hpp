#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ensmc/fastslow.hpp"
#include "ensmc/rng.hpp"

namespace ensmc {

// log(sum_i exp(x_i)); -inf entries contribute nothing, all -inf gives -inf.
double logsumexp(std::span<const double> x);

// min[1, exp(log_ratio)], with NaN mapped to 0.
double accept_probability(double log_ratio);

// Inverse-CDF categorical draw over exp(logweights), using the single
// uniform u in [0,1).  Entries may be -inf; at least one must be finite.
int select_index(std::span<const double> logweights, double u);

// A distribution over the fast space with evaluable log density and sampler
// (the parameter of the independent ensemble base measure).
class FastDistribution {
 public:
  virtual ~FastDistribution() = default;
  virtual int dim() const = 0;
  virtual double log_density(std::span<const double> x) const = 0;
  virtual std::vector<double> sample(RngStream& rng) const = 0;
};

class DiagGaussian final : public FastDistribution {
 public:
  DiagGaussian(std::vector<double> means, std::vector<double> sds);
  int dim() const override { return static_cast<int>(means_.size()); }
  double log_density(std::span<const double> x) const override;
  std::vector<double> sample(RngStream& rng) const override;

 private:
  std::vector<double> means_, sds_;
};

// Ensemble base measure over K-tuples of fast vectors (the xi density of the
// fast-slow factorization).  grow() returns K members with member k equal to
// the anchor bit-for-bit; marginal_corrections() returns the log xi_k terms
// entering selection weights and the ensemble density.  Variants whose
// marginal ratios cancel (grid constellations, and the improper limits of
// the exchangeable and random-walk chain measures) report identically zero
// corrections.
class EnsembleMeasure {
 public:
  virtual ~EnsembleMeasure() = default;
  virtual int ensemble_size() const = 0;  // K >= 2
  virtual int fast_dim() const = 0;
  virtual bool supports_shift() const = 0;
  virtual std::vector<std::vector<double>> grow(std::span<const double> anchor, int k,
                                                RngStream& rng) const = 0;
  virtual std::vector<double> marginal_corrections(
      const std::vector<std::vector<double>>& members) const = 0;
};

// Members i.i.d. from a given fast-space distribution.
class IndependentMeasure final : public EnsembleMeasure {
 public:
  IndependentMeasure(int ensemble_size, std::shared_ptr<const FastDistribution> dist);
  int ensemble_size() const override { return k_; }
  int fast_dim() const override { return dist_->dim(); }
  bool supports_shift() const override { return false; }
  std::vector<std::vector<double>> grow(std::span<const double> anchor, int k,
                                        RngStream& rng) const override;
  std::vector<double> marginal_corrections(
      const std::vector<std::vector<double>>& members) const override;

 private:
  int k_;
  std::shared_ptr<const FastDistribution> dist_;
};

// Members i.i.d. N(theta, spread^2) per coordinate around a latent center
// theta with an improper flat level, taken in the limit where all marginals
// coincide.  Growing from an anchor draws theta ~ N(anchor, spread^2) and
// the other members ~ N(theta, spread^2).
class ExchangeableMeasure final : public EnsembleMeasure {
 public:
  ExchangeableMeasure(int ensemble_size, std::vector<double> spreads);
  int ensemble_size() const override { return k_; }
  int fast_dim() const override { return static_cast<int>(spreads_.size()); }
  bool supports_shift() const override { return true; }
  std::vector<std::vector<double>> grow(std::span<const double> anchor, int k,
                                        RngStream& rng) const override;
  std::vector<double> marginal_corrections(
      const std::vector<std::vector<double>>& members) const override;
  std::span<const double> spreads() const { return spreads_; }

 private:
  int k_;
  std::vector<double> spreads_;
};

// Rectangular grid constellation: counts[j] points spaced spacing[j] apart
// in dimension j (K = prod counts).  Each grow() rescales the spacings by an
// independent per-dimension factor uniform on [scale_lo, scale_hi], so the
// realized extent in dimension j is (counts[j]-1) * spacing[j] * scale.
class GridMeasure final : public EnsembleMeasure {
 public:
  GridMeasure(std::vector<int> counts, std::vector<double> spacings, double scale_lo = 1.0,
              double scale_hi = 1.0);
  int ensemble_size() const override { return k_; }
  int fast_dim() const override { return static_cast<int>(counts_.size()); }
  bool supports_shift() const override { return true; }
  std::vector<std::vector<double>> grow(std::span<const double> anchor, int k,
                                        RngStream& rng) const override;
  std::vector<double> marginal_corrections(
      const std::vector<std::vector<double>>& members) const override;

  // Deterministic constellation through the anchor at node k with explicit
  // spacings (grow() = draw_spacings then constellation).
  std::vector<std::vector<double>> constellation(std::span<const double> anchor, int k,
                                                 std::span<const double> spacings) const;
  std::vector<double> draw_spacings(RngStream& rng) const;
  std::span<const int> counts() const { return counts_; }
  std::span<const double> base_spacings() const { return spacings_; }

 private:
  std::vector<int> node_coords(int k) const;
  int k_;
  std::vector<int> counts_;
  std::vector<double> spacings_;
  double scale_lo_, scale_hi_;
};

// Stationary random-walk chain in the improper (infinite level) limit:
// increments N(0, step^2), simulated in both directions from the anchor's
// position.  Scalar fast space only.
class ChainMeasure final : public EnsembleMeasure {
 public:
  ChainMeasure(int ensemble_size, double step_sd);
  int ensemble_size() const override { return k_; }
  int fast_dim() const override { return 1; }
  bool supports_shift() const override { return true; }
  std::vector<std::vector<double>> grow(std::span<const double> anchor, int k,
                                        RngStream& rng) const override;
  std::vector<double> marginal_corrections(
      const std::vector<std::vector<double>>& members) const override;
  double step_sd() const { return step_sd_; }

 private:
  int k_;
  double step_sd_;
};

// An ensemble sharing one slow vector across K fast members, with each
// member's log density evaluated against the shared SlowContext.
struct Ensemble {
  std::vector<double> slow;
  std::vector<std::vector<double>> fast_members;
  std::vector<double> member_logdens;
  std::vector<double> member_logmarg;
  SlowContext ctx;
  std::shared_ptr<const EnsembleMeasure> measure;  // may be null for hand-built ensembles

  int size() const { return static_cast<int>(fast_members.size()); }
};

struct MapDownChoice {
  int index;
  std::vector<double> logweights;
};

// Evaluates all members against one fresh slow phase (exactly one slow eval,
// K fast evals).  Used by map_up and directly by enumeration oracles.
Ensemble assemble_ensemble(const FastSlowTarget& target, std::span<const double> slow,
                           std::vector<std::vector<double>> members,
                           std::vector<double> logmarg, EvalCounters& counters,
                           std::shared_ptr<const EnsembleMeasure> measure = nullptr);

// The up map: anchor index k uniform, remaining members grown from the
// measure's conditional given member k.
Ensemble map_up(std::shared_ptr<const EnsembleMeasure> measure, const FastSlowTarget& target,
                const FastSlowPoint& p, EvalCounters& counters, RngStream& rng);

// Variable part of log rho relative to the base measure:
// logsumexp_k(member_logdens[k] - member_logmarg[k]) - log K.
double ensemble_log_density(const Ensemble& e);

// log selection weights for the down map (logdens - logmarg).
std::vector<double> selection_logweights(const Ensemble& e);

// The down map: selects a member with probability proportional to
// exp(logdens - logmarg); zero target evaluations.  Throws AllZeroDensity.
std::pair<FastSlowPoint, MapDownChoice> map_down(const Ensemble& e, RngStream& rng);

// Gaussian random-walk proposal on the slow coordinates; coordinate < 0
// proposes all coordinates, otherwise only the selected one.
struct SlowProposal {
  std::vector<double> sds;
  int coordinate = -1;
};

struct UpdateResult {
  Ensemble ensemble;
  bool accepted;
};

// Metropolis update proposing new slow values with all fast members kept
// fixed; one slow eval and K fast evals per proposal, accepted or not.
UpdateResult update_slow_fixed_fast(const Ensemble& e, const FastSlowTarget& target,
                                    const SlowProposal& proposal, EvalCounters& counters,
                                    RngStream& rng);

// As above but additionally shifting every fast member by one common
// Gaussian offset.  Throws UnsupportedMeasure for independent measures.
UpdateResult update_slow_shifted_fast(const Ensemble& e, const FastSlowTarget& target,
                                      const SlowProposal& proposal,
                                      std::span<const double> shift_sds, EvalCounters& counters,
                                      RngStream& rng);

// One update_slow_fixed_fast per slow coordinate, in order.
Ensemble ensemble_sweep(Ensemble e, const FastSlowTarget& target, std::span<const double> sds,
                        EvalCounters& counters, RngStream& rng, int* accept_count = nullptr);

}  // namespace ensmc
