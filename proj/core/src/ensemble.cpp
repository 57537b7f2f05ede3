#include "ensmc/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ensmc/errors.hpp"

namespace ensmc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double logsumexp(std::span<const double> x) {
  double m = kNegInf;
  for (double v : x) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : x)
    if (v != kNegInf) s += std::exp(v - m);
  return m + std::log(s);
}

double accept_probability(double log_ratio) {
  if (std::isnan(log_ratio)) return 0.0;
  if (log_ratio >= 0.0) return 1.0;
  return std::exp(log_ratio);
}

int select_index(std::span<const double> logweights, double u) {
  const double lse = logsumexp(logweights);
  if (lse == kNegInf) throw AllZeroDensity("select_index: all weights zero");
  double cum = 0.0;
  int last_finite = -1;
  for (int i = 0; i < static_cast<int>(logweights.size()); ++i) {
    if (logweights[i] == kNegInf) continue;
    last_finite = i;
    cum += std::exp(logweights[i] - lse);
    if (u < cum) return i;
  }
  return last_finite;  // u landed in the rounding slack past the last weight
}

DiagGaussian::DiagGaussian(std::vector<double> means, std::vector<double> sds)
    : means_(std::move(means)), sds_(std::move(sds)) {
  if (means_.size() != sds_.size())
    throw DimensionMismatch("DiagGaussian: means/sds length mismatch");
  for (double s : sds_)
    if (!(s > 0.0)) throw std::invalid_argument("DiagGaussian: sds must be positive");
}

double DiagGaussian::log_density(std::span<const double> x) const {
  if (x.size() != means_.size())
    throw DimensionMismatch("DiagGaussian::log_density: wrong dimension");
  constexpr double klog2pi = 1.8378770664093454836;
  double lp = 0.0;
  for (std::size_t i = 0; i < means_.size(); ++i) {
    const double z = (x[i] - means_[i]) / sds_[i];
    lp -= 0.5 * (z * z + klog2pi) + std::log(sds_[i]);
  }
  return lp;
}

std::vector<double> DiagGaussian::sample(RngStream& rng) const {
  std::vector<double> x(means_.size());
  for (std::size_t i = 0; i < means_.size(); ++i) x[i] = rng.normal(means_[i], sds_[i]);
  return x;
}

IndependentMeasure::IndependentMeasure(int ensemble_size,
                                       std::shared_ptr<const FastDistribution> dist)
    : k_(ensemble_size), dist_(std::move(dist)) {
  if (k_ < 2) throw std::invalid_argument("IndependentMeasure: K must be >= 2");
}

std::vector<std::vector<double>> IndependentMeasure::grow(std::span<const double> anchor, int k,
                                                          RngStream& rng) const {
  std::vector<std::vector<double>> members(k_);
  for (int j = 0; j < k_; ++j) {
    if (j == k)
      members[j].assign(anchor.begin(), anchor.end());
    else
      members[j] = dist_->sample(rng);
  }
  return members;
}

std::vector<double> IndependentMeasure::marginal_corrections(
    const std::vector<std::vector<double>>& members) const {
  std::vector<double> out(members.size());
  for (std::size_t j = 0; j < members.size(); ++j) out[j] = dist_->log_density(members[j]);
  return out;
}

ExchangeableMeasure::ExchangeableMeasure(int ensemble_size, std::vector<double> spreads)
    : k_(ensemble_size), spreads_(std::move(spreads)) {
  if (k_ < 2) throw std::invalid_argument("ExchangeableMeasure: K must be >= 2");
  for (double s : spreads_)
    if (!(s > 0.0)) throw std::invalid_argument("ExchangeableMeasure: spreads must be positive");
}

std::vector<std::vector<double>> ExchangeableMeasure::grow(std::span<const double> anchor, int k,
                                                           RngStream& rng) const {
  const int d = fast_dim();
  // center posterior given one member under the flat level prior
  std::vector<double> theta(d);
  for (int c = 0; c < d; ++c) theta[c] = rng.normal(anchor[c], spreads_[c]);
  std::vector<std::vector<double>> members(k_);
  for (int j = 0; j < k_; ++j) {
    if (j == k) {
      members[j].assign(anchor.begin(), anchor.end());
    } else {
      members[j].resize(d);
      for (int c = 0; c < d; ++c) members[j][c] = rng.normal(theta[c], spreads_[c]);
    }
  }
  return members;
}

std::vector<double> ExchangeableMeasure::marginal_corrections(
    const std::vector<std::vector<double>>& members) const {
  return std::vector<double>(members.size(), 0.0);  // equal marginals in the improper limit
}

GridMeasure::GridMeasure(std::vector<int> counts, std::vector<double> spacings, double scale_lo,
                         double scale_hi)
    : counts_(std::move(counts)), spacings_(std::move(spacings)), scale_lo_(scale_lo),
      scale_hi_(scale_hi) {
  if (counts_.empty() || counts_.size() != spacings_.size())
    throw DimensionMismatch("GridMeasure: counts/spacings mismatch");
  k_ = 1;
  for (int m : counts_) {
    if (m < 1) throw std::invalid_argument("GridMeasure: counts must be >= 1");
    k_ *= m;
  }
  if (k_ < 2) throw std::invalid_argument("GridMeasure: K must be >= 2");
  for (double d : spacings_)
    if (!(d > 0.0)) throw std::invalid_argument("GridMeasure: spacings must be positive");
  if (!(scale_lo_ > 0.0) || scale_hi_ < scale_lo_)
    throw std::invalid_argument("GridMeasure: bad scale range");
}

std::vector<int> GridMeasure::node_coords(int k) const {
  // row-major decomposition, last dimension fastest
  std::vector<int> c(counts_.size());
  for (int d = static_cast<int>(counts_.size()) - 1; d >= 0; --d) {
    c[d] = k % counts_[d];
    k /= counts_[d];
  }
  return c;
}

std::vector<double> GridMeasure::draw_spacings(RngStream& rng) const {
  std::vector<double> d(spacings_.size());
  for (std::size_t j = 0; j < spacings_.size(); ++j)
    d[j] = spacings_[j] * rng.uniform(scale_lo_, scale_hi_);
  return d;
}

std::vector<std::vector<double>> GridMeasure::constellation(std::span<const double> anchor, int k,
                                                            std::span<const double> spacings) const {
  const int dim = fast_dim();
  const std::vector<int> anchor_coords = node_coords(k);
  std::vector<std::vector<double>> members(k_);
  for (int j = 0; j < k_; ++j) {
    if (j == k) {
      members[j].assign(anchor.begin(), anchor.end());
      continue;
    }
    const std::vector<int> cj = node_coords(j);
    members[j].resize(dim);
    for (int d = 0; d < dim; ++d)
      members[j][d] = anchor[d] + (cj[d] - anchor_coords[d]) * spacings[d];
  }
  return members;
}

std::vector<std::vector<double>> GridMeasure::grow(std::span<const double> anchor, int k,
                                                   RngStream& rng) const {
  const std::vector<double> d = draw_spacings(rng);
  return constellation(anchor, k, d);
}

std::vector<double> GridMeasure::marginal_corrections(
    const std::vector<std::vector<double>>& members) const {
  return std::vector<double>(members.size(), 0.0);  // constellation marginals cancel
}

ChainMeasure::ChainMeasure(int ensemble_size, double step_sd) : k_(ensemble_size), step_sd_(step_sd) {
  if (k_ < 2) throw std::invalid_argument("ChainMeasure: K must be >= 2");
  if (!(step_sd_ > 0.0)) throw std::invalid_argument("ChainMeasure: step sd must be positive");
}

std::vector<std::vector<double>> ChainMeasure::grow(std::span<const double> anchor, int k,
                                                    RngStream& rng) const {
  if (anchor.size() != 1) throw DimensionMismatch("ChainMeasure: scalar fast space only");
  std::vector<std::vector<double>> members(k_);
  members[k] = {anchor[0]};
  for (int j = k + 1; j < k_; ++j) members[j] = {members[j - 1][0] + rng.normal(0.0, step_sd_)};
  for (int j = k - 1; j >= 0; --j) members[j] = {members[j + 1][0] + rng.normal(0.0, step_sd_)};
  return members;
}

std::vector<double> ChainMeasure::marginal_corrections(
    const std::vector<std::vector<double>>& members) const {
  return std::vector<double>(members.size(), 0.0);  // equal marginals as the level widens
}

Ensemble assemble_ensemble(const FastSlowTarget& target, std::span<const double> slow,
                           std::vector<std::vector<double>> members, std::vector<double> logmarg,
                           EvalCounters& counters, std::shared_ptr<const EnsembleMeasure> measure) {
  if (members.size() != logmarg.size())
    throw DimensionMismatch("assemble_ensemble: members/logmarg size mismatch");
  SlowContext ctx = slow_phase(target, slow, counters);
  std::vector<double> logdens(members.size());
  for (std::size_t j = 0; j < members.size(); ++j)
    logdens[j] = fast_phase(target, ctx, members[j], counters);
  return Ensemble{std::vector<double>(slow.begin(), slow.end()), std::move(members),
                  std::move(logdens), std::move(logmarg), std::move(ctx), std::move(measure)};
}

Ensemble map_up(std::shared_ptr<const EnsembleMeasure> measure, const FastSlowTarget& target,
                const FastSlowPoint& p, EvalCounters& counters, RngStream& rng) {
  const int k = static_cast<int>(rng.uniform_below(measure->ensemble_size()));
  std::vector<std::vector<double>> members = measure->grow(p.fast, k, rng);
  std::vector<double> logmarg = measure->marginal_corrections(members);
  return assemble_ensemble(target, p.slow, std::move(members), std::move(logmarg), counters,
                           std::move(measure));
}

double ensemble_log_density(const Ensemble& e) {
  std::vector<double> terms(e.size());
  for (int j = 0; j < e.size(); ++j) terms[j] = e.member_logdens[j] - e.member_logmarg[j];
  return logsumexp(terms) - std::log(static_cast<double>(e.size()));
}

std::vector<double> selection_logweights(const Ensemble& e) {
  std::vector<double> w(e.size());
  for (int j = 0; j < e.size(); ++j) w[j] = e.member_logdens[j] - e.member_logmarg[j];
  return w;
}

std::pair<FastSlowPoint, MapDownChoice> map_down(const Ensemble& e, RngStream& rng) {
  std::vector<double> w = selection_logweights(e);
  if (logsumexp(w) == kNegInf)
    throw AllZeroDensity("map_down: every member has zero density");
  const int idx = select_index(w, rng.uniform());
  FastSlowPoint p{e.slow, e.fast_members[idx]};
  return {std::move(p), MapDownChoice{idx, std::move(w)}};
}

namespace {

// Shared accept step: evaluates the proposed ensemble against a fresh slow
// phase and keeps it with the Metropolis probability.  The proposed context
// is discarded on rejection.
UpdateResult metropolis_on_ensemble(const Ensemble& e, const FastSlowTarget& target,
                                    std::vector<double> proposed_slow,
                                    const std::vector<std::vector<double>>& proposed_members,
                                    EvalCounters& counters, RngStream& rng, bool members_moved) {
  SlowContext ctx = slow_phase(target, proposed_slow, counters);
  std::vector<double> logdens(e.size());
  for (int j = 0; j < e.size(); ++j)
    logdens[j] = fast_phase(target, ctx, proposed_members[j], counters);

  std::vector<double> terms(e.size());
  for (int j = 0; j < e.size(); ++j) terms[j] = logdens[j] - e.member_logmarg[j];
  const double log_rho_new = logsumexp(terms) - std::log(static_cast<double>(e.size()));
  const double log_rho_old = ensemble_log_density(e);

  const double a = accept_probability(log_rho_new - log_rho_old);
  const double u = rng.uniform();
  if (u < a) {
    Ensemble out{std::move(proposed_slow),
                 members_moved ? proposed_members : e.fast_members, std::move(logdens),
                 e.member_logmarg, std::move(ctx), e.measure};
    return {std::move(out), true};
  }
  return {e, false};
}

}  // namespace

UpdateResult update_slow_fixed_fast(const Ensemble& e, const FastSlowTarget& target,
                                    const SlowProposal& proposal, EvalCounters& counters,
                                    RngStream& rng) {
  std::vector<double> slow_new = e.slow;
  if (proposal.coordinate >= 0) {
    slow_new[proposal.coordinate] += rng.normal(0.0, proposal.sds[proposal.coordinate]);
  } else {
    for (std::size_t i = 0; i < slow_new.size(); ++i)
      slow_new[i] += rng.normal(0.0, proposal.sds[i]);
  }
  return metropolis_on_ensemble(e, target, std::move(slow_new), e.fast_members, counters, rng,
                                /*members_moved=*/false);
}

UpdateResult update_slow_shifted_fast(const Ensemble& e, const FastSlowTarget& target,
                                      const SlowProposal& proposal,
                                      std::span<const double> shift_sds, EvalCounters& counters,
                                      RngStream& rng) {
  if (e.measure && !e.measure->supports_shift())
    throw UnsupportedMeasure(
        "update_slow_shifted_fast: shifting an independent ensemble is not supported");
  std::vector<double> slow_new = e.slow;
  if (proposal.coordinate >= 0) {
    slow_new[proposal.coordinate] += rng.normal(0.0, proposal.sds[proposal.coordinate]);
  } else {
    for (std::size_t i = 0; i < slow_new.size(); ++i)
      slow_new[i] += rng.normal(0.0, proposal.sds[i]);
  }
  std::vector<double> shift(shift_sds.size());
  for (std::size_t c = 0; c < shift.size(); ++c) shift[c] = rng.normal(0.0, shift_sds[c]);
  std::vector<std::vector<double>> members = e.fast_members;
  for (auto& m : members)
    for (std::size_t c = 0; c < m.size(); ++c) m[c] += shift[c];
  return metropolis_on_ensemble(e, target, std::move(slow_new), members, counters, rng,
                                /*members_moved=*/true);
}

Ensemble ensemble_sweep(Ensemble e, const FastSlowTarget& target, std::span<const double> sds,
                        EvalCounters& counters, RngStream& rng, int* accept_count) {
  SlowProposal prop{std::vector<double>(sds.begin(), sds.end()), 0};
  for (int i = 0; i < static_cast<int>(e.slow.size()); ++i) {
    prop.coordinate = i;
    UpdateResult r = update_slow_fixed_fast(e, target, prop, counters, rng);
    if (r.accepted && accept_count) ++*accept_count;
    e = std::move(r.ensemble);
  }
  return e;
}

}  // namespace ensmc
