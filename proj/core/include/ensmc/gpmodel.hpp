#pragma once

#include <atomic>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ensmc/fastslow.hpp"
#include "ensmc/numlin.hpp"

namespace ensmc::gp {

struct GaussianPrior {
  double mean = 0.0;
  double sd = 1.0;
  double logpdf(double x) const {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.91893853320467274178;  // log sqrt(2 pi)
  }
};

// Model constants and priors.  All parameters are handled on the log scale.
struct GpModelSpec {
  double a = 1.0;     // constant covariance term (inside the eta^2 factor)
  double r = 0.01;    // jitter; adds r^2 to the diagonal of Upsilon
  GaussianPrior prior_log_eta{0.0, 1.5};
  GaussianPrior prior_log_sigma{std::log(0.5), 1.5};
  double prior_log_nu_mean = std::log(0.5);
  double prior_log_nu_sd = 1.8;
  double prior_log_nu_corr = 0.69;  // pairwise equicorrelation

  static GpModelSpec paper();
  void validate() const;
};

struct GpHyperParams {
  double log_eta = 0.0;
  double log_sigma = 0.0;
  std::vector<double> log_nu;
  double log_psi() const { return log_sigma - log_eta; }
};

// Covariates and responses.  Responses are centered at load time by default;
// the offset is recorded and raw values are kept for byte-exact round trips.
class GpDataset {
 public:
  GpDataset(int n, int p, std::vector<double> z_rowmajor, std::vector<double> y_raw,
            bool center = true);

  int n() const { return n_; }
  int p() const { return p_; }
  double z(int i, int h) const { return z_[static_cast<std::size_t>(i) * p_ + h]; }
  std::span<const double> z_row(int i) const {
    return std::span<const double>(z_).subspan(static_cast<std::size_t>(i) * p_, p_);
  }
  std::span<const double> y() const { return y_; }        // centered
  std::span<const double> y_raw() const { return y_raw_; }
  double y_offset() const { return y_offset_; }
  bool centered() const { return centered_; }

  // (z_h^(i) - z_h^(j))^2 for the pair index of (i, j), i > j
  std::span<const double> pair_sq_diffs(int pair) const {
    return std::span<const double>(sq_diffs_).subspan(static_cast<std::size_t>(pair) * p_, p_);
  }
  static int pair_index(int i, int j) { return i * (i - 1) / 2 + j; }  // i > j

  static GpDataset from_csv(const std::string& path, bool center = true);
  void write_csv(const std::string& path) const;  // raw responses
  std::string to_csv() const;

 private:
  int n_, p_;
  std::vector<double> z_;
  std::vector<double> y_raw_, y_;
  double y_offset_ = 0.0;
  bool centered_ = false;
  std::vector<double> sq_diffs_;  // n(n-1)/2 x p
};

// Upsilon' = a^2 + exp(-sum_h (nu_h (z_h^i - z_h^j))^2) + r^2 I.
// Entries are finite for any finite log_nu (zero covariate gaps contribute
// zero even when nu_h overflows).
numlin::SymMatrix build_upsilon(const GpModelSpec& spec, const GpDataset& data,
                                std::span<const double> log_nu);

// Cached slow-phase results, Cholesky route: log det(Upsilon' + psi^2 I) and
// y^T (Upsilon' + psi^2 I)^{-1} y.  pd=false marks a failed factorization
// (zero posterior density for every fast value).
struct GpCholPayload final : SlowPayload {
  bool pd = false;
  double logdet_base = 0.0;
  double quad_base = 0.0;
  double log_prior_slow = 0.0;  // log-nu prior part, reused by every fast eval
};

// Cached slow-phase results, eigendecomposition route: eigenvalues of
// Upsilon' and projections u = E^T y.
struct GpEigPayload final : SlowPayload {
  bool ok = false;
  std::vector<double> lambda;  // ascending, clamped at zero
  std::vector<double> u;
  double log_prior_slow = 0.0;
  int clamped = 0;  // eigenvalues clamped in this payload
};

// -1/2 (2 n log eta + logdet_base) - 1/2 quad_base / eta^2
double gp_loglik_chol(const GpCholPayload& payload, int n, double log_eta);

// -1/2 sum_i log(eta^2 lambda_i + sigma^2) - 1/2 sum_i u_i^2/(eta^2 lambda_i + sigma^2)
double gp_loglik_eig(const GpEigPayload& payload, double log_eta, double log_sigma);

// Gaussian priors on log sigma and log eta plus the equicorrelated Gaussian
// prior on log nu, fully normalized.
double log_prior(const GpModelSpec& spec, const GpHyperParams& params);
double log_prior_nu(const GpModelSpec& spec, std::span<const double> log_nu);

struct GpPrediction {
  double mean = 0.0;      // on the original response scale
  double variance = 0.0;  // clamped at zero
  bool clamped = false;
};

// Posterior predictive mean/variance at z_star via one Cholesky
// factorization of the full covariance.  Throws NotPositiveDefinite.
GpPrediction gp_predict(const GpModelSpec& spec, const GpDataset& data,
                        const GpHyperParams& params, std::span<const double> z_star);

// Fast/slow split with Cholesky computations: slow = (log nu_1..p, log psi),
// fast = (log eta).
class GpCholTarget final : public FastSlowTarget {
 public:
  GpCholTarget(GpModelSpec spec, std::shared_ptr<const GpDataset> data);
  int slow_dim() const override { return data_->p() + 1; }
  int fast_dim() const override { return 1; }
  std::shared_ptr<const SlowPayload> compute_slow(std::span<const double> slow) const override;
  double compute_fast(const SlowContext& ctx, std::span<const double> fast) const override;
  double slow_work_units() const override;
  double fast_work_units() const override;
  std::array<double, 3> trace_summary(const FastSlowPoint& p) const override;

  FastSlowPoint point_from_params(const GpHyperParams& params) const;
  GpHyperParams params_from_point(const FastSlowPoint& p) const;
  const GpModelSpec& spec() const { return spec_; }
  const GpDataset& data() const { return *data_; }

 private:
  GpModelSpec spec_;
  std::shared_ptr<const GpDataset> data_;
};

// Fast/slow split with eigendecomposition computations: slow = (log nu_1..p),
// fast = (log eta, log sigma).
class GpEigTarget final : public FastSlowTarget {
 public:
  GpEigTarget(GpModelSpec spec, std::shared_ptr<const GpDataset> data);
  int slow_dim() const override { return data_->p(); }
  int fast_dim() const override { return 2; }
  std::shared_ptr<const SlowPayload> compute_slow(std::span<const double> slow) const override;
  double compute_fast(const SlowContext& ctx, std::span<const double> fast) const override;
  double slow_work_units() const override;
  double fast_work_units() const override;
  std::array<double, 3> trace_summary(const FastSlowPoint& p) const override;

  FastSlowPoint point_from_params(const GpHyperParams& params) const;
  GpHyperParams params_from_point(const FastSlowPoint& p) const;
  const GpModelSpec& spec() const { return spec_; }
  const GpDataset& data() const { return *data_; }
  long clamp_events() const { return clamp_events_.load(); }

 private:
  GpModelSpec spec_;
  std::shared_ptr<const GpDataset> data_;
  mutable std::atomic<long> clamp_events_{0};
};

}  // namespace ensmc::gp
