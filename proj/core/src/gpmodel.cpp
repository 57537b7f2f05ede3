#include "ensmc/gpmodel.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "ensmc/errors.hpp"

namespace ensmc::gp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}
}  // namespace

GpModelSpec GpModelSpec::paper() { return GpModelSpec{}; }

void GpModelSpec::validate() const {
  if (!(a >= 0.0)) throw ConfigError("GpModelSpec: a must be >= 0");
  if (!(r > 0.0)) throw ConfigError("GpModelSpec: r must be > 0");
  if (!(prior_log_eta.sd > 0.0) || !(prior_log_sigma.sd > 0.0) || !(prior_log_nu_sd > 0.0))
    throw ConfigError("GpModelSpec: prior sds must be > 0");
  if (!(prior_log_nu_corr >= 0.0 && prior_log_nu_corr < 1.0))
    throw ConfigError("GpModelSpec: nu correlation must be in [0, 1)");
}

GpDataset::GpDataset(int n, int p, std::vector<double> z_rowmajor, std::vector<double> y_raw,
                     bool center)
    : n_(n), p_(p), z_(std::move(z_rowmajor)), y_raw_(std::move(y_raw)), centered_(center) {
  if (n_ < 1 || p_ < 1) throw DimensionMismatch("GpDataset: need n >= 1 and p >= 1");
  if (z_.size() != static_cast<std::size_t>(n_) * p_ || y_raw_.size() != static_cast<std::size_t>(n_))
    throw DimensionMismatch("GpDataset: shape mismatch");
  for (double v : y_raw_)
    if (!std::isfinite(v)) throw ConfigError("GpDataset: non-finite response");

  y_ = y_raw_;
  if (centered_) {
    y_offset_ = std::accumulate(y_.begin(), y_.end(), 0.0) / n_;
    for (double& v : y_) v -= y_offset_;
  }

  sq_diffs_.resize(static_cast<std::size_t>(n_) * (n_ - 1) / 2 * p_);
  for (int i = 1; i < n_; ++i)
    for (int j = 0; j < i; ++j) {
      double* out = &sq_diffs_[static_cast<std::size_t>(pair_index(i, j)) * p_];
      for (int h = 0; h < p_; ++h) {
        const double d = z(i, h) - z(j, h);
        out[h] = d * d;
      }
    }
}

std::string GpDataset::to_csv() const {
  std::string out;
  for (int h = 1; h <= p_; ++h) {
    out += "z" + std::to_string(h);
    out.push_back(',');
  }
  out += "y\n";
  for (int i = 0; i < n_; ++i) {
    for (int h = 0; h < p_; ++h) {
      append_double(out, z(i, h));
      out.push_back(',');
    }
    append_double(out, y_raw_[i]);
    out.push_back('\n');
  }
  return out;
}

void GpDataset::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_csv();
  if (!out) throw IoError("write failed for '" + path + "'");
}

GpDataset GpDataset::from_csv(const std::string& path, bool center) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset csv: empty file '" + path + "'");

  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string field;
    while (std::getline(hs, field, ',')) header.push_back(field);
  }
  if (header.size() < 2 || header.back() != "y")
    throw IoError("dataset csv: expected header z1..zp,y");
  const int p = static_cast<int>(header.size()) - 1;
  for (int h = 0; h < p; ++h)
    if (header[h] != "z" + std::to_string(h + 1))
      throw IoError("dataset csv: expected header z1..zp,y");

  std::vector<double> z, y;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view rest(line);
    for (int c = 0; c <= p; ++c) {
      const std::size_t comma = rest.find(',');
      std::string_view field;
      if (c < p) {
        if (comma == std::string_view::npos) throw IoError("dataset csv: short row");
        field = rest.substr(0, comma);
        rest = rest.substr(comma + 1);
      } else {
        if (comma != std::string_view::npos) throw IoError("dataset csv: long row");
        field = rest;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw IoError("dataset csv: bad numeric field '" + std::string(field) + "'");
      (c < p ? z : y).push_back(v);
    }
  }
  const int n = static_cast<int>(y.size());
  return GpDataset(n, p, std::move(z), std::move(y), center);
}

numlin::SymMatrix build_upsilon(const GpModelSpec& spec, const GpDataset& data,
                                std::span<const double> log_nu) {
  const int n = data.n();
  const int p = data.p();
  if (static_cast<int>(log_nu.size()) != p)
    throw DimensionMismatch("build_upsilon: log_nu length != p");

  std::vector<double> w(p);  // nu_h^2
  for (int h = 0; h < p; ++h) w[h] = std::exp(2.0 * log_nu[h]);

  const double a2 = spec.a * spec.a;
  numlin::SymMatrix ups(n);
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const std::span<const double> d2 = data.pair_sq_diffs(GpDataset::pair_index(i, j));
      double s = 0.0;
      for (int h = 0; h < p; ++h)
        if (d2[h] != 0.0) s += w[h] * d2[h];  // zero gaps contribute zero even for huge nu
      ups.set(i, j, a2 + std::exp(-s));
    }
  const double diag = a2 + 1.0 + spec.r * spec.r;
  for (int i = 0; i < n; ++i) ups.set(i, i, diag);
  return ups;
}

double gp_loglik_chol(const GpCholPayload& payload, int n, double log_eta) {
  if (!payload.pd) return kNegInf;
  const double quad = payload.quad_base == 0.0
                          ? 0.0
                          : payload.quad_base * std::exp(-2.0 * log_eta);
  const double ll = -0.5 * (2.0 * n * log_eta + payload.logdet_base) - 0.5 * quad;
  return std::isnan(ll) ? kNegInf : ll;
}

double gp_loglik_eig(const GpEigPayload& payload, double log_eta, double log_sigma) {
  if (!payload.ok) return kNegInf;
  const double eta2 = std::exp(2.0 * log_eta);
  const double sigma2 = std::exp(2.0 * log_sigma);
  const int n = static_cast<int>(payload.lambda.size());
  double ll = 0.0;
  int nonpositive = 0;
  for (int i = 0; i < n; ++i) {
    const double lam = payload.lambda[i];
    const double t = lam == 0.0 ? sigma2 : eta2 * lam + sigma2;
    if (!(t > 0.0)) {
      ++nonpositive;
      continue;
    }
    ll -= 0.5 * (std::log(t) + payload.u[i] * payload.u[i] / t);
  }
  if (nonpositive == n)
    throw NonPositiveVariance("gp_loglik_eig: every marginal variance is nonpositive");
  if (nonpositive > 0) return kNegInf;
  return std::isnan(ll) ? kNegInf : ll;
}

double log_prior_nu(const GpModelSpec& spec, std::span<const double> log_nu) {
  // equicorrelation R = (1-c) I + c 11^T:
  //   R^{-1} = 1/(1-c) [I - c/(1 - c + p c) 11^T]
  //   det R  = (1-c)^(p-1) (1 - c + p c)
  const int p = static_cast<int>(log_nu.size());
  const double c = spec.prior_log_nu_corr;
  const double sd = spec.prior_log_nu_sd;
  double sum = 0.0, sumsq = 0.0;
  for (double v : log_nu) {
    const double d = v - spec.prior_log_nu_mean;
    sum += d;
    sumsq += d * d;
  }
  const double denom = 1.0 - c + p * c;
  const double quad = (sumsq - (c / denom) * sum * sum) / ((1.0 - c) * sd * sd);
  const double logdet = 2.0 * p * std::log(sd) + (p - 1) * std::log(1.0 - c) + std::log(denom);
  return -0.5 * (quad + logdet + p * 1.8378770664093454836);  // log(2 pi)
}

double log_prior(const GpModelSpec& spec, const GpHyperParams& params) {
  return spec.prior_log_eta.logpdf(params.log_eta) +
         spec.prior_log_sigma.logpdf(params.log_sigma) + log_prior_nu(spec, params.log_nu);
}

GpPrediction gp_predict(const GpModelSpec& spec, const GpDataset& data,
                        const GpHyperParams& params, std::span<const double> z_star) {
  const int n = data.n();
  const int p = data.p();
  if (static_cast<int>(z_star.size()) != p)
    throw DimensionMismatch("gp_predict: z_star length != p");
  if (static_cast<int>(params.log_nu.size()) != p)
    throw DimensionMismatch("gp_predict: log_nu length != p");

  const double eta2 = std::exp(2.0 * params.log_eta);
  const double sigma2 = std::exp(2.0 * params.log_sigma);
  const double a2 = spec.a * spec.a;

  // Sigma = eta^2 Upsilon' + sigma^2 I
  numlin::SymMatrix sigma = build_upsilon(spec, data, params.log_nu);
  {
    std::span<double> raw = sigma.mutable_data();
    for (double& v : raw) v *= eta2;
    for (int i = 0; i < n; ++i) sigma.set(i, i, sigma(i, i) + sigma2);
  }

  std::vector<double> nu2(p);
  for (int h = 0; h < p; ++h) nu2[h] = std::exp(2.0 * params.log_nu[h]);
  std::vector<double> k(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int h = 0; h < p; ++h) {
      const double d = z_star[h] - data.z(i, h);
      if (d != 0.0) s += nu2[h] * d * d;
    }
    k[i] = eta2 * (a2 + std::exp(-s));
  }

  const numlin::CholFactor f = numlin::cholesky(sigma);
  const std::vector<double> alpha = numlin::chol_solve(f, data.y());
  const std::vector<double> beta = numlin::chol_solve(f, k);

  double mean = 0.0, kq = 0.0;
  for (int i = 0; i < n; ++i) {
    mean += k[i] * alpha[i];
    kq += k[i] * beta[i];
  }
  const double v = eta2 * (a2 + 1.0) + sigma2;

  GpPrediction out;
  out.mean = mean + data.y_offset();
  out.variance = v - kq;
  if (out.variance < 0.0) {
    out.variance = 0.0;
    out.clamped = true;
  }
  return out;
}

// ---- Cholesky-path target ----------------------------------------------------

GpCholTarget::GpCholTarget(GpModelSpec spec, std::shared_ptr<const GpDataset> data)
    : spec_(spec), data_(std::move(data)) {
  spec_.validate();
}

std::shared_ptr<const SlowPayload> GpCholTarget::compute_slow(std::span<const double> slow) const {
  const int p = data_->p();
  const std::span<const double> log_nu = slow.first(p);
  const double psi = std::exp(slow[p]);

  auto payload = std::make_shared<GpCholPayload>();
  payload->log_prior_slow = log_prior_nu(spec_, log_nu);

  numlin::SymMatrix m = build_upsilon(spec_, *data_, log_nu);
  const double psi2 = psi * psi;
  for (int i = 0; i < data_->n(); ++i) m.set(i, i, m(i, i) + psi2);
  try {
    const numlin::CholFactor f = numlin::cholesky(m);
    payload->logdet_base = numlin::chol_logdet(f);
    payload->quad_base = numlin::chol_quadform(f, data_->y());
    payload->pd = true;
  } catch (const NotPositiveDefinite&) {
    payload->pd = false;  // zero density for every fast value
  }
  return payload;
}

double GpCholTarget::compute_fast(const SlowContext& ctx, std::span<const double> fast) const {
  const auto& payload = ctx.payload_as<GpCholPayload>();
  const double log_eta = fast[0];
  const double ll = gp_loglik_chol(payload, data_->n(), log_eta);
  if (ll == kNegInf) return kNegInf;
  const double log_sigma = ctx.slow()[data_->p()] + log_eta;  // log psi + log eta
  const double lp = payload.log_prior_slow + spec_.prior_log_eta.logpdf(log_eta) +
                    spec_.prior_log_sigma.logpdf(log_sigma);
  return ll + lp;
}

double GpCholTarget::slow_work_units() const {
  const double n = data_->n(), p = data_->p();
  return n * n * n / 3.0 + n * n * p;  // factorization + covariance build
}

double GpCholTarget::fast_work_units() const { return 12.0; }

std::array<double, 3> GpCholTarget::trace_summary(const FastSlowPoint& pt) const {
  const int p = data_->p();
  double mean_log_nu = 0.0;
  for (int h = 0; h < p; ++h) mean_log_nu += pt.slow[h];
  mean_log_nu /= p;
  const double log_eta = pt.fast[0];
  return {mean_log_nu, log_eta, pt.slow[p] + log_eta};
}

FastSlowPoint GpCholTarget::point_from_params(const GpHyperParams& params) const {
  FastSlowPoint pt;
  pt.slow = params.log_nu;
  pt.slow.push_back(params.log_psi());
  pt.fast = {params.log_eta};
  return pt;
}

GpHyperParams GpCholTarget::params_from_point(const FastSlowPoint& pt) const {
  const int p = data_->p();
  GpHyperParams params;
  params.log_nu.assign(pt.slow.begin(), pt.slow.begin() + p);
  params.log_eta = pt.fast[0];
  params.log_sigma = pt.slow[p] + pt.fast[0];
  return params;
}

// ---- eigendecomposition-path target -------------------------------------------

GpEigTarget::GpEigTarget(GpModelSpec spec, std::shared_ptr<const GpDataset> data)
    : spec_(spec), data_(std::move(data)) {
  spec_.validate();
}

std::shared_ptr<const SlowPayload> GpEigTarget::compute_slow(std::span<const double> slow) const {
  const int n = data_->n();
  auto payload = std::make_shared<GpEigPayload>();
  payload->log_prior_slow = log_prior_nu(spec_, slow);

  const numlin::SymMatrix ups = build_upsilon(spec_, *data_, slow);
  try {
    const numlin::EigenDecomp eig = numlin::sym_eigen(ups);
    payload->lambda.assign(eig.values().begin(), eig.values().end());
    for (double& lam : payload->lambda) {
      if (lam < 0.0) {  // jitter keeps true eigenvalues >= r^2; negatives are artifacts
        lam = 0.0;
        ++payload->clamped;
      }
    }
    payload->u.resize(n);
    const std::span<const double> y = data_->y();
    for (int i = 0; i < n; ++i) {
      const std::span<const double> v = eig.vector(i);
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += v[j] * y[j];
      payload->u[i] = s;
    }
    payload->ok = true;
    if (payload->clamped > 0) clamp_events_.fetch_add(payload->clamped, std::memory_order_relaxed);
  } catch (const NoConvergence&) {
    payload->ok = false;
  }
  return payload;
}

double GpEigTarget::compute_fast(const SlowContext& ctx, std::span<const double> fast) const {
  const auto& payload = ctx.payload_as<GpEigPayload>();
  const double ll = gp_loglik_eig(payload, fast[0], fast[1]);
  if (ll == kNegInf) return kNegInf;
  const double lp = payload.log_prior_slow + spec_.prior_log_eta.logpdf(fast[0]) +
                    spec_.prior_log_sigma.logpdf(fast[1]);
  return ll + lp;
}

double GpEigTarget::slow_work_units() const {
  const double n = data_->n(), p = data_->p();
  return 6.0 * n * n * n + n * n * p;  // tridiagonalization + QL + covariance build
}

double GpEigTarget::fast_work_units() const { return 6.0 * data_->n(); }

std::array<double, 3> GpEigTarget::trace_summary(const FastSlowPoint& pt) const {
  const int p = data_->p();
  double mean_log_nu = 0.0;
  for (int h = 0; h < p; ++h) mean_log_nu += pt.slow[h];
  mean_log_nu /= p;
  return {mean_log_nu, pt.fast[0], pt.fast[1]};
}

FastSlowPoint GpEigTarget::point_from_params(const GpHyperParams& params) const {
  FastSlowPoint pt;
  pt.slow = params.log_nu;
  pt.fast = {params.log_eta, params.log_sigma};
  return pt;
}

GpHyperParams GpEigTarget::params_from_point(const FastSlowPoint& pt) const {
  GpHyperParams params;
  params.log_nu = pt.slow;
  params.log_eta = pt.fast[0];
  params.log_sigma = pt.fast[1];
  return params;
}

}  // namespace ensmc::gp
