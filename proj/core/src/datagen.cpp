#include "ensmc/datagen.hpp"

#include <cmath>

#include "ensmc/errors.hpp"

namespace ensmc::datagen {

void DataGenSpec::validate() const {
  if (n < 1) throw ConfigError("datagen: n must be >= 1");
  if (!(noise_sd > 0.0)) throw ConfigError("datagen: noise sd must be > 0");
}

std::vector<double> gen_covariates(const DataGenSpec& spec, RngStream& rng) {
  if (spec.p != 12) throw UnsupportedP("gen_covariates: the paper preset defines p = 12 only");
  const double s25 = std::sqrt(1.0 - 0.25 * 0.25);
  const double s99 = std::sqrt(1.0 - 0.99 * 0.99);
  const double s90 = std::sqrt(1.0 - 0.9 * 0.9);

  std::vector<double> out(static_cast<std::size_t>(spec.n) * 12);
  double w[12];
  for (int i = 0; i < spec.n; ++i) {
    for (double& v : w) v = rng.normal();
    double* z = &out[static_cast<std::size_t>(i) * 12];
    z[0] = w[0];
    z[1] = 0.25 * z[0] + w[1] * s25;
    z[2] = 0.25 * z[1] + w[2] * s25;
    z[3] = 0.99 * z[0] + w[3] * s99;
    z[4] = 0.99 * z[1] + w[4] * s99;
    z[5] = 0.99 * z[2] + w[5] * s99;
    z[6] = 0.9 * z[0] + w[6] * s90;
    z[7] = 0.9 * z[1] + w[7] * s90;
    z[8] = 0.9 * z[2] + w[8] * s90;
    z[9] = w[9];
    z[10] = w[10];
    z[11] = w[11];
  }
  return out;
}

double regression_mean(double z1, double z2, double z3) {
  return 0.7 * z1 * z1 + 0.8 * std::sin(0.3 + (4.5 + 0.5 * z1) * z2) +
         0.85 * std::cos(0.1 + 5.0 * z3 + 0.1 * z2 * z2);
}

std::vector<double> gen_responses(const DataGenSpec& spec, std::span<const double> z, int p,
                                  RngStream& rng) {
  if (p < 3) throw DimensionMismatch("gen_responses: need at least 3 covariate columns");
  std::vector<double> y(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const double* row = &z[static_cast<std::size_t>(i) * p];
    y[i] = regression_mean(row[0], row[1], row[2]) + rng.normal(0.0, spec.noise_sd);
  }
  return y;
}

gp::GpDataset generate(const DataGenSpec& spec, bool center) {
  spec.validate();
  RngStream rng(spec.seed);
  std::vector<double> z = gen_covariates(spec, rng);
  std::vector<double> y = gen_responses(spec, z, spec.p, rng);
  return gp::GpDataset(spec.n, spec.p, std::move(z), std::move(y), center);
}

}  // namespace ensmc::datagen
