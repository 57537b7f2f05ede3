#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ensmc/gpmodel.hpp"
#include "ensmc/rng.hpp"

namespace ensmc::datagen {

struct DataGenSpec {
  int n = 100;
  int p = 12;
  double noise_sd = 0.4;
  std::uint64_t seed = 1;

  static DataGenSpec paper(std::uint64_t seed = 1) { return DataGenSpec{100, 12, 0.4, seed}; }
  void validate() const;
};

// Correlated Gaussian covariates: w_1..w_12 i.i.d. standard normal, then
//   z1 = w1,  z2 = .25 z1 + w2 sqrt(1-.25^2),  z3 = .25 z2 + w3 sqrt(1-.25^2),
//   z4..z6 = .99 z1..z3 + w sqrt(1-.99^2),  z7..z9 = .9 z1..z3 + w sqrt(1-.9^2),
//   z10..z12 = w10..w12.
// Throws UnsupportedP unless p == 12.  Row-major n x p.
std::vector<double> gen_covariates(const DataGenSpec& spec, RngStream& rng);

// 0.7 z1^2 + 0.8 sin(0.3 + (4.5 + 0.5 z1) z2) + 0.85 cos(0.1 + 5 z3 + 0.1 z2^2)
double regression_mean(double z1, double z2, double z3);

// regression_mean plus N(0, noise_sd^2) noise.  Z needs >= 3 columns.
std::vector<double> gen_responses(const DataGenSpec& spec, std::span<const double> z, int p,
                                  RngStream& rng);

// Full synthetic dataset from its own stream: covariates first, then
// responses, one draw per variate.
gp::GpDataset generate(const DataGenSpec& spec, bool center = true);

}  // namespace ensmc::datagen
