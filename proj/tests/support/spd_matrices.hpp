#pragma once

#include <cmath>
#include <vector>

#include "ensmc/numlin.hpp"
#include "ensmc/rng.hpp"

namespace ensmc::testing {

// Random SPD matrix Q diag(spectrum) Q^T with Q from Gram-Schmidt on a
// Gaussian matrix and eigenvalues log-uniform on [lo, hi].
inline numlin::SymMatrix random_spd(int n, RngStream& rng, double lo = 1e-3, double hi = 1.0) {
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  for (auto& row : q)
    for (double& v : row) v = rng.normal();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      double dot = 0.0;
      for (int k = 0; k < n; ++k) dot += q[i][k] * q[j][k];
      for (int k = 0; k < n; ++k) q[i][k] -= dot * q[j][k];
    }
    double norm = 0.0;
    for (double v : q[i]) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : q[i]) v /= norm;
  }
  std::vector<double> lam(n);
  for (double& v : lam) v = lo * std::exp(rng.uniform() * std::log(hi / lo));

  numlin::SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += q[k][i] * lam[k] * q[k][j];
      m.set(i, j, s);
    }
  return m;
}

// Minimal self-contained Cholesky solve used as an oracle independent of the
// library's factorization code.
struct OracleChol {
  int n = 0;
  std::vector<double> l;
  bool ok = false;

  explicit OracleChol(const std::vector<std::vector<double>>& a) : n(static_cast<int>(a.size())) {
    l.assign(static_cast<std::size_t>(n) * n, 0.0);
    ok = true;
    for (int j = 0; j < n; ++j) {
      double d = a[j][j];
      for (int k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
      if (!(d > 0.0)) {
        ok = false;
        return;
      }
      l[j * n + j] = std::sqrt(d);
      for (int i = j + 1; i < n; ++i) {
        double s = a[i][j];
        for (int k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
        l[i * n + j] = s / l[j * n + j];
      }
    }
  }

  double logdet() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::log(l[i * n + i]);
    return 2.0 * s;
  }

  double quadform(const std::vector<double>& y) const {
    std::vector<double> u(n);
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = y[i];
      for (int k = 0; k < i; ++k) s -= l[i * n + k] * u[k];
      u[i] = s / l[i * n + i];
      q += u[i] * u[i];
    }
    return q;
  }
};

}  // namespace ensmc::testing
