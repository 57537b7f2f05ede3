#pragma once

#include <cmath>
#include <vector>

#include "ensmc/ensemble.hpp"
#include "support/toy_targets.hpp"

namespace ensmc::testing {

// The paper's circle example, discretized: states 0..n-1, a K=2 constellation
// with the second member omega steps counterclockwise.  An ensemble is
// identified by its anchor a (members a and a+omega mod n).  All densities
// and weights below go through the production ensemble functions; only the
// randomness is enumerated.

struct CircleEnumeration {
  int n;
  int omega;
  PureFastTable target;
  std::vector<double> pi;  // normalized

  CircleEnumeration(std::vector<double> log_pi, int omega_steps)
      : n(static_cast<int>(log_pi.size())), omega(omega_steps), target(log_pi) {
    pi.resize(n);
    double z = 0.0;
    for (int i = 0; i < n; ++i) z += std::exp(log_pi[i]);
    for (int i = 0; i < n; ++i) pi[i] = std::exp(log_pi[i]) / z;
  }

  Ensemble ensemble_at(int anchor) const {
    EvalCounters c;
    std::vector<std::vector<double>> members{{static_cast<double>(anchor)},
                                             {static_cast<double>((anchor + omega) % n)}};
    return assemble_ensemble(target, std::span<const double>{}, std::move(members),
                             std::vector<double>{0.0, 0.0}, c);
  }

  // member selection probabilities from the production weights
  std::vector<double> selection_probs(const Ensemble& e) const {
    const std::vector<double> w = selection_logweights(e);
    const double lse = logsumexp(w);
    std::vector<double> p(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) p[i] = std::exp(w[i] - lse);
    return p;
  }

  // up map: x -> anchor index (k=1 keeps x as the anchor; k=2 puts x at the
  // second constellation point)
  std::vector<std::vector<double>> up_matrix() const {
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    for (int x = 0; x < n; ++x) {
      t[x][x] += 0.5;
      t[x][((x - omega) % n + n) % n] += 0.5;
    }
    return t;
  }

  // down map: anchor index -> x
  std::vector<std::vector<double>> down_matrix() const {
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    for (int a = 0; a < n; ++a) {
      const Ensemble e = ensemble_at(a);
      const std::vector<double> p = selection_probs(e);
      t[a][a] += p[0];
      t[a][(a + omega) % n] += p[1];
    }
    return t;
  }

  // one Metropolis update on the ensemble: common shift uniform over the
  // given offsets, accepted with the production rho ratio
  std::vector<std::vector<double>> bar_matrix(const std::vector<int>& shifts) const {
    std::vector<double> rho(n);
    for (int a = 0; a < n; ++a) rho[a] = ensemble_log_density(ensemble_at(a));
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    const double q = 1.0 / shifts.size();
    for (int a = 0; a < n; ++a) {
      for (int s : shifts) {
        const int b = ((a + s) % n + n) % n;
        const double acc = accept_probability(rho[b] - rho[a]);
        t[a][b] += q * acc;
        t[a][a] += q * (1.0 - acc);
      }
    }
    return t;
  }

  static std::vector<std::vector<double>> multiply(const std::vector<std::vector<double>>& a,
                                                   const std::vector<std::vector<double>>& b) {
    const int n = static_cast<int>(a.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const double v = a[i][k];
        if (v == 0.0) continue;
        for (int j = 0; j < n; ++j) c[i][j] += v * b[k][j];
      }
    return c;
  }

  // max_x' | sum_x pi(x) T(x'|x) - pi(x') |
  double stationarity_error(const std::vector<std::vector<double>>& t) const {
    double err = 0.0;
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += pi[i] * t[i][j];
      err = std::max(err, std::abs(s - pi[j]));
    }
    return err;
  }

  double row_sum_error(const std::vector<std::vector<double>>& t) const {
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += t[i][j];
      err = std::max(err, std::abs(s - 1.0));
    }
    return err;
  }
};

}  // namespace ensmc::testing
