#include "ensmc/numlin.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

#include "ensmc/errors.hpp"

namespace ensmc::numlin {

SymMatrix::SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {
  if (n < 1) throw DimensionMismatch("SymMatrix: n must be >= 1");
}

SymMatrix SymMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  SymMatrix m(n);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != n)
      throw DimensionMismatch("SymMatrix::from_rows: ragged rows");
    int j = 0;
    for (double v : row) m.a_[static_cast<std::size_t>(i) * n + j++] = v;
    ++i;
  }
  for (i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (m(i, j) != m(j, i))
        throw DimensionMismatch("SymMatrix::from_rows: input not symmetric");
  return m;
}

void SymMatrix::set(int i, int j, double v) {
  a_[static_cast<std::size_t>(i) * n_ + j] = v;
  a_[static_cast<std::size_t>(j) * n_ + i] = v;
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

double SymMatrix::frobenius() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

CholFactor cholesky(const SymMatrix& m) {
  const int n = m.size();
  std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= l[static_cast<std::size_t>(j) * n + k] * l[static_cast<std::size_t>(j) * n + k];
    if (!(d > 0.0))  // also rejects NaN pivots
      throw NotPositiveDefinite("cholesky: nonpositive pivot at column " + std::to_string(j));
    const double ljj = std::sqrt(d);
    l[static_cast<std::size_t>(j) * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      const double* ri = &l[static_cast<std::size_t>(i) * n];
      const double* rj = &l[static_cast<std::size_t>(j) * n];
      for (int k = 0; k < j; ++k) s -= ri[k] * rj[k];
      l[static_cast<std::size_t>(i) * n + j] = s / ljj;
    }
  }
  return CholFactor(n, std::move(l));
}

double chol_logdet(const CholFactor& f) {
  const int n = f.size();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::log(f(i, i));
  return 2.0 * s;
}

double chol_quadform(const CholFactor& f, std::span<const double> y) {
  const int n = f.size();
  if (static_cast<int>(y.size()) != n)
    throw DimensionMismatch("chol_quadform: vector length != matrix size");
  // u = L^{-1} y by forward substitution; result is u^T u
  std::vector<double> u(n);
  double q = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = y[i];
    for (int k = 0; k < i; ++k) s -= f(i, k) * u[k];
    u[i] = s / f(i, i);
    q += u[i] * u[i];
  }
  return q;
}

std::vector<double> chol_solve(const CholFactor& f, std::span<const double> y) {
  const int n = f.size();
  if (static_cast<int>(y.size()) != n)
    throw DimensionMismatch("chol_solve: vector length != matrix size");
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) {
    double s = y[i];
    for (int k = 0; k < i; ++k) s -= f(i, k) * x[k];
    x[i] = s / f(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= f(k, i) * x[k];
    x[i] = s / f(i, i);
  }
  return x;
}

namespace {

// Householder reduction to tridiagonal form; on exit a holds the accumulated
// orthogonal transformation, d the diagonal and e the subdiagonal (e[0]=0).
void tridiagonalize(int n, std::vector<double>& a, std::vector<double>& d, std::vector<double>& e) {
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (int k = 0; k <= l; ++k) scale += std::abs(at(i, k));
      if (scale == 0.0) {
        e[i] = at(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          at(i, k) /= scale;
          h += at(i, k) * at(i, k);
        }
        double f = at(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        at(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          at(j, i) = at(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += at(j, k) * at(i, k);
          for (int k = j + 1; k <= l; ++k) g += at(k, j) * at(i, k);
          e[j] = g / h;
          f += e[j] * at(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = at(i, j);
          g = e[j] - hh * f;
          e[j] = g;
          for (int k = 0; k <= j; ++k) at(j, k) -= f * e[k] + g * at(i, k);
        }
      }
    } else {
      e[i] = at(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += at(i, k) * at(k, j);
        for (int k = 0; k <= l; ++k) at(k, j) -= g * at(k, i);
      }
    }
    d[i] = at(i, i);
    at(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) at(j, i) = at(i, j) = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal (d, e), rotating the columns of z.
void ql_implicit(int n, std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  constexpr int kMaxIter = 50;
  const double eps = std::numeric_limits<double>::epsilon();
  auto zt = [&](int i, int j) -> double& { return z[static_cast<std::size_t>(i) * n + j]; };

  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    while (true) {
      int m = l;
      for (; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iter > kMaxIter)
        throw NoConvergence("sym_eigen: QL iteration limit at eigenvalue " + std::to_string(l));

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (int i = m - 1; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        for (int k = 0; k < n; ++k) {
          f = zt(k, i + 1);
          zt(k, i + 1) = s * zt(k, i) + c * f;
          zt(k, i) = c * zt(k, i) - s * f;
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

}  // namespace

EigenDecomp sym_eigen(const SymMatrix& m) {
  const int n = m.size();
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> d(n), e(n, 0.0);
  if (n == 1) {
    return EigenDecomp(1, {m(0, 0)}, {1.0});
  }
  tridiagonalize(n, a, d, e);
  ql_implicit(n, d, e, a);

  // sort ascending, transposing column eigenvectors into rows
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });
  std::vector<double> values(n);
  std::vector<double> rows(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    values[i] = d[order[i]];
    for (int k = 0; k < n; ++k)
      rows[static_cast<std::size_t>(i) * n + k] = a[static_cast<std::size_t>(k) * n + order[i]];
  }
  return EigenDecomp(n, std::move(values), std::move(rows));
}

}  // namespace ensmc::numlin
