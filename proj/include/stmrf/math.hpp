#ifndef STMRF_MATH_HPP
#define STMRF_MATH_HPP

/* Numerical kernels shared across the library: stable logistic transforms,
 * the regularized incomplete beta function (for t-test p-values), a small
 * dense solver, penalized-free logistic regression via IRLS, and a
 * Nelder-Mead simplex minimizer for smooth low-dimensional objectives.
 */

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace stmrf {

/// log(1 + exp(x)) without overflow or cancellation (Maechler's scheme).
inline double log1pexp(double x) {
  if (x <= -37.0) return std::exp(x);
  if (x <= 18.0) return std::log1p(std::exp(x));
  if (x <= 33.3) return x + std::exp(-x);
  return x;
}

/// Logistic function, stable for any finite argument.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(sigmoid(x)) = -log(1 + exp(-x)).
inline double log_sigmoid(double x) { return -log1pexp(-x); }

/// log(exp(a) + exp(b)) without overflow.
inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// log(sum_i exp(v_i)) without overflow; -inf for an empty span.
inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (const double x : v) m = std::max(m, x);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (const double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

namespace detail {

/// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_cont_frac(double a, double b, double x) {
  constexpr double kEps = 3.0e-16;
  constexpr double kFpMin = 1.0e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("inc_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0))
    return bt * detail::beta_cont_frac(a, b, x) / a;
  return 1.0 - bt * detail::beta_cont_frac(b, a, 1.0 - x) / b;
}

/// Two-sided p-value for a t statistic with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0))
    throw std::invalid_argument("student_t_two_sided_p: df must be positive");
  if (!std::isfinite(t)) return 0.0;
  return inc_beta(0.5 * df, 0.5, df / (df + t * t));
}

/// Solves A x = b in place by Gauss elimination with partial pivoting.
/// A is row-major n x n.  Returns false when a pivot is numerically zero.
inline bool solve_dense(std::vector<double>& A, std::vector<double>& b,
                        std::size_t n) {
  assert(A.size() == n * n && b.size() == n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    scale = std::max(scale, std::fabs(A[i * n + i]));
  const double tiny = std::max(scale, 1.0) * 1e-12;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(A[r * n + col]) > std::fabs(A[piv * n + col])) piv = r;
    if (std::fabs(A[piv * n + col]) < tiny) return false;
    if (piv != col) {
      for (std::size_t c = col; c < n; ++c)
        std::swap(A[piv * n + c], A[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    const double inv = 1.0 / A[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r * n + col] * inv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= A[i * n + c] * b[c];
    b[i] = s / A[i * n + i];
  }
  return true;
}

/// Result of a logistic regression fit.
struct LogisticFit {
  std::vector<double> coef;  // one per design column, zeros for dropped ones
  bool clamped = false;      // some coefficient hit the +-30 rail
  bool dropped = false;      // a degenerate column was excluded
  int iterations = 0;
};

/// Binary logistic regression by iteratively reweighted least squares.
///
/// `x` is row-major with `ncol` columns; column 0 is expected to be an
/// intercept of ones.  Guarantees a finite answer on any input: degenerate
/// columns (all zero, or constant and redundant with the intercept) are
/// dropped with coefficient 0, responses that are all one class produce an
/// intercept of +-30, and coefficients diverging under separation are
/// clamped to +-30 and frozen while the rest converge.
inline LogisticFit logistic_irls(const std::vector<double>& x,
                                 std::size_t nrow, std::size_t ncol,
                                 const std::vector<std::uint8_t>& y,
                                 double tol = 1e-8, int max_iter = 100) {
  constexpr double kRail = 30.0;
  assert(x.size() == nrow * ncol && y.size() == nrow);
  if (nrow == 0) throw std::invalid_argument("logistic_irls: no rows");

  LogisticFit fit;
  fit.coef.assign(ncol, 0.0);

  // All responses identical: the likelihood has no interior optimum, so by
  // convention the intercept takes the rail value and slopes stay zero.
  bool all0 = true, all1 = true;
  for (const auto v : y) (v ? all0 : all1) = false;
  if (all0 || all1) {
    fit.coef[0] = all1 ? kRail : -kRail;
    fit.clamped = true;
    return fit;
  }

  // Identify usable columns: drop all-zero columns and non-intercept
  // columns that are constant (those duplicate the intercept).
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < ncol; ++j) {
    double lo = x[j], hi = x[j];
    for (std::size_t i = 1; i < nrow; ++i) {
      lo = std::min(lo, x[i * ncol + j]);
      hi = std::max(hi, x[i * ncol + j]);
    }
    const bool constant = (lo == hi);
    if (constant && (j > 0 || lo == 0.0)) {
      fit.dropped = true;
      continue;
    }
    active.push_back(j);
  }
  if (active.empty()) return fit;

  const std::size_t k = active.size();
  std::vector<double> beta(k, 0.0);
  std::vector<bool> frozen(k, false);
  std::vector<double> eta(nrow), w(nrow), z(nrow);
  std::vector<double> xtwx, xtwz;

  for (int iter = 1; iter <= max_iter; ++iter) {
    fit.iterations = iter;
    for (std::size_t i = 0; i < nrow; ++i) {
      double e = 0.0;
      for (std::size_t jj = 0; jj < k; ++jj)
        e += beta[jj] * x[i * ncol + active[jj]];
      eta[i] = std::clamp(e, -kRail, kRail);
      const double mu = sigmoid(eta[i]);
      w[i] = std::max(mu * (1.0 - mu), 1e-12);
      z[i] = eta[i] + (static_cast<double>(y[i]) - mu) / w[i];
    }

    // Solve the weighted normal equations over the unfrozen columns.
    std::vector<std::size_t> free_idx;
    for (std::size_t jj = 0; jj < k; ++jj)
      if (!frozen[jj]) free_idx.push_back(jj);
    if (free_idx.empty()) break;
    const std::size_t nf = free_idx.size();
    xtwx.assign(nf * nf, 0.0);
    xtwz.assign(nf, 0.0);
    for (std::size_t i = 0; i < nrow; ++i) {
      double zres = z[i];
      for (std::size_t jj = 0; jj < k; ++jj)
        if (frozen[jj]) zres -= beta[jj] * x[i * ncol + active[jj]];
      for (std::size_t a = 0; a < nf; ++a) {
        const double xa = x[i * ncol + active[free_idx[a]]];
        xtwz[a] += w[i] * xa * zres;
        for (std::size_t b = a; b < nf; ++b)
          xtwx[a * nf + b] += w[i] * xa * x[i * ncol + active[free_idx[b]]];
      }
    }
    for (std::size_t a = 0; a < nf; ++a)
      for (std::size_t b = 0; b < a; ++b) xtwx[a * nf + b] = xtwx[b * nf + a];

    if (!solve_dense(xtwx, xtwz, nf)) {
      // Singular system mid-iteration (complete separation can do this);
      // keep the current clamped estimate rather than failing.
      fit.clamped = true;
      break;
    }

    double delta = 0.0;
    for (std::size_t a = 0; a < nf; ++a) {
      const std::size_t jj = free_idx[a];
      delta = std::max(delta, std::fabs(xtwz[a] - beta[jj]));
      beta[jj] = xtwz[a];
      if (std::fabs(beta[jj]) > kRail) {
        beta[jj] = std::copysign(kRail, beta[jj]);
        frozen[jj] = true;
        fit.clamped = true;
      }
    }
    if (delta < tol) break;
  }

  for (std::size_t jj = 0; jj < k; ++jj) fit.coef[active[jj]] = beta[jj];
  return fit;
}

/// Result of a Nelder-Mead minimization.
struct SimplexResult {
  std::vector<double> x;
  double fmin = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free Nelder-Mead simplex minimization.  Terminates when the
/// simplex diameter (max coordinate spread) drops below `diam_tol` or the
/// evaluation budget is spent.  The returned point is never worse than the
/// starting point.
inline SimplexResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, double step, double diam_tol,
    int max_evals = 20000) {
  const std::size_t n = x0.size();
  assert(n > 0);
  SimplexResult res;

  std::vector<std::vector<double>> v(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) v[i + 1][i] += step;
  for (std::size_t i = 0; i <= n; ++i) {
    fv[i] = f(v[i]);
    ++res.evaluations;
  }

  std::vector<std::size_t> ord(n + 1);
  std::vector<double> xc(n), xr(n), xe(n), xk(n);

  const auto eval = [&](const std::vector<double>& p) {
    ++res.evaluations;
    return f(p);
  };

  for (;;) {
    for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = ord[0], worst = ord[n], second = ord[n - 1];

    double diam = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        diam = std::max(diam, std::fabs(v[i][j] - v[best][j]));
    if (diam < diam_tol) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= max_evals) break;

    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        if (i != worst) s += v[i][j];
      xc[j] = s / static_cast<double>(n);
    }

    for (std::size_t j = 0; j < n; ++j) xr[j] = xc[j] + (xc[j] - v[worst][j]);
    const double fr = eval(xr);
    if (fr < fv[ord[0]]) {
      for (std::size_t j = 0; j < n; ++j)
        xe[j] = xc[j] + 2.0 * (xc[j] - v[worst][j]);
      const double fe = eval(xe);
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      if (outside)
        for (std::size_t j = 0; j < n; ++j)
          xk[j] = xc[j] + 0.5 * (xr[j] - xc[j]);
      else
        for (std::size_t j = 0; j < n; ++j)
          xk[j] = xc[j] + 0.5 * (v[worst][j] - xc[j]);
      const double fk = eval(xk);
      if (fk < (outside ? fr : fv[worst])) {
        v[worst] = xk;
        fv[worst] = fk;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j)
            v[i][j] = v[best][j] + 0.5 * (v[i][j] - v[best][j]);
          fv[i] = eval(v[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  res.x = v[best];
  res.fmin = fv[best];
  return res;
}

}  // namespace stmrf

#endif
