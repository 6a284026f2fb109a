#ifndef STMRF_GAMMA_GAMMA_HPP
#define STMRF_GAMMA_GAMMA_HPP

/* Gamma-Gamma observation model for two-condition expression data.
 *
 * Within one gene-by-time cell, observations are Gamma(alpha, rate lambda)
 * with the cell-specific rate lambda itself Gamma(alpha0, rate nu).
 * Integrating lambda out gives a closed-form marginal for a group of
 * observations sharing one lambda:
 *
 *   f(y_1..y_k) = nu^alpha0 Gamma(k alpha + alpha0)
 *                 / (Gamma(alpha)^k Gamma(alpha0))
 *                 * (prod y_i)^(alpha - 1) / (nu + sum y_i)^(k alpha + alpha0)
 *
 * Under the null state the two condition groups share one lambda; under the
 * differential state each group has its own independent lambda.  All density
 * work happens in log space, driven by per-cell sufficient statistics
 * (sum of group 1, sum of group 2, sum of logs).
 */

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stmrf/math.hpp"
#include "stmrf/rng.hpp"
#include "stmrf/state_matrix.hpp"

namespace stmrf {

/// Observation-model parameters: observation shape alpha, rate-prior shape
/// alpha0, rate-prior rate nu.  All strictly positive.
struct GGParams {
  double alpha = 1.0;
  double alpha0 = 1.0;
  double nu = 1.0;

  bool valid() const {
    return std::isfinite(alpha) && alpha > 0.0 && std::isfinite(alpha0) &&
           alpha0 > 0.0 && std::isfinite(nu) && nu > 0.0;
  }
};

inline void require_valid(const GGParams& th, const char* where) {
  if (!th.valid())
    throw std::invalid_argument(std::string(where) +
                                ": parameters must be positive and finite");
}

/// Strictly positive expression values on a dense (gene, time, replicate)
/// grid: m replicates in condition 1 followed by n in condition 2.
class ExpressionData {
public:
  ExpressionData(std::vector<std::string> gene_labels, std::size_t time_points,
                 std::size_t m, std::size_t n)
      : labels_(std::move(gene_labels)), time_points_(time_points), m_(m),
        n_(n), values_(labels_.size() * time_points * (m + n), 1.0) {
    if (labels_.empty() || time_points == 0)
      throw std::invalid_argument("ExpressionData: empty dimension");
    if (m < 1 || n < 1)
      throw std::invalid_argument("ExpressionData: each condition needs "
                                  "at least one replicate");
  }

  std::size_t gene_count() const { return labels_.size(); }
  std::size_t time_count() const { return time_points_; }
  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  const std::vector<std::string>& gene_labels() const { return labels_; }

  /// All m+n observations for one gene-by-time cell (condition 1 first).
  std::span<const double> cell(std::size_t g, std::size_t t) const {
    return {values_.data() + offset(g, t), m_ + n_};
  }

  std::span<double> cell(std::size_t g, std::size_t t) {
    return {values_.data() + offset(g, t), m_ + n_};
  }

  void set(std::size_t g, std::size_t t, std::size_t r, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("ExpressionData: values must be positive");
    values_[offset(g, t) + r] = v;
  }

private:
  std::size_t offset(std::size_t g, std::size_t t) const {
    return (g * time_points_ + t) * (m_ + n_);
  }

  std::vector<std::string> labels_;
  std::size_t time_points_;
  std::size_t m_, n_;
  std::vector<double> values_;
};

/// Sufficient statistics of one cell for the marginal densities.
struct CellStats {
  double sum1 = 0.0;     // sum of condition-1 observations
  double sum2 = 0.0;     // sum of condition-2 observations
  double sum_log = 0.0;  // sum of log(y) over all m+n observations
};

/// Per-dataset sufficient statistics, computed once and reused across
/// density evaluations (gene-major, time within gene).
struct SuffStats {
  std::size_t genes = 0;
  std::size_t time_points = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<CellStats> cells;

  const CellStats& at(std::size_t g, std::size_t t) const {
    return cells[g * time_points + t];
  }

  static SuffStats from(const ExpressionData& data) {
    SuffStats s;
    s.genes = data.gene_count();
    s.time_points = data.time_count();
    s.m = data.m();
    s.n = data.n();
    s.cells.resize(s.genes * s.time_points);
    for (std::size_t g = 0; g < s.genes; ++g)
      for (std::size_t t = 0; t < s.time_points; ++t) {
        const auto y = data.cell(g, t);
        CellStats c;
        for (std::size_t r = 0; r < s.m; ++r) {
          c.sum1 += y[r];
          c.sum_log += std::log(y[r]);
        }
        for (std::size_t r = s.m; r < s.m + s.n; ++r) {
          c.sum2 += y[r];
          c.sum_log += std::log(y[r]);
        }
        s.cells[g * s.time_points + t] = c;
      }
    return s;
  }
};

/// Log-domain constants of the marginal densities for fixed (theta, m, n);
/// hoisting these makes a full-dataset objective three logs per cell.
struct GGConstants {
  double a_m = 0.0;      // m*alpha + alpha0
  double a_n = 0.0;      // n*alpha + alpha0
  double a_mn = 0.0;     // (m+n)*alpha + alpha0
  double alpha_m1 = 0.0; // alpha - 1
  double nu = 0.0;
  double log_k_split = 0.0;  // normalizer product, independent lambdas
  double log_k_joint = 0.0;  // normalizer, shared lambda

  static GGConstants make(const GGParams& th, std::size_t m, std::size_t n) {
    require_valid(th, "GGConstants");
    if (m < 1 || n < 1)
      throw std::invalid_argument("GGConstants: need m >= 1 and n >= 1");
    GGConstants c;
    const double md = static_cast<double>(m), nd = static_cast<double>(n);
    c.a_m = md * th.alpha + th.alpha0;
    c.a_n = nd * th.alpha + th.alpha0;
    c.a_mn = (md + nd) * th.alpha + th.alpha0;
    c.alpha_m1 = th.alpha - 1.0;
    c.nu = th.nu;
    const double lg_alpha = std::lgamma(th.alpha);
    const double lg_alpha0 = std::lgamma(th.alpha0);
    const double log_nu = std::log(th.nu);
    const double k1 =
        th.alpha0 * log_nu + std::lgamma(c.a_m) - md * lg_alpha - lg_alpha0;
    const double k2 =
        th.alpha0 * log_nu + std::lgamma(c.a_n) - nd * lg_alpha - lg_alpha0;
    c.log_k_split = k1 + k2;
    c.log_k_joint = th.alpha0 * log_nu + std::lgamma(c.a_mn) -
                    (md + nd) * lg_alpha - lg_alpha0;
    return c;
  }
};

/// Log marginal density of one cell under the shared-lambda (null) model.
inline double log_density_null(const CellStats& s, const GGConstants& c) {
  return c.log_k_joint + c.alpha_m1 * s.sum_log -
         c.a_mn * std::log(c.nu + s.sum1 + s.sum2);
}

/// Log marginal density of one cell under the split-lambda (DE) model.
inline double log_density_de(const CellStats& s, const GGConstants& c) {
  return c.log_k_split + c.alpha_m1 * s.sum_log -
         c.a_m * std::log(c.nu + s.sum1) - c.a_n * std::log(c.nu + s.sum2);
}

/// Log marginal density of raw observations (condition 1 first).  `de`
/// selects the split-lambda model.  Throws on nonpositive observations.
inline double log_density(std::span<const double> y, std::size_t m,
                          std::size_t n, bool de, const GGParams& th) {
  if (y.size() != m + n)
    throw std::invalid_argument("log_density: observation count != m + n");
  CellStats s;
  for (std::size_t r = 0; r < y.size(); ++r) {
    if (!(y[r] > 0.0) || !std::isfinite(y[r]))
      throw std::invalid_argument("log_density: observations must be "
                                  "positive and finite");
    (r < m ? s.sum1 : s.sum2) += y[r];
    s.sum_log += std::log(y[r]);
  }
  const auto c = GGConstants::make(th, m, n);
  return de ? log_density_de(s, c) : log_density_null(s, c);
}

/// Full-data log likelihood given the state matrix (deterministic
/// gene-major, time-minor summation order).
inline double gg_log_likelihood(const SuffStats& stats,
                                const StateMatrix& states,
                                const GGParams& th) {
  if (states.gene_count() != stats.genes ||
      states.time_count() != stats.time_points)
    throw std::invalid_argument("gg_log_likelihood: dimension mismatch");
  const auto c = GGConstants::make(th, stats.m, stats.n);
  double total = 0.0;
  for (std::size_t g = 0; g < stats.genes; ++g)
    for (std::size_t t = 0; t < stats.time_points; ++t) {
      const auto& s = stats.at(g, t);
      total += states.at(g, t) ? log_density_de(s, c) : log_density_null(s, c);
    }
  return total;
}

/// Per-cell emission log densities under both states, precomputed once per
/// estimation cycle (indexed like SuffStats: gene-major).
struct EmissionTable {
  std::size_t genes = 0;
  std::size_t time_points = 0;
  std::vector<double> log_null;
  std::vector<double> log_de;

  static EmissionTable make(const SuffStats& stats, const GGParams& th) {
    const auto c = GGConstants::make(th, stats.m, stats.n);
    EmissionTable e;
    e.genes = stats.genes;
    e.time_points = stats.time_points;
    e.log_null.resize(stats.cells.size());
    e.log_de.resize(stats.cells.size());
    for (std::size_t i = 0; i < stats.cells.size(); ++i) {
      e.log_null[i] = log_density_null(stats.cells[i], c);
      e.log_de[i] = log_density_de(stats.cells[i], c);
    }
    return e;
  }

  const double* null_row(std::size_t g) const {
    return log_null.data() + g * time_points;
  }
  const double* de_row(std::size_t g) const {
    return log_de.data() + g * time_points;
  }
};

/// Method-of-moments initializer for fit_theta.  For Gamma observations the
/// within-cell gap log(mean) - mean(log) equals log(alpha) - digamma(alpha),
/// monotone in alpha; the median gap across cells resists inflation from
/// cells whose two conditions have different rates.  Crude per-cell rate
/// estimates alpha/mean then pin (alpha0, nu) by matching the Gamma rate
/// prior's mean and variance.  Clamped to a sane box; never fails on legal
/// data.
inline GGParams fit_theta_init(const SuffStats& stats) {
  const double count = static_cast<double>(stats.m + stats.n);
  std::vector<double> gaps;
  std::vector<double> inv_means;
  gaps.reserve(stats.cells.size());
  inv_means.reserve(stats.cells.size());
  for (const auto& c : stats.cells) {
    const double mean = (c.sum1 + c.sum2) / count;
    gaps.push_back(std::log(mean) - c.sum_log / count);
    inv_means.push_back(1.0 / mean);
  }

  const std::size_t mid = gaps.size() / 2;
  std::nth_element(gaps.begin(), gaps.begin() + mid, gaps.end());
  const double d = gaps[mid];
  double alpha = 500.0;  // gap ~ 0 means essentially constant cells
  if (d > 1e-9) {
    // Closed-form approximation to the root of log(a) - digamma(a) = d.
    alpha = (3.0 - d + std::sqrt((d - 3.0) * (d - 3.0) + 24.0 * d)) /
            (12.0 * d);
  }
  alpha = std::clamp(alpha, 0.2, 500.0);

  double z_sum = 0.0, z_sq = 0.0;
  for (const double im : inv_means) {
    const double z = alpha * im;  // crude cell rate estimate
    z_sum += z;
    z_sq += z * z;
  }
  const double zn = static_cast<double>(inv_means.size());
  const double rate_mean = z_sum / zn;
  const double rate_var = std::max(z_sq / zn - rate_mean * rate_mean,
                                   1e-12 * rate_mean * rate_mean + 1e-300);
  const double alpha0 =
      std::clamp(rate_mean * rate_mean / rate_var, 0.05, 100.0);
  const double nu = std::clamp(alpha0 / rate_mean, 1e-4, 1e4);
  return GGParams{alpha, alpha0, nu};
}

namespace detail {

inline std::vector<double> log_theta(const GGParams& th) {
  return {std::log(th.alpha), std::log(th.alpha0), std::log(th.nu)};
}

inline GGParams exp_theta(const std::vector<double>& z) {
  return GGParams{std::exp(z[0]), std::exp(z[1]), std::exp(z[2])};
}

}  // namespace detail

/// Maximum-likelihood fit of the observation parameters with the states
/// held fixed.  Nelder-Mead over log-parameters, method-of-moments start
/// plus two seeded random restarts; with a warm start (from the previous
/// estimation cycle) a single polished run is used instead.  The returned
/// parameters never score below the best starting point.
inline GGParams fit_theta(const SuffStats& stats, const StateMatrix& states,
                          const GGParams* warm_start = nullptr,
                          std::uint64_t seed = 0x474754ULL) {
  const auto objective = [&](const std::vector<double>& z) {
    for (const double v : z)
      if (!(std::fabs(v) < 30.0)) return 1e300;  // keep exp() in range
    const double ll = gg_log_likelihood(stats, states, detail::exp_theta(z));
    return std::isfinite(ll) ? -ll : 1e300;
  };

  std::vector<std::vector<double>> starts;
  if (warm_start != nullptr && warm_start->valid()) {
    starts.push_back(detail::log_theta(*warm_start));
  } else {
    const auto z0 = detail::log_theta(fit_theta_init(stats));
    starts.push_back(z0);
    Rng rng(seed);
    for (int r = 0; r < 2; ++r) {
      auto z = z0;
      for (auto& v : z) v += rng.uniform(-0.75, 0.75);
      starts.push_back(z);
    }
  }

  std::vector<double> best_z;
  double best_f = std::numeric_limits<double>::infinity();
  const double step = (starts.size() == 1) ? 0.05 : 0.4;
  for (const auto& z0 : starts) {
    const auto res = nelder_mead(objective, z0, step, 1e-6);
    if (res.fmin < best_f) {
      best_f = res.fmin;
      best_z = res.x;
    }
  }
  if (best_z.empty() || best_f >= 1e300)
    throw std::runtime_error("fit_theta: objective not finite anywhere");
  return detail::exp_theta(best_z);
}

/// Draws the m+n observations of one cell: condition 1 first, then
/// condition 2.  Under the DE state the groups get independent rates.
inline std::vector<double> sample_gene_obs(bool de, const GGParams& th,
                                           std::size_t m, std::size_t n,
                                           Rng& rng) {
  require_valid(th, "sample_gene_obs");
  if (m < 1 || n < 1)
    throw std::invalid_argument("sample_gene_obs: need m >= 1 and n >= 1");
  std::vector<double> y(m + n);
  const double lambda1 = rng.gamma(th.alpha0, 1.0 / th.nu);
  const double lambda2 = de ? rng.gamma(th.alpha0, 1.0 / th.nu) : lambda1;
  for (std::size_t r = 0; r < m; ++r)
    y[r] = rng.gamma(th.alpha, 1.0 / lambda1);
  for (std::size_t r = 0; r < n; ++r)
    y[m + r] = rng.gamma(th.alpha, 1.0 / lambda2);
  return y;
}

}  // namespace stmrf

#endif
