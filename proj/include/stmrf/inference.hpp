#ifndef STMRF_INFERENCE_HPP
#define STMRF_INFERENCE_HPP

/* Iterated conditional modes estimation of the hidden DE state matrix.
 *
 * Starting from a per-cell two-sample t-test on log expression, the fit
 * alternates three steps until the parameters stabilize:
 *
 *   1. prior parameters by maximum pseudolikelihood (logistic regressions),
 *   2. observation parameters by maximum likelihood given the states,
 *   3. one ICM sweep: for each gene in turn, replace its whole time path
 *      by the Viterbi-optimal path given the current neighbor states.
 *
 * The per-gene objective is the gene's chain of prior conditionals (initial
 * field at t = 0, transition field afterwards) plus its emission terms; the
 * dynamic program is exact for one gene with neighbors frozen, so each
 * update can only raise that local objective.
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "stmrf/gamma_gamma.hpp"
#include "stmrf/math.hpp"
#include "stmrf/mrf_prior.hpp"
#include "stmrf/network.hpp"
#include "stmrf/state_matrix.hpp"

namespace stmrf {

/// Which interaction terms of the prior participate in the fit.
enum class FitMode {
  full,           // spatial and temporal terms
  temporal_only,  // beta0 = beta1 = 0: independent per-gene chains
  spatial_only,   // beta2 = 0: independent per-time-point fields
};

struct FitConfig {
  FitMode mode = FitMode::full;
  double epsilon = 0.01;      // relative-change convergence threshold
  int max_cycles = 50;
  double ttest_alpha = 0.05;  // initialization significance level
  std::uint64_t seed = 0;     // drives fit_theta restarts only
};

/// Per-cycle snapshot of the estimation loop.
struct CycleRecord {
  MRFParams phi;
  GGParams theta;
  double pseudolik = 0.0;        // log pseudolikelihood after the sweep
  std::size_t flips = 0;         // state changes made by the sweep
  double max_rel_change = 0.0;   // vs the previous cycle's parameters
  double min_score_gain = 0.0;   // smallest per-gene Viterbi improvement
  bool clamp_warning = false;    // fit_phi hit a coefficient rail
};

struct FitResult {
  StateMatrix states;
  MRFParams phi;
  GGParams theta;
  std::vector<CycleRecord> trace;
  bool converged = false;
  int cycles_used = 0;
};

/// Initial state matrix from per-cell two-sample t-tests on log values:
/// state 1 where the two-sided p-value is below `alpha`.  Cells with zero
/// pooled variance compare the group means directly.
inline StateMatrix init_states_ttest(const ExpressionData& data,
                                     double alpha) {
  const std::size_t m = data.m(), n = data.n();
  if (m < 2 || n < 2)
    throw std::invalid_argument(
        "init_states_ttest: need at least two replicates per condition");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("init_states_ttest: alpha outside (0, 1)");
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  const double df = md + nd - 2.0;

  StateMatrix x(data.gene_count(), data.time_count(), 0);
  std::vector<double> logs(m + n);
  for (std::size_t g = 0; g < data.gene_count(); ++g)
    for (std::size_t t = 0; t < data.time_count(); ++t) {
      const auto y = data.cell(g, t);
      for (std::size_t r = 0; r < m + n; ++r) logs[r] = std::log(y[r]);
      double mean1 = 0.0, mean2 = 0.0;
      for (std::size_t r = 0; r < m; ++r) mean1 += logs[r];
      for (std::size_t r = m; r < m + n; ++r) mean2 += logs[r];
      mean1 /= md;
      mean2 /= nd;
      double ss1 = 0.0, ss2 = 0.0;
      for (std::size_t r = 0; r < m; ++r)
        ss1 += (logs[r] - mean1) * (logs[r] - mean1);
      for (std::size_t r = m; r < m + n; ++r)
        ss2 += (logs[r] - mean2) * (logs[r] - mean2);
      const double sp2 = (ss1 + ss2) / df;
      std::uint8_t de = 0;
      if (sp2 <= 0.0) {
        de = (mean1 != mean2) ? 1 : 0;  // constant groups: exact comparison
      } else {
        const double tstat =
            (mean1 - mean2) / std::sqrt(sp2 * (1.0 / md + 1.0 / nd));
        de = (student_t_two_sided_p(tstat, df) < alpha) ? 1 : 0;
      }
      x.set(g, t, de);
    }
  return x;
}

/// Outcome of one per-gene Viterbi update.
struct ViterbiUpdate {
  std::vector<std::uint8_t> path;  // optimal states over all time points
  double new_score = 0.0;          // path score of `path`
  double old_score = 0.0;          // path score of the current states
  double score_gain = 0.0;         // new_score - old_score (>= 0 up to fp)
};

namespace detail {

/// Two-state Viterbi over one gene's time path with every other gene
/// frozen.  `e_null`/`e_de` point at the gene's per-time emission rows.
inline ViterbiUpdate viterbi_gene(GeneNetwork::NodeId g, const double* e_null,
                                  const double* e_de, const StateMatrix& x,
                                  const GeneNetwork& net,
                                  const MRFParams& phi) {
  const std::size_t tcount = x.time_count();
  ViterbiUpdate out;
  out.path.resize(tcount);

  // Neighbor signed sums per time point (g is never its own neighbor).
  std::vector<double> s(tcount);
  for (std::size_t t = 0; t < tcount; ++t)
    s[t] = neighbor_signed_sum(net, x.column(t), g);

  const double f1 = phi.gamma0 + phi.beta0 * s[0];
  double prev0 = log_conditional_prob(f1, 0) + e_null[0];
  double prev1 = log_conditional_prob(f1, 1) + e_de[0];
  double old_score =
      log_conditional_prob(f1, x.at(g, 0)) + (x.at(g, 0) ? e_de[0] : e_null[0]);

  // back[t] bit 0: best predecessor of state 0; bit 1: of state 1.
  std::vector<std::uint8_t> back(tcount, 0);
  for (std::size_t t = 1; t < tcount; ++t) {
    const double f_from0 = phi.gamma + phi.beta1 * s[t] - phi.beta2;
    const double f_from1 = phi.gamma + phi.beta1 * s[t] + phi.beta2;

    const double to0_from0 = prev0 + log_conditional_prob(f_from0, 0);
    const double to0_from1 = prev1 + log_conditional_prob(f_from1, 0);
    const double to1_from0 = prev0 + log_conditional_prob(f_from0, 1);
    const double to1_from1 = prev1 + log_conditional_prob(f_from1, 1);

    std::uint8_t bits = 0;
    double cur0, cur1;
    if (to0_from1 > to0_from0) {  // ties resolve toward state 0
      bits |= 1;
      cur0 = to0_from1;
    } else {
      cur0 = to0_from0;
    }
    if (to1_from1 > to1_from0) {
      bits |= 2;
      cur1 = to1_from1;
    } else {
      cur1 = to1_from0;
    }
    back[t] = bits;
    prev0 = cur0 + e_null[t];
    prev1 = cur1 + e_de[t];

    // Accumulated in the same association order as the DP recursion above
    // ((score + transition) + emission), so an unchanged optimal path yields
    // a score_gain of exactly 0.0 rather than a rounding residue.
    const double f_old = x.at(g, t - 1) ? f_from1 : f_from0;
    old_score += log_conditional_prob(f_old, x.at(g, t));
    old_score += x.at(g, t) ? e_de[t] : e_null[t];
  }

  std::uint8_t state = (prev1 > prev0) ? 1 : 0;
  out.new_score = state ? prev1 : prev0;
  for (std::size_t t = tcount; t-- > 0;) {
    out.path[t] = state;
    if (t > 0) state = (back[t] >> state) & 1;
  }
  out.old_score = old_score;
  out.score_gain = out.new_score - out.old_score;
  return out;
}

}  // namespace detail

/// Viterbi update for one gene from raw data (computes the gene's emission
/// terms on the fly; see icm_cycle for the table-driven bulk path).
inline ViterbiUpdate viterbi_update_gene(GeneNetwork::NodeId g,
                                         const ExpressionData& data,
                                         const StateMatrix& x,
                                         const GeneNetwork& net,
                                         const MRFParams& phi,
                                         const GGParams& theta) {
  if (x.gene_count() != net.node_count() ||
      x.gene_count() != data.gene_count() ||
      x.time_count() != data.time_count())
    throw std::invalid_argument("viterbi_update_gene: dimension mismatch");
  const std::size_t tcount = data.time_count();
  const auto c = GGConstants::make(theta, data.m(), data.n());
  std::vector<double> e_null(tcount), e_de(tcount);
  for (std::size_t t = 0; t < tcount; ++t) {
    CellStats s;
    const auto y = data.cell(g, t);
    for (std::size_t r = 0; r < y.size(); ++r) {
      (r < data.m() ? s.sum1 : s.sum2) += y[r];
      s.sum_log += std::log(y[r]);
    }
    e_null[t] = log_density_null(s, c);
    e_de[t] = log_density_de(s, c);
  }
  return detail::viterbi_gene(g, e_null.data(), e_de.data(), x, net, phi);
}

/// Result of one full ICM sweep.
struct SweepResult {
  std::size_t flips = 0;
  double min_score_gain = std::numeric_limits<double>::infinity();
};

/// One ICM cycle: sequential Viterbi update of every gene in ascending
/// index order, each seeing the states already updated this sweep.
inline SweepResult icm_cycle(const EmissionTable& emis, StateMatrix& x,
                             const GeneNetwork& net, const MRFParams& phi) {
  if (x.gene_count() != net.node_count() || x.gene_count() != emis.genes ||
      x.time_count() != emis.time_points)
    throw std::invalid_argument("icm_cycle: dimension mismatch");
  SweepResult res;
  if (x.gene_count() > 0) res.min_score_gain = 0.0;
  for (GeneNetwork::NodeId g = 0; g < x.gene_count(); ++g) {
    const auto up =
        detail::viterbi_gene(g, emis.null_row(g), emis.de_row(g), x, net, phi);
    res.min_score_gain = std::min(res.min_score_gain, up.score_gain);
    for (std::size_t t = 0; t < x.time_count(); ++t) {
      if (x.at(g, t) != up.path[t]) {
        x.set(g, t, up.path[t]);
        ++res.flips;
      }
    }
  }
  return res;
}

namespace detail {

inline double rel_change(double now, double before) {
  return std::fabs(now - before) / std::max(std::fabs(before), 1e-8);
}

inline double max_rel_change(const MRFParams& phi, const GGParams& th,
                             const MRFParams& phi0, const GGParams& th0) {
  double r = rel_change(phi.gamma0, phi0.gamma0);
  r = std::max(r, rel_change(phi.beta0, phi0.beta0));
  r = std::max(r, rel_change(phi.gamma, phi0.gamma));
  r = std::max(r, rel_change(phi.beta1, phi0.beta1));
  r = std::max(r, rel_change(phi.beta2, phi0.beta2));
  r = std::max(r, rel_change(th.alpha, th0.alpha));
  r = std::max(r, rel_change(th.alpha0, th0.alpha0));
  r = std::max(r, rel_change(th.nu, th0.nu));
  return r;
}

}  // namespace detail

/// Full estimation run.  Deterministic: identical inputs and configuration
/// give a bit-identical result.
inline FitResult fit(const ExpressionData& data, const GeneNetwork& net,
                     const FitConfig& config = {}) {
  if (data.gene_count() != net.node_count())
    throw std::invalid_argument("fit: data genes != network nodes");
  if (!(config.epsilon > 0.0))
    throw std::invalid_argument("fit: epsilon must be positive");
  if (config.max_cycles < 1)
    throw std::invalid_argument("fit: max_cycles must be at least 1");

  const bool use_spatial = config.mode != FitMode::temporal_only;
  const bool use_temporal = config.mode != FitMode::spatial_only;

  const auto stats = SuffStats::from(data);

  FitResult res;
  res.states = init_states_ttest(data, config.ttest_alpha);

  MRFParams phi_prev;
  GGParams theta_prev;
  for (int cycle = 1; cycle <= config.max_cycles; ++cycle) {
    const auto phi_fit =
        fit_phi(res.states, net, use_spatial, use_temporal);
    const GGParams theta =
        (cycle == 1)
            ? fit_theta(stats, res.states, nullptr, config.seed)
            : fit_theta(stats, res.states, &theta_prev, config.seed);

    const auto emis = EmissionTable::make(stats, theta);
    const auto sweep = icm_cycle(emis, res.states, net, phi_fit.params);

    CycleRecord rec;
    rec.phi = phi_fit.params;
    rec.theta = theta;
    rec.pseudolik = log_pseudolikelihood(res.states, net, phi_fit.params);
    rec.flips = sweep.flips;
    rec.min_score_gain = sweep.min_score_gain;
    rec.clamp_warning = phi_fit.clamp_warning;
    rec.max_rel_change =
        (cycle == 1) ? std::numeric_limits<double>::infinity()
                     : detail::max_rel_change(phi_fit.params, theta, phi_prev,
                                              theta_prev);
    res.trace.push_back(rec);

    res.phi = phi_fit.params;
    res.theta = theta;
    phi_prev = phi_fit.params;
    theta_prev = theta;

    if (cycle > 1 && rec.max_rel_change < config.epsilon) {
      res.converged = true;
      break;
    }
  }
  res.cycles_used = static_cast<int>(res.trace.size());
  return res;
}

}  // namespace stmrf

#endif
