#ifndef STMRF_MRF_PRIOR_HPP
#define STMRF_MRF_PRIOR_HPP

/* Spatial-temporal Markov random field prior over binary DE states.
 *
 * At the first time point the states follow an auto-logistic field on the
 * gene network: conditional log odds of DE are
 *
 *   F1(g) = gamma0 + beta0 * sum_{g' ~ g} (2 x_{g'} - 1).
 *
 * Later time points evolve as a Markov chain whose transition is itself a
 * network field with one extra memory term:
 *
 *   F2(g, t) = gamma + beta1 * sum_{g' ~ g} (2 x_{g', t} - 1)
 *            + beta2 * (2 x_{g, t-1} - 1),
 *
 * i.e. the joint transition couples same-time neighbor agreement and
 * own-past agreement through XNOR potentials.  Parameters are estimated by
 * maximum pseudolikelihood, which reduces to two logistic regressions.
 */

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "stmrf/math.hpp"
#include "stmrf/network.hpp"
#include "stmrf/state_matrix.hpp"

namespace stmrf {

/// Prior parameters.  The interaction strengths beta0, beta1, beta2 are
/// non-negative (agreement is never penalized); the gammas are free.
struct MRFParams {
  double gamma0 = 0.0;
  double beta0 = 0.0;
  double gamma = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
};

inline int xnor(int a, int b) { return a == b ? 1 : 0; }

/// Sum of (2x - 1) over the neighbors of g in one time column.
inline double neighbor_signed_sum(const GeneNetwork& net,
                                  std::span<const std::uint8_t> column,
                                  GeneNetwork::NodeId g) {
  double s = 0.0;
  for (const auto h : net.neighbors(g))
    s += column[h] ? 1.0 : -1.0;
  return s;
}

/// First-time-point conditional field F1 for gene g.
inline double field_initial(const GeneNetwork& net,
                            std::span<const std::uint8_t> x0,
                            GeneNetwork::NodeId g, const MRFParams& phi) {
  return phi.gamma0 + phi.beta0 * neighbor_signed_sum(net, x0, g);
}

/// Transition conditional field F2 for gene g at a time point t >= 1.
inline double field_transition(const GeneNetwork& net,
                               std::span<const std::uint8_t> xt,
                               std::span<const std::uint8_t> xprev,
                               GeneNetwork::NodeId g, const MRFParams& phi) {
  return phi.gamma + phi.beta1 * neighbor_signed_sum(net, xt, g) +
         phi.beta2 * (xprev[g] ? 1.0 : -1.0);
}

/// Conditional probability of state x in {0, 1} given its field:
/// Pr(x | field) = exp(x * field) / (1 + exp(field)).
inline double conditional_prob(double field, std::uint8_t x) {
  return x ? sigmoid(field) : sigmoid(-field);
}

/// Log of conditional_prob, stable for large |field|.
inline double log_conditional_prob(double field, std::uint8_t x) {
  return x ? log_sigmoid(field) : log_sigmoid(-field);
}

/// Log pseudolikelihood of a full state matrix: the sum over every
/// (gene, time) of the log conditional given neighbors and own past.
inline double log_pseudolikelihood(const StateMatrix& x,
                                   const GeneNetwork& net,
                                   const MRFParams& phi) {
  if (x.gene_count() != net.node_count())
    throw std::invalid_argument("log_pseudolikelihood: dimension mismatch");
  const std::size_t p = x.gene_count();
  double total = 0.0;
  const auto x0 = x.column(0);
  for (GeneNetwork::NodeId g = 0; g < p; ++g)
    total += log_conditional_prob(field_initial(net, x0, g, phi), x0[g]);
  for (std::size_t t = 1; t < x.time_count(); ++t) {
    const auto xt = x.column(t);
    const auto xprev = x.column(t - 1);
    for (GeneNetwork::NodeId g = 0; g < p; ++g)
      total += log_conditional_prob(field_transition(net, xt, xprev, g, phi),
                                    xt[g]);
  }
  return total;
}

/// Result of a pseudolikelihood parameter fit.
struct PhiFit {
  MRFParams params;
  bool clamp_warning = false;  // a coefficient hit the +-30 rail
};

/// Maximum pseudolikelihood estimate of the prior parameters from a state
/// matrix: one logistic regression for the first time point (response
/// x_{g,0}, covariates 1 and the neighbor signed sum) and one pooled over
/// t >= 1 (covariates 1, neighbor signed sum, own previous signed state).
///
/// `use_spatial` / `use_temporal` exclude the corresponding covariates for
/// reduced models; excluded coefficients are reported as 0.  Negative
/// interaction estimates are clamped to 0 and the remaining columns refit.
inline PhiFit fit_phi(const StateMatrix& x, const GeneNetwork& net,
                      bool use_spatial = true, bool use_temporal = true) {
  if (x.gene_count() != net.node_count())
    throw std::invalid_argument("fit_phi: dimension mismatch");
  const std::size_t p = x.gene_count();
  const std::size_t tcount = x.time_count();
  PhiFit out;

  // Fits response ~ columns, honoring a non-negativity constraint on every
  // non-intercept column by clamp-to-zero-and-refit.
  const auto constrained_fit = [&out](std::vector<double>& design,
                                      std::size_t ncol,
                                      const std::vector<std::uint8_t>& resp) {
    const std::size_t nrow = resp.size();
    std::vector<bool> excluded(ncol, false);
    std::vector<double> coef(ncol, 0.0);
    for (;;) {
      std::size_t live = 0;
      for (std::size_t j = 0; j < ncol; ++j)
        if (!excluded[j]) ++live;
      std::vector<double> sub(nrow * live);
      for (std::size_t i = 0; i < nrow; ++i) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < ncol; ++j)
          if (!excluded[j]) sub[i * live + c++] = design[i * ncol + j];
      }
      const auto fit = logistic_irls(sub, nrow, live, resp);
      out.clamp_warning = out.clamp_warning || fit.clamped;

      bool refit = false;
      std::size_t c = 0;
      for (std::size_t j = 0; j < ncol; ++j) {
        if (excluded[j]) {
          coef[j] = 0.0;
          continue;
        }
        coef[j] = fit.coef[c++];
        if (j > 0 && coef[j] < 0.0) {
          excluded[j] = true;
          refit = true;
        }
      }
      if (!refit) return coef;
    }
  };

  {  // First time point: x_{g,0} ~ 1 + neighbor sum.
    const auto x0 = x.column(0);
    const std::size_t ncol = use_spatial ? 2 : 1;
    std::vector<double> design(p * ncol);
    std::vector<std::uint8_t> resp(p);
    for (GeneNetwork::NodeId g = 0; g < p; ++g) {
      design[g * ncol] = 1.0;
      if (use_spatial)
        design[g * ncol + 1] = neighbor_signed_sum(net, x0, g);
      resp[g] = x0[g];
    }
    const auto coef = constrained_fit(design, ncol, resp);
    out.params.gamma0 = coef[0];
    out.params.beta0 = use_spatial ? coef[1] : 0.0;
  }

  if (tcount > 1) {  // Transitions pooled over t >= 1.
    const std::size_t ncol = 1 + (use_spatial ? 1 : 0) + (use_temporal ? 1 : 0);
    const std::size_t nrow = p * (tcount - 1);
    std::vector<double> design(nrow * ncol);
    std::vector<std::uint8_t> resp(nrow);
    std::size_t row = 0;
    for (std::size_t t = 1; t < tcount; ++t) {
      const auto xt = x.column(t);
      const auto xprev = x.column(t - 1);
      for (GeneNetwork::NodeId g = 0; g < p; ++g, ++row) {
        std::size_t c = 0;
        design[row * ncol + c++] = 1.0;
        if (use_spatial)
          design[row * ncol + c++] = neighbor_signed_sum(net, xt, g);
        if (use_temporal)
          design[row * ncol + c++] = xprev[g] ? 1.0 : -1.0;
        resp[row] = xt[g];
      }
    }
    const auto coef = constrained_fit(design, ncol, resp);
    std::size_t c = 0;
    out.params.gamma = coef[c++];
    out.params.beta1 = use_spatial ? coef[c++] : 0.0;
    out.params.beta2 = use_temporal ? coef[c++] : 0.0;
  }
  return out;
}

/// Exact log probability of a state matrix under the prior, conditional on
/// the first time point: the product over t >= 1 of
///
///   Pr(x_t | x_{t-1}) = exp(U(x_t | x_{t-1})) / c_t,
///   U(z | w) = gamma sum_g z_g + beta1 sum_{(a,b) in E} xnor(z_a, z_b)
///            + beta2 sum_g xnor(z_g, w_g),
///
/// with c_t summed over all 2^p configurations.  Intended as a test oracle;
/// requires p <= 16.
inline double joint_log_prob_bruteforce(const StateMatrix& x,
                                        const GeneNetwork& net,
                                        const MRFParams& phi) {
  const std::size_t p = x.gene_count();
  if (p != net.node_count())
    throw std::invalid_argument("joint_log_prob_bruteforce: dim mismatch");
  if (p > 16)
    throw std::invalid_argument("joint_log_prob_bruteforce: p > 16");
  const auto edges = net.edges();

  const auto potential = [&](std::uint32_t z, std::uint32_t w) {
    double u = 0.0;
    for (std::size_t g = 0; g < p; ++g) {
      const int zg = (z >> g) & 1;
      u += phi.gamma * zg;
      u += phi.beta2 * xnor(zg, (w >> g) & 1);
    }
    for (const auto& [a, b] : edges)
      u += phi.beta1 * xnor((z >> a) & 1, (z >> b) & 1);
    return u;
  };

  const auto pack = [&](std::size_t t) {
    std::uint32_t bits = 0;
    for (std::size_t g = 0; g < p; ++g)
      if (x.at(g, t)) bits |= (1u << g);
    return bits;
  };

  const std::uint32_t configs = 1u << p;
  double total = 0.0;
  for (std::size_t t = 1; t < x.time_count(); ++t) {
    const std::uint32_t w = pack(t - 1);
    double log_c = -std::numeric_limits<double>::infinity();
    for (std::uint32_t z = 0; z < configs; ++z)
      log_c = log_sum_exp(log_c, potential(z, w));
    total += potential(pack(t), w) - log_c;
  }
  return total;
}

}  // namespace stmrf

#endif
