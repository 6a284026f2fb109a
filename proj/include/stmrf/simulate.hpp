#ifndef STMRF_SIMULATE_HPP
#define STMRF_SIMULATE_HPP

/* Synthetic data generators for the three dependency scenarios used in the
 * evaluation study, plus Gibbs machinery for sampling state columns from
 * the prior fields and a pathway-structured benchmark network builder.
 *
 * Scenarios:
 *   temporal        — independent per-gene two-state Markov chains;
 *   spatial         — per time point, a fresh uniform choice of DE pathways
 *                     smoothed by Gibbs sweeps of the initial field;
 *   spatiotemporal  — a pathway-level Markov chain drives which pathways
 *                     are DE, with per-time-point Gibbs smoothing.
 *
 * Observations are then drawn cell by cell from the Gamma-Gamma model.
 */

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "stmrf/gamma_gamma.hpp"
#include "stmrf/mrf_prior.hpp"
#include "stmrf/network.hpp"
#include "stmrf/rng.hpp"
#include "stmrf/state_matrix.hpp"

namespace stmrf {

enum class Scenario { temporal, spatial, spatiotemporal };

/// Knobs of the simulation scenarios, defaulted to the evaluation study's
/// settings: 6 time points, 3 replicates per condition, Theta=(10,0.9,0.5),
/// chain probabilities 0.1/0.7/0.1, field (-2, 2) with 5 sweeps.
struct ScenarioConfig {
  Scenario scenario = Scenario::temporal;
  std::size_t time_points = 6;
  std::size_t replicates_per_condition = 3;
  GGParams theta{10.0, 0.9, 0.5};

  // temporal scenario: per-gene chain
  double p_init_de = 0.1;
  double p_de_given_de = 0.7;
  double p_de_given_ee = 0.1;

  // spatial smoothing field
  double gamma0 = -2.0;
  double beta0 = 2.0;
  std::size_t gibbs_sweeps = 5;
  std::size_t pathways_initially_de = 9;  // 9 spatial, 8 spatiotemporal

  // spatiotemporal: pathway-level chain
  double p_path_de_given_de = 0.7;
  double p_path_de_given_ee = 0.1;

  std::uint64_t seed = 0;  // recorded in metadata; generators take an Rng

  void validate() const {
    const auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (time_points < 1 || replicates_per_condition < 1)
      throw std::invalid_argument("ScenarioConfig: counts must be positive");
    require_valid(theta, "ScenarioConfig");
    if (!prob(p_init_de) || !prob(p_de_given_de) || !prob(p_de_given_ee) ||
        !prob(p_path_de_given_de) || !prob(p_path_de_given_ee))
      throw std::invalid_argument("ScenarioConfig: probability outside [0,1]");
  }
};

/// Scenario defaults that differ between scenarios.
inline ScenarioConfig default_config(Scenario s) {
  ScenarioConfig cfg;
  cfg.scenario = s;
  cfg.pathways_initially_de = (s == Scenario::spatiotemporal) ? 8 : 9;
  return cfg;
}

struct SimResult {
  ExpressionData data;
  StateMatrix truth;
};

/// Zero-padded default gene labels g0001, g0002, ...
inline std::vector<std::string> default_gene_labels(std::size_t p) {
  std::size_t width = 1;
  for (std::size_t v = p; v >= 10; v /= 10) ++width;
  std::vector<std::string> labels;
  labels.reserve(p);
  for (std::size_t g = 1; g <= p; ++g) {
    std::ostringstream s;
    s << 'g' << std::setw(static_cast<int>(width)) << std::setfill('0') << g;
    labels.push_back(s.str());
  }
  return labels;
}

/// Draws the Gamma-Gamma observations for every cell of a state matrix
/// (gene-major, time-minor order).
inline ExpressionData draw_observations(const StateMatrix& truth,
                                        std::vector<std::string> labels,
                                        const GGParams& theta, std::size_t m,
                                        std::size_t n, Rng& rng) {
  if (labels.size() != truth.gene_count())
    throw std::invalid_argument("draw_observations: label count mismatch");
  ExpressionData data(std::move(labels), truth.time_count(), m, n);
  for (std::size_t g = 0; g < truth.gene_count(); ++g)
    for (std::size_t t = 0; t < truth.time_count(); ++t) {
      const auto y = sample_gene_obs(truth.at(g, t) != 0, theta, m, n, rng);
      for (std::size_t r = 0; r < m + n; ++r) data.set(g, t, r, y[r]);
    }
  return data;
}

/// Independent two-state Markov chains, one per gene.
inline SimResult simulate_temporal(const ScenarioConfig& cfg,
                                   std::vector<std::string> labels,
                                   Rng& rng) {
  cfg.validate();
  const std::size_t p = labels.size();
  if (p == 0) throw std::invalid_argument("simulate_temporal: no genes");
  StateMatrix truth(p, cfg.time_points, 0);
  for (std::size_t g = 0; g < p; ++g) {
    std::uint8_t x = rng.bernoulli(cfg.p_init_de) ? 1 : 0;
    truth.set(g, 0, x);
    for (std::size_t t = 1; t < cfg.time_points; ++t) {
      x = rng.bernoulli(x ? cfg.p_de_given_de : cfg.p_de_given_ee) ? 1 : 0;
      truth.set(g, t, x);
    }
  }
  auto data = draw_observations(truth, std::move(labels), cfg.theta,
                                cfg.replicates_per_condition,
                                cfg.replicates_per_condition, rng);
  return {std::move(data), std::move(truth)};
}

inline SimResult simulate_temporal(const ScenarioConfig& cfg, std::size_t p,
                                   Rng& rng) {
  return simulate_temporal(cfg, default_gene_labels(p), rng);
}

/// One full sequential Gibbs sweep of the initial field: every gene in
/// ascending order is redrawn from its conditional given the current
/// (partially updated) column.
inline void gibbs_sweep(const GeneNetwork& net, std::span<std::uint8_t> x,
                        double gamma0, double beta0, Rng& rng) {
  if (x.size() != net.node_count())
    throw std::invalid_argument("gibbs_sweep: column size mismatch");
  const MRFParams phi{gamma0, beta0, 0.0, 0.0, 0.0};
  for (GeneNetwork::NodeId g = 0; g < x.size(); ++g) {
    const double f = field_initial(net, x, g, phi);
    x[g] = rng.bernoulli(conditional_prob(f, 1)) ? 1 : 0;
  }
}

/// One full sequential Gibbs sweep of the transition field, with the
/// previous time point's column held fixed.
inline void gibbs_sweep_transition(const GeneNetwork& net,
                                   std::span<std::uint8_t> x,
                                   std::span<const std::uint8_t> xprev,
                                   double gamma, double beta1, double beta2,
                                   Rng& rng) {
  if (x.size() != net.node_count() || xprev.size() != x.size())
    throw std::invalid_argument("gibbs_sweep_transition: size mismatch");
  const MRFParams phi{0.0, 0.0, gamma, beta1, beta2};
  for (GeneNetwork::NodeId g = 0; g < x.size(); ++g) {
    const double f = field_transition(net, x, xprev, g, phi);
    x[g] = rng.bernoulli(conditional_prob(f, 1)) ? 1 : 0;
  }
}

namespace detail {

/// Sets a column to the DE-pathway membership indicator (union over the
/// chosen pathways), everything else EE.
inline void set_pathway_indicator(const GeneNetwork& net,
                                  const std::vector<std::uint8_t>& pathway_de,
                                  std::span<std::uint8_t> x) {
  std::fill(x.begin(), x.end(), 0);
  std::size_t k = 0;
  for (const auto& [name, members] : net.pathways()) {
    if (pathway_de[k++])
      for (const auto g : members) x[g] = 1;
  }
}

/// Uniform choice of `k` distinct pathways (indices into map order).
inline std::vector<std::uint8_t> choose_pathways(std::size_t count,
                                                 std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  rng.sample_prefix(idx, k);
  std::vector<std::uint8_t> de(count, 0);
  for (std::size_t i = 0; i < k; ++i) de[idx[i]] = 1;
  return de;
}

}  // namespace detail

/// Per time point: a fresh uniform choice of DE pathways, member genes set
/// DE, then `gibbs_sweeps` sweeps of the initial field.  Time points are
/// statistically independent.
inline SimResult simulate_spatial(const ScenarioConfig& cfg,
                                  const GeneNetwork& net, Rng& rng) {
  cfg.validate();
  const std::size_t n_path = net.pathways().size();
  if (n_path < cfg.pathways_initially_de)
    throw std::invalid_argument("simulate_spatial: fewer pathways than "
                                "pathways_initially_de");
  StateMatrix truth(net.node_count(), cfg.time_points, 0);
  for (std::size_t t = 0; t < cfg.time_points; ++t) {
    const auto de =
        detail::choose_pathways(n_path, cfg.pathways_initially_de, rng);
    auto col = truth.column(t);
    detail::set_pathway_indicator(net, de, col);
    for (std::size_t s = 0; s < cfg.gibbs_sweeps; ++s)
      gibbs_sweep(net, col, cfg.gamma0, cfg.beta0, rng);
  }
  auto data = draw_observations(truth, net.labels(), cfg.theta,
                                cfg.replicates_per_condition,
                                cfg.replicates_per_condition, rng);
  return {std::move(data), std::move(truth)};
}

/// A pathway-level Markov chain decides which pathways are DE at each time
/// point; member genes are set DE and smoothed by Gibbs sweeps.
inline SimResult simulate_spatiotemporal(const ScenarioConfig& cfg,
                                         const GeneNetwork& net, Rng& rng) {
  cfg.validate();
  const std::size_t n_path = net.pathways().size();
  if (n_path < cfg.pathways_initially_de)
    throw std::invalid_argument("simulate_spatiotemporal: fewer pathways "
                                "than pathways_initially_de");
  StateMatrix truth(net.node_count(), cfg.time_points, 0);
  auto de = detail::choose_pathways(n_path, cfg.pathways_initially_de, rng);
  for (std::size_t t = 0; t < cfg.time_points; ++t) {
    if (t > 0)
      for (auto& b : de)
        b = rng.bernoulli(b ? cfg.p_path_de_given_de : cfg.p_path_de_given_ee)
                ? 1
                : 0;
    auto col = truth.column(t);
    detail::set_pathway_indicator(net, de, col);
    for (std::size_t s = 0; s < cfg.gibbs_sweeps; ++s)
      gibbs_sweep(net, col, cfg.gamma0, cfg.beta0, rng);
  }
  auto data = draw_observations(truth, net.labels(), cfg.theta,
                                cfg.replicates_per_condition,
                                cfg.replicates_per_condition, rng);
  return {std::move(data), std::move(truth)};
}

/// Samples a full state matrix from the prior fields: the first column
/// starts from `init0` and relaxes under `sweeps0` initial-field sweeps;
/// each later column starts from its predecessor and relaxes under
/// `sweeps_t` transition-field sweeps with the predecessor held fixed
/// (valid Gibbs targeting of the transition law).
inline StateMatrix sample_prior_chain(const GeneNetwork& net,
                                      const MRFParams& phi,
                                      std::size_t time_points,
                                      std::span<const std::uint8_t> init0,
                                      std::size_t sweeps0,
                                      std::size_t sweeps_t, Rng& rng) {
  const std::size_t p = net.node_count();
  if (init0.size() != p)
    throw std::invalid_argument("sample_prior_chain: init column mismatch");
  StateMatrix x(p, time_points, 0);
  auto col0 = x.column(0);
  std::copy(init0.begin(), init0.end(), col0.begin());
  for (std::size_t s = 0; s < sweeps0; ++s)
    gibbs_sweep(net, col0, phi.gamma0, phi.beta0, rng);
  for (std::size_t t = 1; t < time_points; ++t) {
    auto prev = x.column(t - 1);
    auto col = x.column(t);
    std::copy(prev.begin(), prev.end(), col.begin());
    for (std::size_t s = 0; s < sweeps_t; ++s)
      gibbs_sweep_transition(net, col, prev, phi.gamma, phi.beta1, phi.beta2,
                             rng);
  }
  return x;
}

/// Builds a pathway-structured benchmark network: `p` genes partitioned
/// into `n_pathways` blocks, each pathway annotated with its block plus a
/// few borrowed genes (pathways overlap).  A fraction `isolated_frac` of
/// the genes stay pathway members but carry no edges at all — mirroring
/// curated pathway maps, where many member genes have only indirect
/// (compound-mediated) relations and end up isolated once those are
/// dropped.  Among the remaining genes, edges are drawn within pathways as
/// a random spanning tree plus random extra pairs until exactly
/// `target_edges` edges exist.  Defaults match the scale and degree
/// mixture of the regulatory network used in the evaluation study.
inline GeneNetwork make_benchmark_network(std::uint64_t seed,
                                          std::size_t p = 1668,
                                          std::size_t n_pathways = 33,
                                          std::size_t target_edges = 8011,
                                          std::size_t overlap = 5,
                                          double isolated_frac = 0.25) {
  if (p < 2 || n_pathways < 1 || n_pathways > p)
    throw std::invalid_argument("make_benchmark_network: bad shape");
  if (!(isolated_frac >= 0.0 && isolated_frac < 1.0))
    throw std::invalid_argument(
        "make_benchmark_network: isolated_frac outside [0, 1)");
  const auto n_isolated = static_cast<std::size_t>(
      std::llround(isolated_frac * static_cast<double>(p)));
  const std::size_t n_connected = p - n_isolated;
  if (target_edges > n_connected * (n_connected - 1) / 2)
    throw std::invalid_argument("make_benchmark_network: too many edges");

  Rng rng(seed);
  GeneNetwork net;
  for (const auto& lab : default_gene_labels(p)) net.add_node(lab);

  // Globally chosen edge-free genes; they keep their pathway annotations.
  std::vector<GeneNetwork::NodeId> ids(p);
  std::iota(ids.begin(), ids.end(), GeneNetwork::NodeId{0});
  rng.sample_prefix(ids, n_isolated);
  std::vector<std::uint8_t> isolated(p, 0);
  for (std::size_t i = 0; i < n_isolated; ++i) isolated[ids[i]] = 1;

  // Contiguous blocks of near-equal size, plus `overlap` borrowed genes.
  std::vector<std::vector<GeneNetwork::NodeId>> members(n_pathways);
  const std::size_t base = p / n_pathways, extra = p % n_pathways;
  std::size_t next = 0;
  for (std::size_t k = 0; k < n_pathways; ++k) {
    const std::size_t size = base + (k < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i)
      members[k].push_back(static_cast<GeneNetwork::NodeId>(next + i));
    const std::size_t block_begin = next;
    next += size;
    for (std::size_t b = 0; b < overlap && size < p; ++b) {
      for (;;) {
        const auto g = static_cast<GeneNetwork::NodeId>(rng.below(p));
        if (g >= block_begin && g < block_begin + size) continue;
        if (std::find(members[k].begin(), members[k].end(), g) !=
            members[k].end())
          continue;
        members[k].push_back(g);
        break;
      }
    }
  }

  const auto key = [p](GeneNetwork::NodeId a, GeneNetwork::NodeId b) {
    if (a > b) std::swap(a, b);
    return static_cast<std::uint64_t>(a) * p + b;
  };
  std::unordered_set<std::uint64_t> edge_set;
  std::vector<GeneNetwork::Edge> edge_list;
  const auto try_add = [&](GeneNetwork::NodeId a, GeneNetwork::NodeId b) {
    if (a == b) return false;
    if (!edge_set.insert(key(a, b)).second) return false;
    edge_list.emplace_back(std::min(a, b), std::max(a, b));
    return true;
  };

  // Random recursive tree over each pathway's edge-carrying genes keeps
  // them connected to their pathway.
  std::vector<std::vector<GeneNetwork::NodeId>> wired(n_pathways);
  std::vector<std::vector<GeneNetwork::NodeId>> endpoint_bag(n_pathways);
  for (std::size_t k = 0; k < n_pathways; ++k) {
    for (const auto g : members[k])
      if (!isolated[g]) wired[k].push_back(g);
    auto order = wired[k];
    rng.sample_prefix(order, order.size());
    for (std::size_t i = 1; i < order.size(); ++i) {
      const auto parent = order[rng.below(i)];
      if (try_add(order[i], parent)) {
        endpoint_bag[k].push_back(order[i]);
        endpoint_bag[k].push_back(parent);
      }
    }
  }

  // Top up with within-pathway pairs drawn degree-proportionally (both
  // endpoints from the bag of accumulated edge endpoints).  Extra edges
  // therefore concentrate on a few regulator hubs while many tree leaves
  // keep degree 1-2 — the hub-and-leaf degree mixture of curated
  // regulatory maps.  Fall back to global uniform pairs if a caller's
  // parameters exhaust the within-pathway pool.
  std::size_t stale = 0;
  while (edge_list.size() < target_edges) {
    const std::size_t k = rng.below(n_pathways);
    const auto& grp = wired[k];
    if (grp.size() < 2) {
      ++stale;
      continue;
    }
    auto& bag = endpoint_bag[k];
    const auto a = bag.empty() ? grp[rng.below(grp.size())]
                               : bag[rng.below(bag.size())];
    const auto b = bag.empty() ? grp[rng.below(grp.size())]
                               : bag[rng.below(bag.size())];
    if (try_add(a, b)) {
      bag.push_back(a);
      bag.push_back(b);
      stale = 0;
    } else if (++stale > 100000) {
      const auto u = ids[n_isolated + rng.below(n_connected)];
      const auto v = ids[n_isolated + rng.below(n_connected)];
      try_add(u, v);
    }
  }
  // Trees may overshoot tiny targets; trim random edges if so.
  while (edge_list.size() > target_edges) {
    const std::size_t i = rng.below(edge_list.size());
    edge_set.erase(key(edge_list[i].first, edge_list[i].second));
    edge_list[i] = edge_list.back();
    edge_list.pop_back();
  }

  for (const auto& [a, b] : edge_list) net.add_edge(a, b);
  std::size_t width = 1;
  for (std::size_t v = n_pathways; v >= 10; v /= 10) ++width;
  for (std::size_t k = 0; k < n_pathways; ++k) {
    std::ostringstream name;
    name << "path" << std::setw(static_cast<int>(width)) << std::setfill('0')
         << (k + 1);
    for (const auto g : members[k]) net.add_pathway_member(name.str(), g);
  }
  return net;
}

}  // namespace stmrf

#endif
