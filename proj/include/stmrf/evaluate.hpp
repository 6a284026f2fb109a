#ifndef STMRF_EVALUATE_HPP
#define STMRF_EVALUATE_HPP

/* Per-time-point recovery metrics comparing an estimated state matrix
 * against the simulation truth: sensitivity (fraction of truly DE genes
 * called DE), specificity (fraction of truly EE genes left EE), and FDR
 * (fraction of DE calls that are false).
 */

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "stmrf/state_matrix.hpp"

namespace stmrf {

struct TimepointMetrics {
  std::size_t t = 0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double sensitivity = 1.0;
  double specificity = 1.0;
  double fdr = 0.0;
};

/// Confusion counts and ratios per time point.  Empty denominators use the
/// conventions: no truly DE genes → sensitivity 1, no truly EE genes →
/// specificity 1, no DE calls → FDR 0.
inline std::vector<TimepointMetrics> confusion_metrics(
    const StateMatrix& estimated, const StateMatrix& truth) {
  if (estimated.gene_count() != truth.gene_count() ||
      estimated.time_count() != truth.time_count())
    throw std::invalid_argument("confusion_metrics: dimension mismatch");
  std::vector<TimepointMetrics> out;
  out.reserve(truth.time_count());
  for (std::size_t t = 0; t < truth.time_count(); ++t) {
    TimepointMetrics mt;
    mt.t = t;
    for (std::size_t g = 0; g < truth.gene_count(); ++g) {
      const bool est = estimated.at(g, t) != 0;
      const bool tru = truth.at(g, t) != 0;
      if (est && tru) ++mt.tp;
      else if (est && !tru) ++mt.fp;
      else if (!est && tru) ++mt.fn;
      else ++mt.tn;
    }
    if (mt.tp + mt.fn > 0)
      mt.sensitivity =
          static_cast<double>(mt.tp) / static_cast<double>(mt.tp + mt.fn);
    if (mt.tn + mt.fp > 0)
      mt.specificity =
          static_cast<double>(mt.tn) / static_cast<double>(mt.tn + mt.fp);
    if (mt.tp + mt.fp > 0)
      mt.fdr = static_cast<double>(mt.fp) / static_cast<double>(mt.tp + mt.fp);
    out.push_back(mt);
  }
  return out;
}

/// Mean and standard error of one metric across replicates at one time
/// point (SE = sample SD / sqrt(R); 0 for a single replicate).
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

struct AggregateRow {
  std::size_t t = 0;
  MeanSe sen, spe, fdr;
};

namespace detail {

inline MeanSe mean_se(const std::vector<double>& v) {
  const auto r = static_cast<double>(v.size());
  double mean = 0.0;
  for (const double x : v) mean += x;
  mean /= r;
  MeanSe out{mean, 0.0};
  if (v.size() > 1) {
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    out.se = std::sqrt(ss / (r - 1.0)) / std::sqrt(r);
  }
  return out;
}

}  // namespace detail

/// Per-time-point mean and standard error over replicates.
inline std::vector<AggregateRow> aggregate_replicates(
    const std::vector<std::vector<TimepointMetrics>>& replicates) {
  if (replicates.empty())
    throw std::invalid_argument("aggregate_replicates: no replicates");
  const std::size_t tcount = replicates.front().size();
  for (const auto& rep : replicates)
    if (rep.size() != tcount)
      throw std::invalid_argument(
          "aggregate_replicates: unequal replicate lengths");
  std::vector<AggregateRow> out(tcount);
  std::vector<double> sen, spe, fdr;
  for (std::size_t t = 0; t < tcount; ++t) {
    sen.clear();
    spe.clear();
    fdr.clear();
    for (const auto& rep : replicates) {
      sen.push_back(rep[t].sensitivity);
      spe.push_back(rep[t].specificity);
      fdr.push_back(rep[t].fdr);
    }
    out[t].t = t;
    out[t].sen = detail::mean_se(sen);
    out[t].spe = detail::mean_se(spe);
    out[t].fdr = detail::mean_se(fdr);
  }
  return out;
}

}  // namespace stmrf

#endif
