#ifndef STMRF_IO_HPP
#define STMRF_IO_HPP

/* TSV serialization of the data structures that cross the CLI boundary:
 * long-format expression tables, state matrices, fitted parameters,
 * estimation traces, metrics, key-value metadata — plus a content digest
 * for run manifests.  Numeric output uses 6 significant digits.
 */

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stmrf/evaluate.hpp"
#include "stmrf/gamma_gamma.hpp"
#include "stmrf/inference.hpp"
#include "stmrf/network.hpp"
#include "stmrf/state_matrix.hpp"

namespace stmrf {

/// 6-significant-digit numeric formatting used by every TSV writer.
inline std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace detail {

inline double parse_positive_real(const std::string& s, const char* what,
                                  std::size_t lineno) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty() || errno == ERANGE ||
      !std::isfinite(v) || !(v > 0.0))
    parse_fail(what, lineno, "expected a positive number, got '" + s + "'");
  return v;
}

inline long parse_int(const std::string& s, const char* what,
                      std::size_t lineno) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || s.empty() || errno == ERANGE)
    parse_fail(what, lineno, "expected an integer, got '" + s + "'");
  return v;
}

}  // namespace detail

/// Writes the long-format expression table:
/// gene / time / group (1 or 2) / sample (1-based within group) / value.
inline void save_expression(const ExpressionData& data, std::ostream& out) {
  out << "gene\ttime\tgroup\tsample\tvalue\n";
  const std::size_t m = data.m(), n = data.n();
  for (std::size_t g = 0; g < data.gene_count(); ++g)
    for (std::size_t t = 0; t < data.time_count(); ++t) {
      const auto y = data.cell(g, t);
      for (std::size_t r = 0; r < m + n; ++r) {
        const std::size_t group = r < m ? 1 : 2;
        const std::size_t sample = r < m ? r + 1 : r - m + 1;
        out << data.gene_labels()[g] << '\t' << t << '\t' << group << '\t'
            << sample << '\t' << format_num(y[r]) << '\n';
      }
    }
}

/// Reads the long-format expression table, validating rectangularity:
/// every gene must carry every time point and every sample of both groups
/// exactly once.  Gene order follows first appearance.
inline ExpressionData load_expression(std::istream& in) {
  constexpr const char* kWhat = "expression table";
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw std::runtime_error("expression table: empty file");
  ++lineno;
  {
    const auto f = detail::tsv_fields(line);
    if (f != std::vector<std::string>{"gene", "time", "group", "sample",
                                      "value"})
      detail::parse_fail(kWhat, lineno,
                         "expected header gene/time/group/sample/value");
  }

  struct Record {
    std::size_t gene, t, group, sample;
    double value;
  };
  std::vector<Record> records;
  std::vector<std::string> genes;
  std::unordered_map<std::string, std::size_t> gene_index;
  std::size_t max_t = 0, max_m = 0, max_n = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    const auto f = detail::tsv_fields(line);
    if (f.size() != 5)
      detail::parse_fail(kWhat, lineno,
                         "expected 5 tab-separated fields, got " +
                             std::to_string(f.size()));
    Record r;
    const auto it = gene_index.find(f[0]);
    if (it == gene_index.end()) {
      r.gene = genes.size();
      gene_index.emplace(f[0], r.gene);
      genes.push_back(f[0]);
    } else {
      r.gene = it->second;
    }
    const long t = detail::parse_int(f[1], kWhat, lineno);
    const long grp = detail::parse_int(f[2], kWhat, lineno);
    const long smp = detail::parse_int(f[3], kWhat, lineno);
    if (t < 0) detail::parse_fail(kWhat, lineno, "negative time index");
    if (grp != 1 && grp != 2)
      detail::parse_fail(kWhat, lineno, "group must be 1 or 2");
    if (smp < 1) detail::parse_fail(kWhat, lineno, "sample must be >= 1");
    r.t = static_cast<std::size_t>(t);
    r.group = static_cast<std::size_t>(grp);
    r.sample = static_cast<std::size_t>(smp);
    r.value = detail::parse_positive_real(f[4], kWhat, lineno);
    max_t = std::max(max_t, r.t);
    if (r.group == 1)
      max_m = std::max(max_m, r.sample);
    else
      max_n = std::max(max_n, r.sample);
    records.push_back(r);
  }
  if (records.empty()) throw std::runtime_error("expression table: no data rows");
  if (max_m == 0 || max_n == 0)
    throw std::runtime_error("expression table: a condition has no samples");

  const std::size_t tcount = max_t + 1;
  const std::size_t width = max_m + max_n;
  ExpressionData data(genes, tcount, max_m, max_n);
  std::vector<std::uint8_t> seen(genes.size() * tcount * width, 0);
  for (const auto& r : records) {
    const std::size_t col =
        (r.group == 1 ? r.sample - 1 : max_m + r.sample - 1);
    const std::size_t slot = (r.gene * tcount + r.t) * width + col;
    if (seen[slot])
      throw std::runtime_error(
          "expression table: duplicate record for gene '" + genes[r.gene] +
          "' t=" + std::to_string(r.t));
    seen[slot] = 1;
    data.set(r.gene, r.t, col, r.value);
  }
  for (std::size_t g = 0; g < genes.size(); ++g)
    for (std::size_t t = 0; t < tcount; ++t)
      for (std::size_t c = 0; c < width; ++c)
        if (!seen[(g * tcount + t) * width + c])
          throw std::runtime_error(
              "expression table: gene '" + genes[g] + "' is missing t=" +
              std::to_string(t) + " sample " + std::to_string(c + 1) +
              " (table must be rectangular)");
  return data;
}

/// Writes a state matrix: gene label then one 0/1 column per time point.
inline void save_states(const StateMatrix& x,
                        const std::vector<std::string>& labels,
                        std::ostream& out) {
  if (labels.size() != x.gene_count())
    throw std::invalid_argument("save_states: label count mismatch");
  out << "gene";
  for (std::size_t t = 0; t < x.time_count(); ++t) out << "\tt" << t;
  out << '\n';
  for (std::size_t g = 0; g < x.gene_count(); ++g) {
    out << labels[g];
    for (std::size_t t = 0; t < x.time_count(); ++t)
      out << '\t' << static_cast<int>(x.at(g, t));
    out << '\n';
  }
}

struct LabeledStates {
  std::vector<std::string> labels;
  StateMatrix states;
};

inline LabeledStates load_states(std::istream& in) {
  constexpr const char* kWhat = "states table";
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line))
    throw std::runtime_error("states table: empty file");
  ++lineno;
  const auto header = detail::tsv_fields(line);
  if (header.size() < 2 || header[0] != "gene")
    detail::parse_fail(kWhat, lineno, "expected header gene\\tt0\\t...");
  for (std::size_t t = 0; t + 1 < header.size(); ++t)
    if (header[t + 1] != "t" + std::to_string(t))
      detail::parse_fail(kWhat, lineno, "unexpected column '" + header[t + 1] +
                                            "'");
  const std::size_t tcount = header.size() - 1;

  std::vector<std::string> labels;
  std::vector<std::uint8_t> bits;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    const auto f = detail::tsv_fields(line);
    if (f.size() != tcount + 1)
      detail::parse_fail(kWhat, lineno, "wrong field count");
    labels.push_back(f[0]);
    for (std::size_t t = 0; t < tcount; ++t) {
      if (f[t + 1] != "0" && f[t + 1] != "1")
        detail::parse_fail(kWhat, lineno, "state must be 0 or 1");
      bits.push_back(f[t + 1] == "1" ? 1 : 0);
    }
  }
  if (labels.empty()) throw std::runtime_error("states table: no rows");
  StateMatrix x(labels.size(), tcount, 0);
  for (std::size_t g = 0; g < labels.size(); ++g)
    for (std::size_t t = 0; t < tcount; ++t)
      x.set(g, t, bits[g * tcount + t]);
  return {std::move(labels), std::move(x)};
}

/// Fitted parameters, one `name<TAB>value` row each.
inline void save_params(const MRFParams& phi, const GGParams& theta,
                        std::ostream& out) {
  out << "gamma0\t" << format_num(phi.gamma0) << '\n'
      << "beta0\t" << format_num(phi.beta0) << '\n'
      << "gamma\t" << format_num(phi.gamma) << '\n'
      << "beta1\t" << format_num(phi.beta1) << '\n'
      << "beta2\t" << format_num(phi.beta2) << '\n'
      << "alpha\t" << format_num(theta.alpha) << '\n'
      << "alpha0\t" << format_num(theta.alpha0) << '\n'
      << "nu\t" << format_num(theta.nu) << '\n';
}

/// Per-cycle estimation trace.
inline void save_trace(const std::vector<CycleRecord>& trace,
                       std::ostream& out) {
  out << "cycle\tgamma0\tbeta0\tgamma\tbeta1\tbeta2\talpha\talpha0\tnu\t"
         "pseudolik\tflips\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    out << (i + 1) << '\t' << format_num(r.phi.gamma0) << '\t'
        << format_num(r.phi.beta0) << '\t' << format_num(r.phi.gamma) << '\t'
        << format_num(r.phi.beta1) << '\t' << format_num(r.phi.beta2) << '\t'
        << format_num(r.theta.alpha) << '\t' << format_num(r.theta.alpha0)
        << '\t' << format_num(r.theta.nu) << '\t' << format_num(r.pseudolik)
        << '\t' << r.flips << '\n';
  }
}

/// Per-replicate, per-time-point metrics rows.
inline void save_metrics(
    const std::vector<std::vector<TimepointMetrics>>& replicates,
    std::ostream& out) {
  out << "replicate\tt\tsen\tspe\tfdr\ttp\tfp\ttn\tfn\n";
  for (std::size_t rep = 0; rep < replicates.size(); ++rep)
    for (const auto& mt : replicates[rep])
      out << rep << '\t' << mt.t << '\t' << format_num(mt.sensitivity) << '\t'
          << format_num(mt.specificity) << '\t' << format_num(mt.fdr) << '\t'
          << mt.tp << '\t' << mt.fp << '\t' << mt.tn << '\t' << mt.fn << '\n';
}

inline void save_aggregate(const std::vector<AggregateRow>& rows,
                           std::ostream& out) {
  out << "t\tsen_mean\tsen_se\tspe_mean\tspe_se\tfdr_mean\tfdr_se\n";
  for (const auto& r : rows)
    out << r.t << '\t' << format_num(r.sen.mean) << '\t'
        << format_num(r.sen.se) << '\t' << format_num(r.spe.mean) << '\t'
        << format_num(r.spe.se) << '\t' << format_num(r.fdr.mean) << '\t'
        << format_num(r.fdr.se) << '\n';
}

/// Key-value run metadata.
inline void save_metadata(
    const std::vector<std::pair<std::string, std::string>>& kv,
    std::ostream& out) {
  for (const auto& [k, v] : kv) out << k << '\t' << v << '\n';
}

/// FNV-1a 64-bit digest of a byte string (for input manifests).
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::string file_digest(const std::string& path) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file(path))));
  return buf;
}

}  // namespace stmrf

#endif
