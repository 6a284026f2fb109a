#ifndef STMRF_NETWORK_HPP
#define STMRF_NETWORK_HPP

/* Undirected gene network with optional pathway (gene set) annotations.
 *
 * The graph is simple: no self loops, no parallel edges.  Neighbor lists
 * are kept sorted so iteration order — and therefore every downstream
 * computation — is deterministic.
 */

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stmrf/rng.hpp"

namespace stmrf {

class GeneNetwork {
public:
  using NodeId = std::uint32_t;
  using Edge = std::pair<NodeId, NodeId>;  // always first < second

  std::size_t node_count() const { return labels_.size(); }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (const auto& nb : adj_) twice += nb.size();
    return twice / 2;
  }

  const std::vector<std::string>& labels() const { return labels_; }

  const std::string& label(NodeId g) const { return labels_.at(g); }

  /// Index of a label, or npos when absent.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t find(const std::string& lab) const {
    const auto it = index_.find(lab);
    return it == index_.end() ? npos : it->second;
  }

  /// Adds a node if new; returns its index either way.
  NodeId add_node(const std::string& lab) {
    const auto it = index_.find(lab);
    if (it != index_.end()) return it->second;
    const auto id = static_cast<NodeId>(labels_.size());
    labels_.push_back(lab);
    adj_.emplace_back();
    index_.emplace(lab, id);
    return id;
  }

  /// Adds an undirected edge; self loops and duplicates are ignored.
  void add_edge(NodeId a, NodeId b) {
    if (a == b) return;
    check_node(a);
    check_node(b);
    if (has_edge(a, b)) return;
    insert_sorted(adj_[a], b);
    insert_sorted(adj_[b], a);
  }

  bool has_edge(NodeId a, NodeId b) const {
    check_node(a);
    check_node(b);
    const auto& nb = adj_[a];
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  const std::vector<NodeId>& neighbors(NodeId g) const {
    check_node(g);
    return adj_[g];
  }

  std::size_t degree(NodeId g) const { return neighbors(g).size(); }

  /// All edges as (min, max) pairs in ascending order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId a = 0; a < adj_.size(); ++a)
      for (const NodeId b : adj_[a])
        if (a < b) out.emplace_back(a, b);
    return out;
  }

  /// Pathway annotations: name -> sorted member node ids.
  const std::map<std::string, std::vector<NodeId>>& pathways() const {
    return pathways_;
  }

  void add_pathway_member(const std::string& pathway, NodeId g) {
    check_node(g);
    auto& members = pathways_[pathway];
    insert_sorted(members, g);
  }

  /// Checks structural invariants; throws std::logic_error on violation.
  void validate() const {
    for (NodeId a = 0; a < adj_.size(); ++a) {
      const auto& nb = adj_[a];
      if (!std::is_sorted(nb.begin(), nb.end()) ||
          std::adjacent_find(nb.begin(), nb.end()) != nb.end())
        throw std::logic_error("network: neighbor list not sorted/unique");
      for (const NodeId b : nb) {
        if (b == a) throw std::logic_error("network: self loop");
        if (b >= adj_.size()) throw std::logic_error("network: bad node id");
        const auto& back = adj_[b];
        if (!std::binary_search(back.begin(), back.end(), a))
          throw std::logic_error("network: asymmetric adjacency");
      }
    }
    for (const auto& [name, members] : pathways_) {
      if (!std::is_sorted(members.begin(), members.end()) ||
          std::adjacent_find(members.begin(), members.end()) != members.end())
        throw std::logic_error("network: pathway members not sorted/unique");
      for (const NodeId g : members)
        if (g >= adj_.size())
          throw std::logic_error("network: pathway member out of range");
    }
  }

private:
  static void insert_sorted(std::vector<NodeId>& v, NodeId x) {
    const auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  }

  void check_node(NodeId g) const {
    if (g >= adj_.size())
      throw std::out_of_range("network: node id out of range");
  }

  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::vector<NodeId>> adj_;
  std::map<std::string, std::vector<NodeId>> pathways_;
};

namespace detail {

/// Splits a line into tab-separated fields; a trailing '\r' is stripped.
inline std::vector<std::string> tsv_fields(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline bool skip_line(const std::string& line) {
  return line.empty() || line[0] == '#' ||
         (line.size() == 1 && line[0] == '\r');
}

[[noreturn]] inline void parse_fail(const std::string& what, std::size_t lineno,
                                    const std::string& detail) {
  std::ostringstream msg;
  msg << what << " line " << lineno << ": " << detail;
  throw std::runtime_error(msg.str());
}

}  // namespace detail

/// Reads a tab-separated edge list ("geneA\tgeneB"); '#' lines and blank
/// lines are skipped.  A self-referential pair registers the node without
/// creating an edge, so isolated nodes can be declared inline.
inline GeneNetwork load_edge_list(std::istream& in) {
  GeneNetwork net;
  std::string line;
  std::size_t lineno = 0;
  std::size_t used = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    const auto f = detail::tsv_fields(line);
    if (f.size() != 2)
      detail::parse_fail("edge list", lineno,
                         "expected 2 tab-separated fields, got " +
                             std::to_string(f.size()));
    if (f[0].empty() || f[1].empty())
      detail::parse_fail("edge list", lineno, "empty gene name");
    const auto a = net.add_node(f[0]);
    const auto b = net.add_node(f[1]);
    net.add_edge(a, b);
    ++used;
  }
  if (used == 0) throw std::runtime_error("edge list: no records");
  return net;
}

/// Reads one gene name per line, adding any new names as isolated nodes.
inline void load_node_list(GeneNetwork& net, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    const auto f = detail::tsv_fields(line);
    if (f.size() != 1 || f[0].empty())
      detail::parse_fail("node list", lineno, "expected a single gene name");
    net.add_node(f[0]);
  }
}

/// Reads pathway membership ("pathway_id\tgene_id").  Every gene must
/// already exist in the network.
inline void load_pathways(GeneNetwork& net, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    const auto f = detail::tsv_fields(line);
    if (f.size() != 2)
      detail::parse_fail("pathway file", lineno,
                         "expected 2 tab-separated fields, got " +
                             std::to_string(f.size()));
    if (f[0].empty() || f[1].empty())
      detail::parse_fail("pathway file", lineno, "empty field");
    const auto g = net.find(f[1]);
    if (g == GeneNetwork::npos)
      detail::parse_fail("pathway file", lineno,
                         "gene '" + f[1] + "' not present in the network");
    net.add_pathway_member(f[0], static_cast<GeneNetwork::NodeId>(g));
  }
}

/// Writes the edge list in canonical order (ascending node-id pairs).
inline void save_edge_list(const GeneNetwork& net, std::ostream& out) {
  for (const auto& [a, b] : net.edges())
    out << net.label(a) << '\t' << net.label(b) << '\n';
}

/// Writes one gene name per line in node order.
inline void save_node_list(const GeneNetwork& net, std::ostream& out) {
  for (const auto& lab : net.labels()) out << lab << '\n';
}

/// Writes pathway membership in canonical order.
inline void save_pathways(const GeneNetwork& net, std::ostream& out) {
  for (const auto& [name, members] : net.pathways())
    for (const auto g : members) out << name << '\t' << net.label(g) << '\n';
}

/// Random network misspecification: deletes round(delete_fraction * |E|)
/// edges without replacement, then adds exactly `add_count` new edges by
/// rejection sampling among node pairs absent from the current graph.
/// Nodes, labels, and pathway annotations are preserved.
inline GeneNetwork perturb_network(const GeneNetwork& net,
                                   double delete_fraction,
                                   std::size_t add_count,
                                   std::uint64_t seed) {
  if (!(delete_fraction >= 0.0 && delete_fraction <= 1.0))
    throw std::invalid_argument(
        "perturb_network: delete_fraction outside [0, 1]");
  const std::size_t p = net.node_count();
  auto edges = net.edges();
  const std::size_t n_edges = edges.size();
  const auto n_del = static_cast<std::size_t>(
      std::llround(delete_fraction * static_cast<double>(n_edges)));

  Rng rng(seed);
  rng.sample_prefix(edges, n_del);  // first n_del entries are the deletions
  std::vector<GeneNetwork::Edge> kept(edges.begin() + n_del, edges.end());

  const auto key = [p](GeneNetwork::NodeId a, GeneNetwork::NodeId b) {
    return static_cast<std::uint64_t>(a) * p + b;
  };
  // Additions are drawn from pairs absent in the *input* graph, so a deleted
  // edge can never sneak back in: the output keeps exactly |E| - n_del
  // original edges.
  std::unordered_set<std::uint64_t> present;
  present.reserve(n_edges + add_count);
  for (const auto& [a, b] : edges) present.insert(key(a, b));

  const std::size_t all_pairs = p * (p - 1) / 2;
  if (add_count > all_pairs - n_edges)
    throw std::invalid_argument(
        "perturb_network: add_count exceeds the number of absent pairs");

  std::size_t added = 0;
  while (added < add_count) {
    auto a = static_cast<GeneNetwork::NodeId>(rng.below(p));
    auto b = static_cast<GeneNetwork::NodeId>(rng.below(p));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!present.insert(key(a, b)).second) continue;
    kept.emplace_back(a, b);
    ++added;
  }

  GeneNetwork out;
  for (const auto& lab : net.labels()) out.add_node(lab);
  for (const auto& [a, b] : kept) out.add_edge(a, b);
  for (const auto& [name, members] : net.pathways())
    for (const auto g : members) out.add_pathway_member(name, g);
  return out;
}

}  // namespace stmrf

#endif
