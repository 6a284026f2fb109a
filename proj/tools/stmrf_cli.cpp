/* Command-line front end: simulation, fitting, evaluation, network
 * perturbation, and benchmark-network generation as reproducible runs.
 *
 * Exit codes: 0 success, 1 I/O or validation failure, 2 usage error,
 * 3 estimation stopped at max-cycles without converging.
 */

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "stmrf/stmrf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Error carrying an explicit process exit code.
struct CmdError : std::runtime_error {
  int code;
  CmdError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CmdError(1, "cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CmdError(1, "cannot open '" + path + "'");
  return in;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw CmdError(1, "write failed in '" + dir.string() + "'");
}

json input_entry(const std::string& path) {
  return json{{"path", path}, {"digest", stmrf::file_digest(path)}};
}

std::string rep_dir_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "rep%03zu", i);
  return buf;
}

/// Runs fn(0..count-1) on `jobs` worker threads; first exception wins.
void run_parallel(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

stmrf::GeneNetwork load_network_files(const std::string& edge_path,
                                      const std::string& node_path,
                                      const std::string& pathway_path) {
  auto edges = open_in(edge_path);
  auto net = stmrf::load_edge_list(edges);
  if (!node_path.empty()) {
    auto nodes = open_in(node_path);
    stmrf::load_node_list(net, nodes);
  }
  if (!pathway_path.empty()) {
    auto pw = open_in(pathway_path);
    stmrf::load_pathways(net, pw);
  }
  net.validate();
  return net;
}

stmrf::GGParams parse_theta(const std::string& spec) {
  stmrf::GGParams th;
  char extra;
  if (std::sscanf(spec.c_str(), "%lf,%lf,%lf%c", &th.alpha, &th.alpha0,
                  &th.nu, &extra) != 3 ||
      !th.valid())
    throw CmdError(2, "--theta expects three positive numbers a,a0,nu");
  return th;
}

json theta_json(const stmrf::GGParams& th) {
  return json{{"alpha", th.alpha}, {"alpha0", th.alpha0}, {"nu", th.nu}};
}

json phi_json(const stmrf::MRFParams& phi) {
  return json{{"gamma0", phi.gamma0},
              {"beta0", phi.beta0},
              {"gamma", phi.gamma},
              {"beta1", phi.beta1},
              {"beta2", phi.beta2}};
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scenario;
  std::string network;
  std::string nodes;
  std::string pathways;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t timepoints = 6;
  std::size_t reps = 3;
  std::string theta = "10,0.9,0.5";
  double p_init_de = 0.1, p_de_de = 0.7, p_de_ee = 0.1;
  double gamma0 = -2.0, beta0 = 2.0;
  std::size_t gibbs_sweeps = 5;
  std::size_t de_pathways = 0;  // 0 = scenario default (9 or 8)
  double p_path_de_de = 0.7, p_path_de_ee = 0.1;
  std::size_t replicates = 1;
  std::size_t jobs = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  const stmrf::Scenario scen =
      a.scenario == "temporal"  ? stmrf::Scenario::temporal
      : a.scenario == "spatial" ? stmrf::Scenario::spatial
                                : stmrf::Scenario::spatiotemporal;
  auto cfg = stmrf::default_config(scen);
  cfg.time_points = a.timepoints;
  cfg.replicates_per_condition = a.reps;
  cfg.theta = parse_theta(a.theta);
  cfg.p_init_de = a.p_init_de;
  cfg.p_de_given_de = a.p_de_de;
  cfg.p_de_given_ee = a.p_de_ee;
  cfg.gamma0 = a.gamma0;
  cfg.beta0 = a.beta0;
  cfg.gibbs_sweeps = a.gibbs_sweeps;
  if (a.de_pathways > 0) cfg.pathways_initially_de = a.de_pathways;
  cfg.p_path_de_given_de = a.p_path_de_de;
  cfg.p_path_de_given_ee = a.p_path_de_ee;
  cfg.seed = a.seed;
  cfg.validate();

  const bool needs_pathways = scen != stmrf::Scenario::temporal;
  if (needs_pathways && a.pathways.empty())
    throw CmdError(2, "--pathways is required for scenario '" + a.scenario +
                          "'");
  const auto net = load_network_files(a.network, a.nodes, a.pathways);

  json manifest{
      {"artifact_version", stmrf::kVersion},
      {"command", "simulate"},
      {"seed", a.seed},
      {"config",
       {{"scenario", a.scenario},
        {"timepoints", a.timepoints},
        {"reps", a.reps},
        {"theta", theta_json(cfg.theta)},
        {"p_init_de", cfg.p_init_de},
        {"p_de_given_de", cfg.p_de_given_de},
        {"p_de_given_ee", cfg.p_de_given_ee},
        {"gamma0", cfg.gamma0},
        {"beta0", cfg.beta0},
        {"gibbs_sweeps", cfg.gibbs_sweeps},
        {"pathways_initially_de", cfg.pathways_initially_de},
        {"p_path_de_given_de", cfg.p_path_de_given_de},
        {"p_path_de_given_ee", cfg.p_path_de_given_ee},
        {"gibbs_update", "sequential"},
        {"replicates", a.replicates},
        {"jobs", a.jobs}}},
      {"inputs", json::object()}};
  manifest["inputs"]["network"] = input_entry(a.network);
  if (!a.pathways.empty())
    manifest["inputs"]["pathways"] = input_entry(a.pathways);

  const auto write_one = [&](const fs::path& dir, std::uint64_t seed,
                             const json& rep_manifest) {
    fs::create_directories(dir);
    stmrf::Rng rng(seed);
    stmrf::SimResult sim =
        scen == stmrf::Scenario::temporal
            ? stmrf::simulate_temporal(cfg, net.labels(), rng)
        : scen == stmrf::Scenario::spatial
            ? stmrf::simulate_spatial(cfg, net, rng)
            : stmrf::simulate_spatiotemporal(cfg, net, rng);
    {
      auto out = open_out(dir / "expression.tsv");
      stmrf::save_expression(sim.data, out);
    }
    {
      auto out = open_out(dir / "truth.tsv");
      stmrf::save_states(sim.truth, sim.data.gene_labels(), out);
    }
    {
      auto out = open_out(dir / "metadata.tsv");
      std::vector<std::pair<std::string, std::string>> kv{
          {"scenario", a.scenario},
          {"seed", std::to_string(seed)},
          {"time_points", std::to_string(cfg.time_points)},
          {"replicates_per_condition",
           std::to_string(cfg.replicates_per_condition)},
          {"theta_alpha", stmrf::format_num(cfg.theta.alpha)},
          {"theta_alpha0", stmrf::format_num(cfg.theta.alpha0)},
          {"theta_nu", stmrf::format_num(cfg.theta.nu)},
          {"p_init_de", stmrf::format_num(cfg.p_init_de)},
          {"p_de_given_de", stmrf::format_num(cfg.p_de_given_de)},
          {"p_de_given_ee", stmrf::format_num(cfg.p_de_given_ee)},
          {"gamma0", stmrf::format_num(cfg.gamma0)},
          {"beta0", stmrf::format_num(cfg.beta0)},
          {"gibbs_sweeps", std::to_string(cfg.gibbs_sweeps)},
          {"pathways_initially_de",
           std::to_string(cfg.pathways_initially_de)},
          {"p_path_de_given_de", stmrf::format_num(cfg.p_path_de_given_de)},
          {"p_path_de_given_ee", stmrf::format_num(cfg.p_path_de_given_ee)},
          {"gibbs_update", "sequential"}};
      stmrf::save_metadata(kv, out);
    }
    write_manifest(dir, rep_manifest);
  };

  if (a.replicates <= 1) {
    write_one(a.out, a.seed, manifest);
  } else {
    fs::create_directories(a.out);
    write_manifest(a.out, manifest);
    stmrf::Rng base(a.seed);
    run_parallel(a.replicates, a.jobs, [&](std::size_t i) {
      json rep = manifest;
      rep["replicate"] = i;
      const std::uint64_t rep_seed = base.substream(i).seed();
      rep["seed"] = rep_seed;
      write_one(fs::path(a.out) / rep_dir_name(i), rep_seed, rep);
    });
  }
  return 0;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string expr;
  std::string network;
  std::string nodes;
  std::string mode = "full";
  double epsilon = 0.01;
  int max_cycles = 50;
  double ttest_alpha = 0.05;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t replicates = 1;
  std::size_t jobs = 1;
};

/// Reorders expression rows to network node order, adding expression-only
/// genes to the network as isolated nodes (with a warning) and rejecting
/// network-only genes.
stmrf::ExpressionData align_expression(const stmrf::ExpressionData& raw,
                                       stmrf::GeneNetwork& net) {
  std::size_t added = 0;
  for (const auto& lab : raw.gene_labels())
    if (net.find(lab) == stmrf::GeneNetwork::npos) {
      net.add_node(lab);
      ++added;
    }
  if (added > 0)
    std::cerr << "warning: " << added
              << " expression gene(s) absent from the network were added "
                 "as isolated nodes\n";

  std::vector<std::string> missing;
  for (const auto& lab : net.labels()) {
    bool found = false;
    for (const auto& dl : raw.gene_labels())
      if (dl == lab) {
        found = true;
        break;
      }
    if (!found) missing.push_back(lab);
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "network genes missing from the expression table ("
        << missing.size() << "):";
    for (std::size_t i = 0; i < missing.size() && i < 25; ++i)
      msg << ' ' << missing[i];
    if (missing.size() > 25) msg << " ...";
    throw CmdError(1, msg.str());
  }

  // Index raw genes once, then copy cells in network order.
  std::unordered_map<std::string, std::size_t> raw_index;
  for (std::size_t g = 0; g < raw.gene_labels().size(); ++g)
    raw_index.emplace(raw.gene_labels()[g], g);
  stmrf::ExpressionData data(net.labels(), raw.time_count(), raw.m(),
                             raw.n());
  for (std::size_t g = 0; g < net.labels().size(); ++g) {
    const std::size_t src = raw_index.at(net.labels()[g]);
    for (std::size_t t = 0; t < raw.time_count(); ++t) {
      const auto y = raw.cell(src, t);
      for (std::size_t r = 0; r < y.size(); ++r) data.set(g, t, r, y[r]);
    }
  }
  return data;
}

int cmd_fit(const FitArgs& a) {
  stmrf::FitConfig config;
  config.mode = a.mode == "hmm"    ? stmrf::FitMode::temporal_only
                : a.mode == "hmrf" ? stmrf::FitMode::spatial_only
                                   : stmrf::FitMode::full;
  config.epsilon = a.epsilon;
  config.max_cycles = a.max_cycles;
  config.ttest_alpha = a.ttest_alpha;
  config.seed = a.seed;

  json manifest{{"artifact_version", stmrf::kVersion},
                {"command", "fit"},
                {"seed", a.seed},
                {"config",
                 {{"mode", a.mode},
                  {"epsilon", a.epsilon},
                  {"max_cycles", a.max_cycles},
                  {"ttest_alpha", a.ttest_alpha},
                  {"replicates", a.replicates},
                  {"jobs", a.jobs}}},
                {"inputs", json::object()}};
  manifest["inputs"]["network"] = input_entry(a.network);
  if (!a.nodes.empty()) manifest["inputs"]["nodes"] = input_entry(a.nodes);

  std::atomic<bool> all_converged{true};

  const auto fit_one = [&](const std::string& expr_path, const fs::path& dir,
                           json rep_manifest) {
    auto net = load_network_files(a.network, a.nodes, "");
    auto expr_in = open_in(expr_path);
    const auto raw = stmrf::load_expression(expr_in);
    const auto data = align_expression(raw, net);

    const auto result = stmrf::fit(data, net, config);
    if (!result.converged) all_converged = false;

    fs::create_directories(dir);
    {
      auto out = open_out(dir / "states.tsv");
      stmrf::save_states(result.states, data.gene_labels(), out);
    }
    {
      auto out = open_out(dir / "params.tsv");
      stmrf::save_params(result.phi, result.theta, out);
    }
    {
      auto out = open_out(dir / "trace.tsv");
      stmrf::save_trace(result.trace, out);
    }
    rep_manifest["inputs"]["expression"] = input_entry(expr_path);
    rep_manifest["result"] = {
        {"converged", result.converged},
        {"cycles", result.cycles_used},
        {"phi", phi_json(result.phi)},
        {"theta", theta_json(result.theta)},
        {"clamp_warning", result.trace.back().clamp_warning}};
    write_manifest(dir, rep_manifest);
  };

  if (a.replicates <= 1) {
    fit_one(a.expr, a.out, manifest);
  } else {
    fs::create_directories(a.out);
    write_manifest(a.out, manifest);
    run_parallel(a.replicates, a.jobs, [&](std::size_t i) {
      json rep = manifest;
      rep["replicate"] = i;
      const auto sub = rep_dir_name(i);
      fit_one((fs::path(a.expr) / sub / "expression.tsv").string(),
              fs::path(a.out) / sub, rep);
    });
  }
  return all_converged ? 0 : 3;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> est;
  std::vector<std::string> truth;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  if (a.est.size() != a.truth.size())
    throw CmdError(2, "--est and --truth must be given equally often");

  json manifest{{"artifact_version", stmrf::kVersion},
                {"command", "eval"},
                {"inputs", json::object()}};
  std::vector<std::vector<stmrf::TimepointMetrics>> reps;
  for (std::size_t i = 0; i < a.est.size(); ++i) {
    auto est_in = open_in(a.est[i]);
    const auto est = stmrf::load_states(est_in);
    auto truth_in = open_in(a.truth[i]);
    const auto truth = stmrf::load_states(truth_in);

    if (est.states.time_count() != truth.states.time_count())
      throw CmdError(1, "time-point count mismatch between '" + a.est[i] +
                            "' and '" + a.truth[i] + "'");
    // Align truth rows to the estimate's gene order by label.
    std::unordered_map<std::string, std::size_t> truth_index;
    for (std::size_t g = 0; g < truth.labels.size(); ++g)
      truth_index.emplace(truth.labels[g], g);
    if (truth.labels.size() != est.labels.size())
      throw CmdError(1, "gene set mismatch between '" + a.est[i] + "' and '" +
                            a.truth[i] + "'");
    stmrf::StateMatrix truth_aligned(est.states.gene_count(),
                                     est.states.time_count(), 0);
    for (std::size_t g = 0; g < est.labels.size(); ++g) {
      const auto it = truth_index.find(est.labels[g]);
      if (it == truth_index.end())
        throw CmdError(1, "gene '" + est.labels[g] + "' missing from '" +
                              a.truth[i] + "'");
      for (std::size_t t = 0; t < est.states.time_count(); ++t)
        truth_aligned.set(g, t, truth.states.at(it->second, t));
    }
    reps.push_back(stmrf::confusion_metrics(est.states, truth_aligned));
    manifest["inputs"]["est_" + std::to_string(i)] = input_entry(a.est[i]);
    manifest["inputs"]["truth_" + std::to_string(i)] =
        input_entry(a.truth[i]);
  }

  fs::create_directories(a.out);
  {
    auto out = open_out(fs::path(a.out) / "metrics.tsv");
    stmrf::save_metrics(reps, out);
  }
  {
    auto out = open_out(fs::path(a.out) / "aggregate.tsv");
    stmrf::save_aggregate(stmrf::aggregate_replicates(reps), out);
  }
  write_manifest(a.out, manifest);
  return 0;
}

// ----------------------------------------------------------------- perturb

struct PerturbArgs {
  std::string network;
  std::string nodes;
  double del_frac = 0.0;
  std::size_t add_count = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_perturb(const PerturbArgs& a) {
  auto net = load_network_files(a.network, a.nodes, "");
  const auto perturbed =
      stmrf::perturb_network(net, a.del_frac, a.add_count, a.seed);
  const fs::path out_path(a.out);
  if (out_path.has_parent_path())
    fs::create_directories(out_path.parent_path());
  {
    auto out = open_out(out_path);
    stmrf::save_edge_list(perturbed, out);
  }
  json manifest{{"artifact_version", stmrf::kVersion},
                {"command", "perturb"},
                {"seed", a.seed},
                {"config",
                 {{"del_frac", a.del_frac},
                  {"add_count", a.add_count},
                  {"edges_in", net.edge_count()},
                  {"edges_out", perturbed.edge_count()}}},
                {"inputs", {{"network", input_entry(a.network)}}}};
  auto mout = open_out(out_path.string() + ".manifest.json");
  mout << manifest.dump(2) << '\n';
  return 0;
}

// ------------------------------------------------------------ make-network

struct MakeNetworkArgs {
  std::uint64_t seed = 1;
  std::size_t nodes = 1668;
  std::size_t pathways = 33;
  std::size_t edges = 8011;
  std::size_t overlap = 5;
  double isolated_frac = 0.25;
  std::string out;
};

int cmd_make_network(const MakeNetworkArgs& a) {
  const auto net = stmrf::make_benchmark_network(
      a.seed, a.nodes, a.pathways, a.edges, a.overlap, a.isolated_frac);
  fs::create_directories(a.out);
  {
    auto out = open_out(fs::path(a.out) / "network.tsv");
    stmrf::save_edge_list(net, out);
  }
  {
    auto out = open_out(fs::path(a.out) / "nodes.tsv");
    stmrf::save_node_list(net, out);
  }
  {
    auto out = open_out(fs::path(a.out) / "pathways.tsv");
    stmrf::save_pathways(net, out);
  }
  json manifest{{"artifact_version", stmrf::kVersion},
                {"command", "make-network"},
                {"seed", a.seed},
                {"config",
                 {{"nodes", a.nodes},
                  {"pathways", a.pathways},
                  {"edges", a.edges},
                  {"overlap", a.overlap},
                  {"isolated_frac", a.isolated_frac}}},
                {"inputs", json::object()}};
  write_manifest(a.out, manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-temporal MRF differential expression toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate",
                               "Generate a synthetic labeled dataset");
  s->add_option("--scenario", sim.scenario, "Dependency scenario")
      ->required()
      ->check(CLI::IsMember({"temporal", "spatial", "spatiotemporal"}));
  s->add_option("--network", sim.network, "Edge-list TSV")->required();
  s->add_option("--nodes", sim.nodes, "Optional isolated-node list");
  s->add_option("--pathways", sim.pathways,
                "Pathway membership TSV (required for spatial scenarios)");
  s->add_option("--seed", sim.seed, "Random seed");
  s->add_option("--out", sim.out, "Output directory")->required();
  s->add_option("--timepoints", sim.timepoints, "Time points (default 6)")
      ->check(CLI::PositiveNumber);
  s->add_option("--reps", sim.reps,
                "Replicates per condition (default 3)")
      ->check(CLI::PositiveNumber);
  s->add_option("--theta", sim.theta,
                "Observation parameters alpha,alpha0,nu");
  s->add_option("--p-init-de", sim.p_init_de, "Initial DE probability")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--p-de-de", sim.p_de_de, "Pr(DE_t | DE_{t-1})")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--p-de-ee", sim.p_de_ee, "Pr(DE_t | EE_{t-1})")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--gamma0", sim.gamma0, "Initial-field intercept");
  s->add_option("--beta0", sim.beta0, "Initial-field coupling");
  s->add_option("--gibbs-sweeps", sim.gibbs_sweeps,
                "Smoothing sweeps per time point (default 5)");
  s->add_option("--de-pathways", sim.de_pathways,
                "Initially DE pathways (default 9 spatial, 8 spatiotemporal)");
  s->add_option("--p-path-de-de", sim.p_path_de_de,
                "Pathway chain Pr(DE|DE)")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--p-path-de-ee", sim.p_path_de_ee,
                "Pathway chain Pr(DE|EE)")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--replicates", sim.replicates, "Dataset replicates")
      ->check(CLI::PositiveNumber);
  s->add_option("--jobs", sim.jobs, "Worker threads for replicates")
      ->check(CLI::PositiveNumber);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Estimate DE states from data");
  f->add_option("--expr", fit.expr,
                "Expression TSV (with --replicates: directory of repNNN/)")
      ->required();
  f->add_option("--network", fit.network, "Edge-list TSV")->required();
  f->add_option("--nodes", fit.nodes, "Optional isolated-node list");
  f->add_option("--mode", fit.mode, "full | hmm | hmrf")
      ->check(CLI::IsMember({"full", "hmm", "hmrf"}));
  f->add_option("--epsilon", fit.epsilon,
                "Convergence threshold (default 0.01)")
      ->check(CLI::PositiveNumber);
  f->add_option("--max-cycles", fit.max_cycles, "Cycle cap (default 50)")
      ->check(CLI::PositiveNumber);
  f->add_option("--ttest-alpha", fit.ttest_alpha,
                "Initialization t-test level (default 0.05)")
      ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
  f->add_option("--seed", fit.seed, "Seed for optimizer restarts");
  f->add_option("--out", fit.out, "Output directory")->required();
  f->add_option("--replicates", fit.replicates, "Replicate datasets")
      ->check(CLI::PositiveNumber);
  f->add_option("--jobs", fit.jobs, "Worker threads for replicates")
      ->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score estimates against truth");
  e->add_option("--est", ev.est, "Estimated states TSV (repeatable)")
      ->required();
  e->add_option("--truth", ev.truth, "True states TSV (repeatable)")
      ->required();
  e->add_option("--out", ev.out, "Output directory")->required();

  PerturbArgs pert;
  auto* p = app.add_subcommand("perturb", "Randomly misspecify a network");
  p->add_option("--network", pert.network, "Edge-list TSV")->required();
  p->add_option("--nodes", pert.nodes, "Optional isolated-node list");
  p->add_option("--del-frac", pert.del_frac, "Fraction of edges to delete")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  p->add_option("--add-count", pert.add_count, "Random edges to add")
      ->required();
  p->add_option("--seed", pert.seed, "Random seed");
  p->add_option("--out", pert.out, "Output edge-list file")->required();

  MakeNetworkArgs mk;
  auto* k = app.add_subcommand(
      "make-network", "Generate the pathway-structured benchmark network");
  k->add_option("--seed", mk.seed, "Random seed");
  k->add_option("--nodes", mk.nodes, "Gene count (default 1668)")
      ->check(CLI::PositiveNumber);
  k->add_option("--pathways-count", mk.pathways, "Pathway count (default 33)")
      ->check(CLI::PositiveNumber);
  k->add_option("--edges", mk.edges, "Edge count (default 8011)");
  k->add_option("--overlap", mk.overlap, "Borrowed genes per pathway");
  k->add_option("--isolated-frac", mk.isolated_frac,
                "Fraction of genes left without edges (default 0.25)")
      ->check(CLI::Range(0.0, 0.999));
  k->add_option("--out", mk.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim);
    if (f->parsed()) return cmd_fit(fit);
    if (e->parsed()) return cmd_eval(ev);
    if (p->parsed()) return cmd_perturb(pert);
    if (k->parsed()) return cmd_make_network(mk);
  } catch (const CmdError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return err.code;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 2;
}
