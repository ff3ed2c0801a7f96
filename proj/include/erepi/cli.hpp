#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "erepi/erepi.hpp"
#include "erepi/io.hpp"
#include "erepi/parallel.hpp"
#include "erepi/plotdata.hpp"

namespace erepi::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kOutDirEnv = "EREPI_OUT_DIR";

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Bad flag combinations the parser cannot see; exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every option of a subcommand goes through here so the manifest can list the
// effective value of each one, defaults included.
class ParamSet {
 public:
  template <class T>
  CLI::Option* option(CLI::App* app, const std::string& name, T& var, const std::string& help) {
    entries_.push_back({name, [&var] { return json(text(var)); }});
    return app->add_option("--" + name, var, help)->capture_default_str();
  }

  CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& help) {
    entries_.push_back({name, [&var] { return json(var); }});
    return app->add_flag("--" + name, var, help);
  }

  json to_json() const {
    json j = json::object();
    for (const auto& e : entries_) j[e.name] = e.get();
    return j;
  }

 private:
  static std::string text(const std::string& s) { return s; }
  static std::string text(double v) { return format_double(v); }
  template <class T>
    requires std::is_integral_v<T>
  static std::string text(T v) {
    return std::to_string(v);
  }

  struct Entry {
    std::string name;
    std::function<json()> get;
  };
  std::vector<Entry> entries_;
};

struct Options {
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  std::size_t replicas = 25;
  double lambda = 1.0;
  std::string update_mode = "async-uniform";
  std::uint32_t max_steps = 100000;
  unsigned threads = default_threads();
  std::string out_dir = "erepi-out";

  std::string p;      // single p; empty when unset
  std::string links;  // G(n, L) edge count; empty when unset
  std::string p_grid;
  std::string n_list;
  std::size_t z0 = 1;
  std::string z0_list;
  double alpha = 0.05;
  bool restrict_largest = false;
  std::string nodes;
  bool fresh_networks = false;

  std::string in_dir;    // plotdata
  std::string manifest;  // replay
};

struct RunResult {
  std::vector<std::string> files;
  json extra = json::object();
};

// ---- helpers ------------------------------------------------------------------

inline UpdateMode parse_mode(const std::string& s) {
  if (s == "async-uniform") return UpdateMode::AsyncUniform;
  if (s == "async-sweep") return UpdateMode::AsyncSweep;
  if (s == "sync") return UpdateMode::Synchronous;
  throw UsageError("unknown update mode '" + s + "'");
}

inline RunOptions run_options(const Options& o) {
  RunOptions r;
  r.lambda = o.lambda;
  r.update_mode = parse_mode(o.update_mode);
  r.seed = o.seed;
  r.threads = o.threads == 0 ? 1 : o.threads;
  r.max_macro_steps = o.max_steps;
  return r;
}

inline double k_of(std::size_t n, double p) { return static_cast<double>(n - 1) * p; }

inline std::string log_spec(double lo, double hi, std::size_t count) {
  return "log:" + format_double(lo) + ":" + format_double(hi) + ":" + std::to_string(count);
}

/// Log-spaced default grids; each brackets the thresholds relevant to the
/// subcommand for this n.
inline std::string default_grid(const std::string& sub, std::size_t n) {
  const auto nd = static_cast<double>(n);
  const double p2 = thresholds(n).p2;
  if (sub == "components-sweep") return log_spec(0.1 / nd, std::min(1.0, 2.0 * p2), 13);
  if (sub == "beta-curve") return log_spec(0.1 / nd, std::min(1.0, 1000.0 / nd), 13);
  if (sub == "pd-scan") return log_spec(p2, std::min(1.0, 1000.0 / nd), 7);
  if (sub == "transient-times") return log_spec(0.1 / nd, std::min(1.0, 100.0 / nd), 7);
  if (sub == "equilibrium-sweep") return log_spec(0.1 / nd, std::min(1.0, 10.0 / nd), 9);
  throw UsageError("no default grid for " + sub);
}

inline std::vector<double> grid_for(Options& o, const std::string& sub) {
  if (o.p_grid.empty()) o.p_grid = default_grid(sub, o.n);
  try {
    return io::parse_grid(o.p_grid);
  } catch (const Error& e) {
    throw UsageError(std::string("--p-grid: ") + e.what());
  }
}

inline double parse_p(const std::string& s) {
  double p = 0.0;
  try {
    p = parse_double(s);
  } catch (const Error&) {
    throw UsageError("--p: not a number '" + s + "'");
  }
  return p;
}

inline GenParams gen_params(const Options& o) {
  if (o.p.empty() == o.links.empty()) throw UsageError("give exactly one of --p and --links");
  if (!o.p.empty()) return GenParams::gnp(parse_p(o.p));
  try {
    return GenParams::gnl(parse_u64(o.links));
  } catch (const Error&) {
    throw UsageError("--links: not an unsigned integer '" + o.links + "'");
  }
}

inline std::string iso_utc(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string fmt(double v) { return std::isnan(v) ? std::string("nan") : format_double(v); }

// ---- subcommands ------------------------------------------------------------------

inline RunResult do_generate(Options& o, const fs::path& dir, std::ostream& out) {
  const GenParams gp = gen_params(o);
  const Network net = generate(static_cast<node_t>(o.n), gp, o.seed);
  const ComponentDecomposition cd = components(net);
  const DegreeStats ds = degree_stats(net);
  {
    std::ofstream os(dir / "network.edges");
    require(static_cast<bool>(os), ErrorKind::FileNotFound, "cannot write network.edges");
    write_edge_list(os, net);
  }
  const double mu = gp.mode == GenMode::Gnp ? k_of(o.n, gp.p) : ds.mean;
  io::CsvWriter deg({"k", "count", "poisson_expected"});
  for (std::size_t k = 0; k < ds.histogram.size(); ++k) {
    const double pois = mu > 0.0 ? std::exp(static_cast<double>(k) * std::log(mu) - mu - std::lgamma(k + 1.0))
                                 : (k == 0 ? 1.0 : 0.0);
    deg.row({k, ds.histogram[k], static_cast<double>(o.n) * pois});
  }
  deg.save(dir / "degrees.csv");

  const bool has_th = o.n >= 3;
  io::CsvWriter sum({"n", "edges", "mean_degree", "degree_variance", "m", "N_G", "S", "p1", "p2"});
  sum.row({o.n, net.edge_count(), ds.mean, ds.variance, cd.count(), cd.largest_size(), cd.distinct_sizes(),
           has_th ? thresholds(o.n).p1 : std::nan(""), has_th ? thresholds(o.n).p2 : std::nan("")});
  sum.save(dir / "network_summary.csv");
  out << "n=" << o.n << " edges=" << net.edge_count() << " components=" << cd.count()
      << " largest=" << cd.largest_size() << "\n";
  return {{"network.edges", "degrees.csv", "network_summary.csv"}, json::object()};
}

inline RunResult do_components_sweep(Options& o, const fs::path& dir, std::ostream& out) {
  const auto grid = grid_for(o, "components-sweep");
  const ComponentSweep sw = component_sweep(o.n, grid, o.replicas, run_options(o));
  io::CsvWriter w({"p", "k", "n", "N_G", "m", "S"});
  for (const auto& r : sw.rows) w.row({r.p, k_of(o.n, r.p), o.n, r.N_G, r.m, r.S});
  w.save(dir / "components.csv");
  io::CsvWriter reps({"p", "k", "replica", "seed", "N_G", "m", "S"});
  for (std::size_t i = 0; i < sw.replicas.size(); ++i) {
    const auto& s = sw.replicas[i];
    reps.row({s.p, k_of(o.n, s.p), i % o.replicas, s.seed, s.N_G, s.m, s.S});
  }
  reps.save(dir / "components_replicas.csv");
  out << "components-sweep: " << grid.size() << " grid points x " << o.replicas << " replicas\n";
  return {{"components.csv", "components_replicas.csv"}, json::object()};
}

inline std::vector<node_t> parse_nodes(const std::string& s) {
  std::vector<node_t> out;
  try {
    for (auto v : io::parse_counts(s)) out.push_back(static_cast<node_t>(v));
  } catch (const Error&) {
    throw UsageError("--nodes: expected a comma-separated list of node ids");
  }
  return out;
}

inline RunResult do_simulate(Options& o, const fs::path& dir, std::ostream& out) {
  const GenParams gp = gen_params(o);
  if (o.restrict_largest && !o.nodes.empty()) throw UsageError("--restrict-largest and --nodes exclude each other");
  if (!o.nodes.empty() && o.fresh_networks) throw UsageError("--nodes needs a single shared network");
  require(o.replicas >= 1, ErrorKind::InvalidParameter, "replicas must be >= 1");

  SimConfig cfg;
  cfg.lambda = o.lambda;
  cfg.z0 = o.z0;
  cfg.update_mode = parse_mode(o.update_mode);
  cfg.max_macro_steps = o.max_steps;
  cfg.seed = o.seed;
  if (o.restrict_largest) cfg.placement = Placement::LargestComponentOnly;
  if (!o.nodes.empty()) {
    cfg.placement = Placement::ExplicitNodeList;
    cfg.initial_nodes = parse_nodes(o.nodes);
    cfg.z0 = cfg.initial_nodes.size();
  }

  // The shared network (if any) is drawn from the master seed; replica r runs
  // with seed + r.
  std::optional<Network> shared;
  std::optional<ComponentDecomposition> shared_cd;
  if (!o.fresh_networks) {
    shared.emplace(generate(static_cast<node_t>(o.n), gp, o.seed));
    shared_cd.emplace(components(*shared));
  }
  struct Rep {
    Trajectory traj;
    std::size_t population = 0;
    std::optional<double> beta;
  };
  std::vector<Rep> reps(o.replicas);
  parallel_for(o.replicas, o.threads, [&](std::size_t r) {
    SimConfig c = cfg;
    c.seed = o.seed + r;
    std::optional<Network> own;
    std::optional<ComponentDecomposition> own_cd;
    if (!shared) {
      own.emplace(generate(static_cast<node_t>(o.n), gp, c.seed));
      own_cd.emplace(components(*own));
    }
    const Network& net = shared ? *shared : *own;
    const ComponentDecomposition& cd = shared ? *shared_cd : *own_cd;
    Rep rep;
    rep.traj = run_trajectory(net, &cd, c);
    rep.population = o.restrict_largest ? cd.largest_size() : o.n;
    try {
      rep.beta = estimate_beta(rep.traj, rep.population).beta;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData && e.kind() != ErrorKind::DegenerateInput) throw;
    }
    reps[r] = std::move(rep);
  });

  std::vector<Trajectory> trajs;
  for (auto& r : reps) trajs.push_back(r.traj);
  const std::vector<double> mean = pointwise_mean(trajs);

  io::CsvWriter ens({"replica", "t", "Z"});
  for (std::size_t r = 0; r < reps.size(); ++r)
    for (std::size_t t = 0; t < reps[r].traj.z.size(); ++t) ens.row({r, t, reps[r].traj.z[t]});
  ens.save(dir / "ensemble.csv");
  io::CsvWriter tr({"t", "Z"});
  for (std::size_t t = 0; t < mean.size(); ++t) tr.row({t, mean[t]});
  tr.save(dir / "trajectory.csv");
  io::CsvWriter rs({"replica", "seed", "population", "z0", "final_Z", "absorbed", "t_absorb", "beta"});
  json seeds = json::array();
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto& t = reps[r].traj;
    rs.row({r, t.seed, reps[r].population, t.initial_infected.size(), t.final_z(), t.absorbed, t.t_absorb,
            reps[r].beta ? *reps[r].beta : std::nan("")});
    seeds.push_back(t.seed);
  }
  rs.save(dir / "replicas.csv");

  json sc;
  sc["lambda"] = cfg.lambda;
  sc["z0"] = cfg.z0;
  sc["placement"] = cfg.placement == Placement::UniformRandom          ? "uniform-random"
                    : cfg.placement == Placement::LargestComponentOnly ? "largest-component-only"
                                                                       : "explicit-node-list";
  sc["initial_nodes"] = cfg.initial_nodes;
  sc["update_mode"] = o.update_mode;
  sc["seed"] = cfg.seed;
  sc["max_macro_steps"] = cfg.max_macro_steps;
  sc["record_micro_steps"] = cfg.record_micro_steps;
  RunResult res{{"ensemble.csv", "trajectory.csv", "replicas.csv"}, json::object()};
  res.extra["sim_config"] = sc;
  res.extra["replica_seeds"] = seeds;
  out << "simulate: " << o.replicas << " replica(s), mean final Z " << fmt(mean.back()) << "\n";
  return res;
}

inline std::vector<io::CsvCell> test_cells(const std::optional<TestResult>& t) {
  if (!t) return {std::nan(""), std::nan(""), std::string()};
  return {t->statistic, t->p_value, t->reject};
}

inline const char* status_name(CalibrationStatus s) {
  switch (s) {
    case CalibrationStatus::Ok: return "ok";
    case CalibrationStatus::EmptyDynamics: return "empty-dynamics";
    case CalibrationStatus::Degenerate: return "degenerate";
  }
  return "unknown";
}

inline RunResult do_calibrate(Options& o, const fs::path& dir, std::ostream& out) {
  if (o.p.empty()) throw UsageError("calibrate needs --p");
  const double p = parse_p(o.p);
  const BetaCalibration c = calibrate_at_p(o.n, p, o.z0, o.replicas, o.alpha, o.restrict_largest, run_options(o));

  io::CsvWriter w({"p", "k", "n", "z0", "replicas", "used", "dropped", "mean_beta", "se", "mean_fit_se",
                   "mean_population", "t_statistic", "t_p_value", "reject_beta_1", "sw_W", "sw_p_value",
                   "sw_reject_normal", "status"});
  std::vector<io::CsvCell> row{p, k_of(o.n, p), o.n, o.z0, o.replicas, c.per_replica.size(), c.dropped,
                               c.mean_beta, c.se, c.mean_fit_se, c.mean_population};
  for (auto& x : test_cells(c.ttest)) row.push_back(x);
  for (auto& x : test_cells(c.normality)) row.push_back(x);
  row.emplace_back(status_name(c.status));
  w.row(row);
  w.save(dir / "calibration.csv");

  io::CsvWriter b({"replica", "seed", "beta", "intercept", "slope_se", "n_points", "population"});
  for (std::size_t i = 0; i < c.per_replica.size(); ++i) {
    const auto& e = c.per_replica[i];
    b.row({i, e.seed, e.beta, e.intercept, e.slope_se, e.n_points_used, e.population});
  }
  b.save(dir / "betas.csv");

  out << "p=" << fmt(p) << " n=" << o.n << " z0=" << o.z0 << ": mean beta " << fmt(c.mean_beta) << " (SE "
      << fmt(c.se) << ", mean fit SE " << fmt(c.mean_fit_se) << ", " << c.per_replica.size() << " used, "
      << c.dropped << " dropped)\n";
  if (c.ttest)
    out << "t-test beta=1: t=" << fmt(c.ttest->statistic) << " p=" << fmt(c.ttest->p_value) << " -> "
        << (c.ttest->reject ? "rejected" : "not rejected") << "\n";
  return {{"calibration.csv", "betas.csv"}, json::object()};
}

inline io::CsvWriter curve_writer() {
  return io::CsvWriter({"p", "k", "status", "used", "dropped", "mean_beta", "se", "mean_fit_se",
                        "mean_population", "t_statistic", "t_p_value", "pass"});
}

inline void curve_row(io::CsvWriter& w, std::size_t n, const BetaCalibration& c) {
  std::vector<io::CsvCell> row{c.p, k_of(n, c.p), status_name(c.status), c.per_replica.size(), c.dropped,
                               c.mean_beta, c.se, c.mean_fit_se, c.mean_population};
  row.emplace_back(c.ttest ? c.ttest->statistic : std::nan(""));
  row.emplace_back(c.ttest ? c.ttest->p_value : std::nan(""));
  row.emplace_back(c.passes());
  w.row(row);
}

inline RunResult do_beta_curve(Options& o, const fs::path& dir, std::ostream& out) {
  const auto grid = grid_for(o, "beta-curve");
  const auto curve = beta_curve(o.n, grid, o.z0, o.replicas, o.alpha, run_options(o));
  auto w = curve_writer();
  for (const auto& c : curve) curve_row(w, o.n, c);
  w.save(dir / "beta_curve.csv");
  out << "beta-curve: " << grid.size() << " grid points x " << o.replicas << " replicas\n";
  return {{"beta_curve.csv"}, json::object()};
}

inline RunResult do_pd_scan(Options& o, const fs::path& dir, std::ostream& out) {
  std::vector<std::size_t> sizes{o.n};
  if (!o.n_list.empty()) {
    try {
      sizes = io::parse_counts(o.n_list);
    } catch (const Error&) {
      throw UsageError("--n-list: expected a comma-separated list of sizes");
    }
  }
  const RunOptions base = run_options(o);
  io::CsvWriter pts({"n", "p", "k", "status", "used", "mean_beta", "se", "t_statistic", "t_p_value", "pass"});
  io::CsvWriter pd({"n", "p_d", "bracketed"});
  std::vector<LabeledPoint> labeled;
  json grids = json::object();
  std::uint64_t offset = 0;  // keeps replica seeds disjoint across sizes
  for (std::size_t n : sizes) {
    const std::string spec = o.p_grid.empty() ? default_grid("pd-scan", n) : o.p_grid;
    std::vector<double> grid;
    try {
      grid = io::parse_grid(spec);
    } catch (const Error& e) {
      throw UsageError(std::string("--p-grid: ") + e.what());
    }
    grids[std::to_string(n)] = spec;
    RunOptions ro = base;
    ro.seed = base.seed + offset;
    offset += grid.size() * o.replicas;
    const PdScan scan = label_grid(n, grid, o.replicas, o.alpha, ro);
    for (const auto& c : scan.calibrations) {
      std::vector<io::CsvCell> row{n, c.p, k_of(n, c.p), status_name(c.status), c.per_replica.size(),
                                   c.mean_beta, c.se};
      row.emplace_back(c.ttest ? c.ttest->statistic : std::nan(""));
      row.emplace_back(c.ttest ? c.ttest->p_value : std::nan(""));
      row.emplace_back(c.passes());
      pts.row(row);
    }
    pd.row({n, scan.p_d ? *scan.p_d : std::nan(""), scan.p_d.has_value()});
    out << "n=" << n << ": p_d " << (scan.p_d ? fmt(*scan.p_d) : std::string("not bracketed by the grid")) << "\n";
    labeled.insert(labeled.end(), scan.points.begin(), scan.points.end());
  }
  pts.save(dir / "pd_points.csv");
  pd.save(dir / "pd.csv");
  RunResult res{{"pd_points.csv", "pd.csv"}, json::object()};
  res.extra["grids"] = grids;

  std::set<std::size_t> distinct(sizes.begin(), sizes.end());
  if (distinct.size() >= 2) {
    const SeparatrixFit fit = pd_scaling(labeled);
    io::CsvWriter sep({"slope", "intercept", "margin", "converged", "iterations", "hinge_loss"});
    sep.row({fit.slope, fit.intercept, fit.margin, fit.converged, fit.iterations, fit.hinge_loss});
    sep.save(dir / "separatrix.csv");
    res.files.push_back("separatrix.csv");
    out << "separatrix: ln p = " << fmt(fit.slope) << " ln n + " << fmt(fit.intercept) << "\n";
  }
  return res;
}

inline RunResult do_transient_times(Options& o, const fs::path& dir, std::ostream& out) {
  const auto grid = grid_for(o, "transient-times");
  const auto tts = transient_times(o.n, grid, o.z0, o.replicas, run_options(o));
  io::CsvWriter w({"p", "k", "restricted", "N_G_mean", "t50", "t75", "t100", "T_c", "inv_beta", "mean_beta",
                   "unabsorbed"});
  io::CsvWriter reps({"p", "k", "replica", "seed", "population", "N_eq", "t50", "t75", "t100", "absorbed",
                      "beta"});
  for (const auto& t : tts) {
    w.row({t.p, k_of(o.n, t.p), t.restricted, t.N_G_mean, t.t50, t.t75, t.t100, t.T_c, t.inv_beta, t.mean_beta,
           t.unabsorbed});
    for (std::size_t r = 0; r < t.per_replica.size(); ++r) {
      const auto& x = t.per_replica[r];
      reps.row({t.p, k_of(o.n, t.p), r, x.seed, x.population, x.n_eq, x.t50, x.t75, x.t100, x.absorbed,
                x.beta ? *x.beta : std::nan("")});
    }
  }
  w.save(dir / "transient.csv");
  reps.save(dir / "transient_replicas.csv");
  out << "transient-times: " << grid.size() << " grid points x " << o.replicas << " replicas\n";
  return {{"transient.csv", "transient_replicas.csv"}, json::object()};
}

inline RunResult do_equilibrium_sweep(Options& o, const fs::path& dir, std::ostream& out) {
  const auto grid = grid_for(o, "equilibrium-sweep");
  if (o.z0_list.empty()) {
    std::vector<std::size_t> z{1, std::max<std::size_t>(1, o.n / 100), std::max<std::size_t>(1, o.n / 4)};
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    for (std::size_t i = 0; i < z.size(); ++i) o.z0_list += (i ? "," : "") + std::to_string(z[i]);
  }
  std::vector<std::size_t> z0s;
  try {
    z0s = io::parse_counts(o.z0_list);
  } catch (const Error&) {
    throw UsageError("--z0-list: expected a comma-separated list of counts");
  }
  const auto recs = equilibrium_sweep(o.n, grid, z0s, o.replicas, run_options(o));
  io::CsvWriter w({"p", "k", "z0", "N_eq", "N_G"});
  for (const auto& r : recs) w.row({r.p, k_of(o.n, r.p), r.z0, r.N_eq_sim, r.N_G_mean});
  w.save(dir / "equilibrium.csv");
  out << "equilibrium-sweep: " << grid.size() << " grid points x " << z0s.size() << " z0 values\n";
  return {{"equilibrium.csv"}, json::object()};
}

inline json read_manifest(const fs::path& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorKind::FileNotFound, "missing manifest " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, "bad manifest " + path.string() + ": " + e.what());
  }
}

// ---- driver ---------------------------------------------------------------------------

using Handler = RunResult (*)(Options&, const fs::path&, std::ostream&);

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

namespace detail {

inline void common(ParamSet& ps, CLI::App* sc, Options& o, bool replicas, bool dynamics) {
  ps.option(sc, "n", o.n, "number of nodes")->check(CLI::Range(std::size_t{1}, std::size_t{4294967295u}));
  ps.option(sc, "seed", o.seed, "master seed");
  if (replicas) ps.option(sc, "replicas", o.replicas, "replicas per grid point");
  if (dynamics) {
    ps.option(sc, "lambda", o.lambda, "contact efficiency in (0, 1]");
    ps.option(sc, "update-mode", o.update_mode, "async-uniform | async-sweep | sync")
        ->check(CLI::IsMember({"async-uniform", "async-sweep", "sync"}));
    ps.option(sc, "max-steps", o.max_steps, "macro-step cap per trajectory");
  }
  ps.option(sc, "threads", o.threads, "worker threads (does not affect results)");
  ps.option(sc, "out-dir", o.out_dir, "output directory")->envname(kOutDirEnv);
}

inline int write_outputs(const std::string& sub, Options& o, ParamSet& ps, Handler h, std::ostream& out) {
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  RunResult res = h(o, dir, out);
  for (const auto& f : plot::emit_plotdata(sub, dir, dir)) res.files.push_back(f);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json m;
  m["tool"] = "erepi";
  m["version"] = kVersion;
  m["subcommand"] = sub;
  m["parameters"] = ps.to_json();
  m["master_seed"] = o.seed;
  m["outputs"] = res.files;
  for (auto it = res.extra.begin(); it != res.extra.end(); ++it) m[it.key()] = it.value();
  m["wall_clock"] = {{"started_utc", iso_utc(started)}, {"elapsed_seconds", elapsed}};
  std::ofstream os(dir / kManifestName);
  require(static_cast<bool>(os), ErrorKind::FileNotFound, "cannot write manifest in " + dir.string());
  os << m.dump(2) << "\n";
  out << "wrote " << res.files.size() << " files and " << kManifestName << " to " << dir.string() << "\n";
  return 0;
}

inline std::vector<std::string> replay_args(const json& m, const std::string& out_dir, const std::string& threads) {
  require(m.contains("subcommand") && m.contains("parameters"), ErrorKind::Format,
          "manifest lacks subcommand or parameters");
  std::vector<std::string> args{"erepi", m["subcommand"].get<std::string>()};
  for (auto it = m["parameters"].begin(); it != m["parameters"].end(); ++it) {
    const std::string name = it.key();
    if ((name == "out-dir" && !out_dir.empty()) || (name == "threads" && !threads.empty())) continue;
    if (it.value().is_boolean()) {
      if (it.value().get<bool>()) args.push_back("--" + name);
      continue;
    }
    const auto v = it.value().get<std::string>();
    if (v.empty()) continue;
    args.push_back("--" + name);
    args.push_back(v);
  }
  if (!out_dir.empty()) args.insert(args.end(), {"--out-dir", out_dir});
  if (!threads.empty()) args.insert(args.end(), {"--threads", threads});
  return args;
}

}  // namespace detail

/// Parses argv, runs one subcommand, and returns the exit status: 0 on
/// success, 1 on a runtime error, 2 on a usage error.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Epidemics on Erdos-Renyi networks: simulation, calibration and sweeps", "erepi"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML or INI file with option values (command-line flags win)");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  std::map<std::string, ParamSet> params;
  std::map<std::string, Handler> handlers;

  auto add = [&](const std::string& name, const std::string& help, Handler h) {
    handlers[name] = h;
    return app.add_subcommand(name, help);
  };

  {
    auto* sc = add("generate", "draw one network; write its edge list, degrees and components", do_generate);
    auto& ps = params["generate"];
    detail::common(ps, sc, o, false, false);
    ps.option(sc, "p", o.p, "link probability (G(n,p))");
    ps.option(sc, "links", o.links, "exact number of links (G(n,L))");
  }
  {
    auto* sc = add("components-sweep", "component statistics over a p grid", do_components_sweep);
    auto& ps = params["components-sweep"];
    detail::common(ps, sc, o, true, false);
    ps.option(sc, "p-grid", o.p_grid, "list a,b,c | log:lo:hi:count | table1");
  }
  {
    auto* sc = add("simulate", "SI trajectories on one shared or fresh networks", do_simulate);
    auto& ps = params["simulate"];
    detail::common(ps, sc, o, true, true);
    ps.option(sc, "p", o.p, "link probability (G(n,p))");
    ps.option(sc, "links", o.links, "exact number of links (G(n,L))");
    ps.option(sc, "z0", o.z0, "initial infectives");
    ps.flag(sc, "restrict-largest", o.restrict_largest, "seed infectives in the largest component");
    ps.option(sc, "nodes", o.nodes, "explicit initial infectives, comma separated");
    ps.flag(sc, "fresh-networks", o.fresh_networks, "draw a new network per replica");
  }
  {
    auto* sc = add("calibrate", "estimate beta at one p and test beta = 1", do_calibrate);
    auto& ps = params["calibrate"];
    detail::common(ps, sc, o, true, true);
    ps.option(sc, "p", o.p, "link probability");
    ps.option(sc, "z0", o.z0, "initial infectives");
    ps.option(sc, "alpha", o.alpha, "significance level");
    ps.flag(sc, "restrict-largest", o.restrict_largest, "confine the epidemic to the largest component");
  }
  {
    auto* sc = add("beta-curve", "beta(p) on the largest component over a p grid", do_beta_curve);
    auto& ps = params["beta-curve"];
    detail::common(ps, sc, o, true, true);
    ps.option(sc, "p-grid", o.p_grid, "list a,b,c | log:lo:hi:count | table1");
    ps.option(sc, "z0", o.z0, "initial infectives");
    ps.option(sc, "alpha", o.alpha, "significance level");
  }
  {
    auto* sc = add("pd-scan", "label grid points pass/fail, locate p_d, fit its scaling in n", do_pd_scan);
    auto& ps = params["pd-scan"];
    detail::common(ps, sc, o, true, true);
    ps.option(sc, "n-list", o.n_list, "several sizes, comma separated (overrides --n)");
    ps.option(sc, "p-grid", o.p_grid, "list a,b,c | log:lo:hi:count (default: per n)");
    ps.option(sc, "alpha", o.alpha, "significance level");
  }
  {
    auto* sc = add("transient-times", "t50, t75, t100 and T_c over a p grid", do_transient_times);
    auto& ps = params["transient-times"];
    detail::common(ps, sc, o, true, true);
    ps.option(sc, "p-grid", o.p_grid, "list a,b,c | log:lo:hi:count | table1");
    ps.option(sc, "z0", o.z0, "initial infectives");
  }
  {
    auto* sc = add("equilibrium-sweep", "equilibrium epidemic size against N_G over a p grid", do_equilibrium_sweep);
    auto& ps = params["equilibrium-sweep"];
    detail::common(ps, sc, o, true, false);
    ps.option(sc, "p-grid", o.p_grid, "list a,b,c | log:lo:hi:count | table1");
    ps.option(sc, "z0-list", o.z0_list, "initial infective counts, comma separated");
  }

  auto* plotdata = app.add_subcommand("plotdata", "rebuild plot tables from a finished output directory");
  plotdata->add_option("--in-dir", o.in_dir, "directory holding a manifest and its CSV files")->required();
  std::string plot_out;
  plotdata->add_option("--out-dir", plot_out, "where to write (default: --in-dir)");

  auto* replay = app.add_subcommand("replay", "re-run the invocation recorded in a manifest");
  replay->add_option("--manifest", o.manifest, "manifest.json to replay")->required();
  std::string replay_out, replay_threads;
  replay->add_option("--out-dir", replay_out, "override the recorded output directory");
  replay->add_option("--threads", replay_threads, "override the recorded worker count");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  if (!argv.empty()) argv.pop_back();  // program name
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*plotdata) {
      const json m = read_manifest(fs::path(o.in_dir) / kManifestName);
      const auto files =
          plot::emit_plotdata(m.at("subcommand").get<std::string>(), o.in_dir, plot_out.empty() ? o.in_dir : plot_out);
      out << "wrote " << files.size() << " plot files\n";
      return 0;
    }
    if (*replay) {
      const json m = read_manifest(o.manifest);
      return run(detail::replay_args(m, replay_out, replay_threads), out, err);
    }
    for (auto& [name, h] : handlers)
      if (*app.get_subcommand(name)) return detail::write_outputs(name, o, params[name], h, out);
    err << "usage error: no subcommand\n";
    return 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace erepi::cli
