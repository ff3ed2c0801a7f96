#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "erepi/components.hpp"
#include "erepi/epidemic.hpp"
#include "erepi/error.hpp"
#include "erepi/meanfield.hpp"
#include "erepi/network.hpp"
#include "erepi/parallel.hpp"
#include "erepi/stats.hpp"
#include "erepi/svm.hpp"

namespace erepi {

// Knobs shared by every experiment pipeline.
//
// Seeds: replica r of grid point g runs with seed + g * replicas + r. That
// seed draws the replica's network and, on separate streams, its initial
// placement and dynamics.
struct RunOptions {
  double lambda = 1.0;
  UpdateMode update_mode = UpdateMode::AsyncUniform;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::uint32_t max_macro_steps = 100000;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline std::uint64_t replica_seed(const RunOptions& opt, std::size_t grid_index, std::size_t replicas,
                                  std::size_t replica) {
  return opt.seed + grid_index * replicas + replica;
}

// ---- beta from one trajectory ---------------------------------------------

enum class PopulationBasis { Network, LargestComponent };

struct BetaEstimate {
  double beta = 0.0;  // minus the fitted slope of ln((N - Z) / Z) against t
  double intercept = 0.0;
  double slope_se = 0.0;
  std::size_t n_points_used = 0;
  std::size_t population = 0;
  PopulationBasis basis = PopulationBasis::Network;
  std::uint64_t seed = 0;
};

/// Regresses ln((population - Z(t)) / Z(t)) on t over exactly the macro steps
/// with 0 < Z < population.
inline BetaEstimate estimate_beta(const Trajectory& traj, std::size_t population) {
  std::vector<Point2> pts;
  pts.reserve(traj.z.size());
  const auto pop = static_cast<double>(population);
  for (std::size_t t = 0; t < traj.z.size(); ++t) {
    const std::size_t z = traj.z[t];
    if (z == 0 || z >= population) continue;
    const auto zd = static_cast<double>(z);
    pts.push_back({static_cast<double>(t), std::log((pop - zd) / zd)});
  }
  require(pts.size() >= 2, ErrorKind::InsufficientData,
          "trajectory has " + std::to_string(pts.size()) + " usable point(s), need 2");
  const OlsFit fit = ols_fit(pts);
  BetaEstimate est;
  est.beta = -fit.slope;
  est.intercept = fit.intercept;
  est.slope_se = fit.slope_se;
  est.n_points_used = fit.n_points;
  est.population = population;
  est.seed = traj.seed;
  return est;
}

// ---- ensemble calibration at one p -----------------------------------------

enum class CalibrationStatus {
  Ok,
  EmptyDynamics,  // fewer than 3 usable replicas; beta reported as 0
  Degenerate,     // usable replicas but the t-test is undefined (zero spread)
};

struct BetaCalibration {
  double p = 0.0;
  std::size_t n = 0;
  std::size_t z0 = 0;
  std::size_t replicas = 0;  // requested
  std::vector<BetaEstimate> per_replica;
  std::size_t dropped = 0;  // replicas without a usable regression
  double mean_beta = 0.0;
  double se = 0.0;           // sd(beta) / sqrt(usable replicas)
  double mean_fit_se = 0.0;  // mean per-replica regression slope SE
  double mean_population = 0.0;
  std::optional<TestResult> ttest;      // against mu0 = 1
  std::optional<TestResult> normality;  // Shapiro-Wilk on the betas
  CalibrationStatus status = CalibrationStatus::Ok;

  bool passes() const { return ttest && !ttest->reject; }
};

namespace detail {

struct BetaSample {
  std::vector<std::optional<BetaEstimate>> slots;  // one per replica
};

inline std::optional<BetaEstimate> calibration_replica(std::size_t n, double p, std::size_t z0,
                                                       bool restrict_to_largest, const RunOptions& opt,
                                                       std::uint64_t seed) {
  const Network net = generate_gnp(static_cast<node_t>(n), p, seed);
  const ComponentDecomposition cd = components(net);
  const std::size_t population = restrict_to_largest ? cd.largest_size() : n;
  if (z0 > population) return std::nullopt;
  SimConfig cfg;
  cfg.lambda = opt.lambda;
  cfg.z0 = z0;
  cfg.placement = restrict_to_largest ? Placement::LargestComponentOnly : Placement::UniformRandom;
  cfg.update_mode = opt.update_mode;
  cfg.seed = seed;
  cfg.max_macro_steps = opt.max_macro_steps;
  const Trajectory traj = run_trajectory(net, &cd, cfg);
  try {
    BetaEstimate est = estimate_beta(traj, population);
    est.basis = restrict_to_largest ? PopulationBasis::LargestComponent : PopulationBasis::Network;
    return est;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
    return std::nullopt;
  }
}

// Summarizes one grid point. Throws InsufficientData when fewer than three
// replicas survive and DegenerateInput when the betas have no spread.
inline BetaCalibration summarize(double p, std::size_t n, std::size_t z0, std::size_t replicas,
                                 double alpha, const std::vector<std::optional<BetaEstimate>>& slots) {
  BetaCalibration cal;
  cal.p = p;
  cal.n = n;
  cal.z0 = z0;
  cal.replicas = replicas;
  for (const auto& s : slots) {
    if (s)
      cal.per_replica.push_back(*s);
    else
      ++cal.dropped;
  }
  const std::size_t used = cal.per_replica.size();
  if (used < 3) {
    cal.status = CalibrationStatus::EmptyDynamics;
    throw Error(ErrorKind::InsufficientData, "only " + std::to_string(used) + " of " +
                                                 std::to_string(replicas) +
                                                 " replicas gave a usable regression at p = " +
                                                 format_double(p));
  }
  std::vector<double> betas;
  betas.reserve(used);
  double fit_se = 0.0;
  double pop = 0.0;
  for (const auto& e : cal.per_replica) {
    betas.push_back(e.beta);
    fit_se += e.slope_se;
    pop += static_cast<double>(e.population);
  }
  cal.mean_beta = mean_of(betas);
  cal.se = sample_sd(betas) / std::sqrt(static_cast<double>(used));
  cal.mean_fit_se = fit_se / static_cast<double>(used);
  cal.mean_population = pop / static_cast<double>(used);
  try {
    cal.normality = shapiro_wilk(betas, alpha);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateInput) throw;
  }
  cal.ttest = t_test_one_sample(betas, 1.0, alpha);
  return cal;
}

// Calibration record that never throws for statistical dead ends: empty
// dynamics report beta = 0, zero spread reports the mean without a test.
inline BetaCalibration summarize_lenient(double p, std::size_t n, std::size_t z0, std::size_t replicas,
                                         double alpha,
                                         const std::vector<std::optional<BetaEstimate>>& slots) {
  try {
    return summarize(p, n, z0, replicas, alpha, slots);
  } catch (const Error& e) {
    BetaCalibration cal;
    cal.p = p;
    cal.n = n;
    cal.z0 = z0;
    cal.replicas = replicas;
    std::vector<double> betas;
    for (const auto& s : slots) {
      if (s) {
        cal.per_replica.push_back(*s);
        betas.push_back(s->beta);
        cal.mean_population += static_cast<double>(s->population);
      } else {
        ++cal.dropped;
      }
    }
    if (e.kind() == ErrorKind::InsufficientData) {
      cal.status = CalibrationStatus::EmptyDynamics;
      cal.mean_beta = 0.0;
      cal.mean_population = betas.empty() ? 0.0 : cal.mean_population / static_cast<double>(betas.size());
      return cal;
    }
    if (e.kind() == ErrorKind::DegenerateInput) {
      cal.status = CalibrationStatus::Degenerate;
      cal.mean_beta = mean_of(betas);
      cal.se = 0.0;
      cal.mean_population /= static_cast<double>(betas.size());
      return cal;
    }
    throw;
  }
}

// Runs every (grid point, replica) pair as one flat parallel loop.
inline std::vector<std::vector<std::optional<BetaEstimate>>> collect_betas(
    std::size_t n, std::span<const double> p_grid, std::size_t z0, std::size_t replicas,
    bool restrict_to_largest, const RunOptions& opt) {
  std::vector<std::vector<std::optional<BetaEstimate>>> slots(p_grid.size(),
                                                              std::vector<std::optional<BetaEstimate>>(replicas));
  parallel_for(p_grid.size() * replicas, opt.threads, [&](std::size_t k) {
    const std::size_t g = k / replicas;
    const std::size_t r = k % replicas;
    slots[g][r] = calibration_replica(n, p_grid[g], z0, restrict_to_largest, opt,
                                      replica_seed(opt, g, replicas, r));
  });
  return slots;
}

inline void check_calibration_args(std::size_t n, std::size_t z0, std::size_t replicas, double alpha) {
  require(n >= 1, ErrorKind::InvalidParameter, "n must be >= 1");
  require(z0 >= 1 && z0 <= n, ErrorKind::InvalidParameter, "need 1 <= z0 <= n");
  require(replicas >= 3, ErrorKind::InvalidParameter, "calibration needs at least 3 replicas");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidParameter, "alpha must lie in (0, 1)");
}

}  // namespace detail

/// Estimates beta on `replicas` fresh G(n, p) networks and tests it against
/// 1. With `restrict_to_largest`, the z0 initial infectives are placed in the
/// largest component and its size is the population basis.
inline BetaCalibration calibrate_at_p(std::size_t n, double p, std::size_t z0, std::size_t replicas,
                                      double alpha, bool restrict_to_largest, const RunOptions& opt = {}) {
  detail::check_calibration_args(n, z0, replicas, alpha);
  const double grid[] = {p};
  const auto slots = detail::collect_betas(n, grid, z0, replicas, restrict_to_largest, opt);
  return detail::summarize(p, n, z0, replicas, alpha, slots[0]);
}

/// beta(p) with dynamics confined to the largest component. Grid points
/// without usable dynamics report beta = 0 (status EmptyDynamics).
inline std::vector<BetaCalibration> beta_curve(std::size_t n, std::span<const double> p_grid,
                                               std::size_t z0, std::size_t replicas, double alpha = 0.05,
                                               const RunOptions& opt = {}) {
  require(!p_grid.empty(), ErrorKind::InvalidParameter, "p grid is empty");
  detail::check_calibration_args(n, z0, replicas, alpha);
  const auto slots = detail::collect_betas(n, p_grid, z0, replicas, true, opt);
  std::vector<BetaCalibration> out;
  out.reserve(p_grid.size());
  for (std::size_t g = 0; g < p_grid.size(); ++g)
    out.push_back(detail::summarize_lenient(p_grid[g], n, z0, replicas, alpha, slots[g]));
  return out;
}

// ---- mean-field validity threshold ------------------------------------------

struct LabeledPoint {
  std::size_t n = 0;
  double p = 0.0;
  bool pass = false;  // beta statistically equal to 1
};

struct PdScan {
  std::size_t n = 0;
  std::vector<BetaCalibration> calibrations;  // one per grid point, ascending p
  std::vector<LabeledPoint> points;
  std::optional<double> p_d;
};

// Smallest grid p from which every larger grid point passes.
inline double threshold_from_labels(std::span<const LabeledPoint> pts) {
  require(!pts.empty(), ErrorKind::InvalidParameter, "no labeled points");
  std::size_t first = pts.size();
  while (first > 0 && pts[first - 1].pass) --first;
  require(first < pts.size(), ErrorKind::ThresholdNotBracketed,
          "largest grid p fails the test; threshold lies above the grid");
  require(first > 0, ErrorKind::ThresholdNotBracketed,
          "every grid point passes; threshold lies below the grid");
  return pts[first].p;
}

/// Labels each grid point pass/fail (z0 = 1, dynamics on the largest
/// component) without insisting that the grid brackets the threshold.
inline PdScan label_grid(std::size_t n, std::span<const double> p_grid, std::size_t replicas, double alpha,
                         const RunOptions& opt = {}) {
  require(!p_grid.empty(), ErrorKind::InvalidParameter, "p grid is empty");
  require(std::is_sorted(p_grid.begin(), p_grid.end()), ErrorKind::InvalidParameter,
          "p grid must be ascending");
  detail::check_calibration_args(n, 1, replicas, alpha);
  const auto slots = detail::collect_betas(n, p_grid, 1, replicas, true, opt);
  PdScan scan;
  scan.n = n;
  for (std::size_t g = 0; g < p_grid.size(); ++g) {
    scan.calibrations.push_back(detail::summarize_lenient(p_grid[g], n, 1, replicas, alpha, slots[g]));
    scan.points.push_back({n, p_grid[g], scan.calibrations.back().passes()});
  }
  try {
    scan.p_d = threshold_from_labels(scan.points);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ThresholdNotBracketed) throw;
  }
  return scan;
}

/// As label_grid, but a grid that does not bracket the threshold is an error.
inline PdScan pd_scan(std::size_t n, std::span<const double> p_grid, std::size_t replicas, double alpha,
                      const RunOptions& opt = {}) {
  PdScan scan = label_grid(n, p_grid, replicas, alpha, opt);
  scan.p_d = threshold_from_labels(scan.points);
  return scan;
}

/// Maximum-margin line between passing and failing points in the
/// (ln n, ln p) plane; its slope is the exponent of p_d ~ n^slope.
inline SeparatrixFit pd_scaling(std::span<const LabeledPoint> pts, const SvmOptions& svm = {}) {
  std::set<std::size_t> sizes;
  std::vector<Point2> xy;
  std::vector<int> labels;
  for (const auto& lp : pts) {
    require(lp.n >= 1 && lp.p > 0.0, ErrorKind::InvalidParameter, "labeled point needs n >= 1, p > 0");
    sizes.insert(lp.n);
    xy.push_back({std::log(static_cast<double>(lp.n)), std::log(lp.p)});
    labels.push_back(lp.pass ? 1 : -1);
  }
  require(sizes.size() >= 2, ErrorKind::InvalidParameter, "scaling fit needs at least two network sizes");
  return svm_linear(xy, labels, svm);
}

// ---- transient times ----------------------------------------------------------

struct ReplicaTransient {
  std::uint64_t seed = 0;
  std::size_t n_eq = 0;
  std::size_t population = 0;  // N_G when confined to the largest component, else n
  std::uint32_t t50 = 0;
  std::uint32_t t75 = 0;
  std::uint32_t t100 = 0;
  bool absorbed = false;
  std::optional<double> beta;
};

struct TransientTimes {
  double p = 0.0;
  double t50 = kNaN;
  double t75 = kNaN;
  double t100 = kNaN;
  double T_c = kNaN;
  double inv_beta = kNaN;
  double mean_beta = kNaN;
  double N_G_mean = 0.0;
  bool restricted = false;
  std::size_t unabsorbed = 0;
  std::vector<ReplicaTransient> per_replica;
};

namespace detail {

inline ReplicaTransient transient_replica(std::size_t n, double p, std::size_t z0, bool restrict_to_largest,
                                          const RunOptions& opt, std::uint64_t seed) {
  const Network net = generate_gnp(static_cast<node_t>(n), p, seed);
  const ComponentDecomposition cd = components(net);
  SimConfig cfg;
  cfg.lambda = opt.lambda;
  cfg.z0 = std::min(z0, restrict_to_largest ? cd.largest_size() : n);
  cfg.placement = restrict_to_largest ? Placement::LargestComponentOnly : Placement::UniformRandom;
  cfg.update_mode = opt.update_mode;
  cfg.seed = seed;
  cfg.max_macro_steps = opt.max_macro_steps;
  const Trajectory traj = run_trajectory(net, &cd, cfg);
  ReplicaTransient rt;
  rt.seed = seed;
  rt.population = cd.largest_size();
  rt.n_eq = equilibrium_size(cd, traj.initial_infected);
  rt.absorbed = traj.absorbed;
  const auto level = static_cast<double>(rt.n_eq);
  const auto last = static_cast<std::uint32_t>(traj.z.size() - 1);
  rt.t50 = first_step_reaching(traj, 0.5 * level).value_or(last);
  rt.t75 = first_step_reaching(traj, 0.75 * level).value_or(last);
  rt.t100 = traj.absorbed ? traj.t_absorb : last;
  try {
    rt.beta = estimate_beta(traj, rt.n_eq).beta;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
  }
  return rt;
}

inline TransientTimes summarize_transient(double p, std::size_t z0, bool restricted,
                                          std::vector<ReplicaTransient> reps) {
  TransientTimes tt;
  tt.p = p;
  tt.restricted = restricted;
  double s50 = 0.0, s75 = 0.0, s100 = 0.0, sg = 0.0, sb = 0.0;
  std::size_t used = 0;
  std::size_t with_beta = 0;
  for (const auto& r : reps) {
    sg += static_cast<double>(r.population);
    if (!r.absorbed) {
      ++tt.unabsorbed;
      continue;
    }
    ++used;
    s50 += r.t50;
    s75 += r.t75;
    s100 += r.t100;
    if (r.beta) {
      sb += *r.beta;
      ++with_beta;
    }
  }
  tt.N_G_mean = sg / static_cast<double>(reps.size());
  if (used > 0) {
    tt.t50 = s50 / static_cast<double>(used);
    tt.t75 = s75 / static_cast<double>(used);
    tt.t100 = s100 / static_cast<double>(used);
  }
  if (with_beta > 0) {
    tt.mean_beta = sb / static_cast<double>(with_beta);
    if (tt.mean_beta > 0.0) {
      tt.inv_beta = 1.0 / tt.mean_beta;
      if (static_cast<double>(z0) < tt.N_G_mean)
        tt.T_c = characteristic_time({tt.N_G_mean, static_cast<double>(z0), tt.mean_beta});
    }
  }
  tt.per_replica = std::move(reps);
  return tt;
}

}  // namespace detail

/// First macro steps at which Z reaches 50%, 75% and 100% of the replica's
/// equilibrium size, averaged over absorbed replicas; below p2 = ln(n)/n the
/// dynamics are confined to the largest component. T_c uses the mean largest
/// component size and the mean per-replica beta.
inline std::vector<TransientTimes> transient_times(std::size_t n, std::span<const double> p_grid,
                                                   std::size_t z0, std::size_t replicas,
                                                   const RunOptions& opt = {}) {
  require(!p_grid.empty(), ErrorKind::InvalidParameter, "p grid is empty");
  require(replicas >= 1, ErrorKind::InvalidParameter, "replicas must be >= 1");
  require(z0 >= 1 && z0 <= n, ErrorKind::InvalidParameter, "need 1 <= z0 <= n");
  const double p2 = n >= 3 ? thresholds(n).p2 : 0.0;
  std::vector<std::vector<ReplicaTransient>> reps(p_grid.size(), std::vector<ReplicaTransient>(replicas));
  parallel_for(p_grid.size() * replicas, opt.threads, [&](std::size_t k) {
    const std::size_t g = k / replicas;
    const std::size_t r = k % replicas;
    reps[g][r] = detail::transient_replica(n, p_grid[g], z0, p_grid[g] < p2, opt,
                                           replica_seed(opt, g, replicas, r));
  });
  std::vector<TransientTimes> out;
  for (std::size_t g = 0; g < p_grid.size(); ++g)
    out.push_back(detail::summarize_transient(p_grid[g], z0, p_grid[g] < p2, std::move(reps[g])));
  return out;
}

inline TransientTimes transient_times(std::size_t n, double p, std::size_t z0, std::size_t replicas,
                                      const RunOptions& opt = {}) {
  const double grid[] = {p};
  return transient_times(n, grid, z0, replicas, opt).front();
}

// ---- structural sweeps -----------------------------------------------------------

struct EquilibriumRecord {
  double p = 0.0;
  std::size_t z0 = 0;
  double N_eq_sim = 0.0;  // mean equilibrium size of a uniformly seeded epidemic
  double N_G_mean = 0.0;
};

/// Equilibrium sizes follow from the seeded components alone, so no dynamics
/// are simulated. All z0 values at a grid point share the replica networks.
inline std::vector<EquilibriumRecord> equilibrium_sweep(std::size_t n, std::span<const double> p_grid,
                                                        std::span<const std::size_t> z0_list,
                                                        std::size_t replicas, const RunOptions& opt = {}) {
  require(!p_grid.empty() && !z0_list.empty(), ErrorKind::InvalidParameter, "empty p grid or z0 list");
  require(replicas >= 1, ErrorKind::InvalidParameter, "replicas must be >= 1");
  for (auto z0 : z0_list) require(z0 >= 1 && z0 <= n, ErrorKind::InvalidParameter, "need 1 <= z0 <= n");
  // eq[g][r][z] and ng[g][r]
  std::vector<std::vector<std::vector<std::size_t>>> eq(
      p_grid.size(), std::vector<std::vector<std::size_t>>(replicas, std::vector<std::size_t>(z0_list.size())));
  std::vector<std::vector<std::size_t>> ng(p_grid.size(), std::vector<std::size_t>(replicas));
  parallel_for(p_grid.size() * replicas, opt.threads, [&](std::size_t k) {
    const std::size_t g = k / replicas;
    const std::size_t r = k % replicas;
    const std::uint64_t seed = replica_seed(opt, g, replicas, r);
    const Network net = generate_gnp(static_cast<node_t>(n), p_grid[g], seed);
    const ComponentDecomposition cd = components(net);
    ng[g][r] = cd.largest_size();
    for (std::size_t z = 0; z < z0_list.size(); ++z) {
      SimConfig cfg;
      cfg.z0 = z0_list[z];
      cfg.seed = seed;
      eq[g][r][z] = equilibrium_size(cd, place_initial(net, nullptr, cfg));
    }
  });
  std::vector<EquilibriumRecord> out;
  for (std::size_t g = 0; g < p_grid.size(); ++g) {
    double ngm = 0.0;
    for (auto v : ng[g]) ngm += static_cast<double>(v);
    ngm /= static_cast<double>(replicas);
    for (std::size_t z = 0; z < z0_list.size(); ++z) {
      double m = 0.0;
      for (std::size_t r = 0; r < replicas; ++r) m += static_cast<double>(eq[g][r][z]);
      out.push_back({p_grid[g], z0_list[z], m / static_cast<double>(replicas), ngm});
    }
  }
  return out;
}

struct ComponentSummary {
  double p = 0.0;
  std::uint64_t seed = 0;
  std::size_t m = 0;
  std::size_t N_G = 0;
  std::size_t S = 0;
};

struct ComponentSweepRow {
  double p = 0.0;
  double N_G = 0.0;
  double m = 0.0;
  double S = 0.0;
};

struct ComponentSweep {
  std::vector<ComponentSweepRow> rows;      // ensemble means per p
  std::vector<ComponentSummary> replicas;  // ordered by (p, replica)
};

inline ComponentSweep component_sweep(std::size_t n, std::span<const double> p_grid, std::size_t replicas,
                                      const RunOptions& opt = {}) {
  require(!p_grid.empty(), ErrorKind::InvalidParameter, "p grid is empty");
  require(replicas >= 1, ErrorKind::InvalidParameter, "replicas must be >= 1");
  ComponentSweep out;
  out.replicas.resize(p_grid.size() * replicas);
  parallel_for(p_grid.size() * replicas, opt.threads, [&](std::size_t k) {
    const std::size_t g = k / replicas;
    const std::size_t r = k % replicas;
    const std::uint64_t seed = replica_seed(opt, g, replicas, r);
    const ComponentDecomposition cd = components(generate_gnp(static_cast<node_t>(n), p_grid[g], seed));
    out.replicas[k] = {p_grid[g], seed, cd.count(), cd.largest_size(), cd.distinct_sizes()};
  });
  for (std::size_t g = 0; g < p_grid.size(); ++g) {
    ComponentSweepRow row{p_grid[g], 0.0, 0.0, 0.0};
    for (std::size_t r = 0; r < replicas; ++r) {
      const auto& s = out.replicas[g * replicas + r];
      row.N_G += static_cast<double>(s.N_G);
      row.m += static_cast<double>(s.m);
      row.S += static_cast<double>(s.S);
    }
    row.N_G /= static_cast<double>(replicas);
    row.m /= static_cast<double>(replicas);
    row.S /= static_cast<double>(replicas);
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace erepi
