#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "erepi/components.hpp"
#include "erepi/error.hpp"
#include "erepi/network.hpp"
#include "erepi/parallel.hpp"
#include "erepi/rng.hpp"

namespace erepi {

// One macro step is n node updates in every mode.
enum class UpdateMode {
  AsyncUniform,  // n node draws with replacement, state changes visible at once
  AsyncSweep,    // one random permutation of all nodes, applied in order
  Synchronous,   // every node evaluated against the previous step's state
};

enum class Placement { UniformRandom, LargestComponentOnly, ExplicitNodeList };

struct SimConfig {
  double lambda = 1.0;  // contact efficiency, in (0, 1]
  std::size_t z0 = 1;
  Placement placement = Placement::UniformRandom;
  std::vector<node_t> initial_nodes;  // only for ExplicitNodeList
  UpdateMode update_mode = UpdateMode::AsyncUniform;
  std::uint64_t seed = 0;
  std::uint32_t max_macro_steps = 100000;
  bool record_micro_steps = false;
};

enum class NodeStatus : std::uint8_t { Susceptible, Infected };

struct EpidemicState {
  std::vector<NodeStatus> status;
  std::size_t z = 0;
  std::uint32_t t_macro = 0;

  std::size_t x() const { return status.size() - z; }
};

struct Trajectory {
  std::vector<std::size_t> z;        // infected count at t = 0, 1, 2, ...
  std::vector<std::size_t> z_micro;  // after every node update, when requested
  bool absorbed = false;
  std::uint32_t t_absorb = 0;  // step of absorption; last recorded step otherwise
  std::uint64_t seed = 0;
  std::vector<node_t> initial_infected;

  std::size_t final_z() const { return z.back(); }
};

/// Total size of the components touched by `seeds`: where an SI process
/// started from them ends up.
inline std::size_t equilibrium_size(const ComponentDecomposition& cd, std::span<const node_t> seeds) {
  require(!seeds.empty(), ErrorKind::InvalidParameter, "initial infected set is empty");
  std::vector<char> hit(cd.count(), 0);
  std::size_t total = 0;
  for (node_t s : seeds) {
    require(s < cd.label.size(), ErrorKind::InvalidParameter, "seed node out of range");
    const auto c = cd.label[s];
    if (!hit[c]) {
      hit[c] = 1;
      total += cd.sizes[c];
    }
  }
  return total;
}

inline std::size_t equilibrium_size(const Network& net, std::span<const node_t> seeds) {
  require(!seeds.empty(), ErrorKind::InvalidParameter, "initial infected set is empty");
  return equilibrium_size(components(net), seeds);
}

// k distinct values from [0, pool), sorted (Floyd's algorithm).
inline std::vector<std::size_t> sample_distinct(std::size_t pool, std::size_t k, Rng& rng) {
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(k * 2);
  for (std::size_t j = pool - k; j < pool; ++j) {
    const auto t = static_cast<std::size_t>(rng.below(j + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::size_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

/// Chooses the initially infected nodes per cfg.placement. `cd` is only
/// consulted for LargestComponentOnly.
inline std::vector<node_t> place_initial(const Network& net, const ComponentDecomposition* cd,
                                         const SimConfig& cfg) {
  const node_t n = net.size();
  if (cfg.placement == Placement::ExplicitNodeList) {
    std::vector<node_t> nodes = cfg.initial_nodes;
    require(!nodes.empty(), ErrorKind::InvalidParameter, "explicit node list is empty");
    std::sort(nodes.begin(), nodes.end());
    require(std::adjacent_find(nodes.begin(), nodes.end()) == nodes.end(),
            ErrorKind::InvalidParameter, "explicit node list has duplicates");
    require(nodes.back() < n, ErrorKind::InvalidParameter, "explicit node out of range");
    return nodes;
  }
  require(cfg.z0 >= 1, ErrorKind::InvalidParameter, "z0 must be >= 1");
  require(cfg.z0 <= n, ErrorKind::InvalidParameter,
          "z0 = " + std::to_string(cfg.z0) + " exceeds n = " + std::to_string(n));
  Rng rng(cfg.seed, Stream::Sampling);
  std::vector<node_t> out;
  out.reserve(cfg.z0);
  if (cfg.placement == Placement::UniformRandom) {
    for (auto i : sample_distinct(n, cfg.z0, rng)) out.push_back(static_cast<node_t>(i));
    return out;
  }
  require(cd != nullptr, ErrorKind::InvalidParameter, "largest-component placement needs components");
  const auto pool = cd->largest_members();
  require(cfg.z0 <= pool.size(), ErrorKind::InvalidParameter,
          "z0 = " + std::to_string(cfg.z0) + " exceeds largest component size " +
              std::to_string(pool.size()));
  for (auto i : sample_distinct(pool.size(), cfg.z0, rng)) out.push_back(pool[i]);
  return out;
}

/// Node-level SI dynamics: a susceptible node i becomes infected with
/// probability lambda * Z_i / k_i when updated, Z_i being its infected
/// neighbours. Nodes of degree 0 are never infected unless seeded.
///
/// The process tracks the number of susceptible nodes that have at least one
/// infected neighbour; it is absorbed exactly when that count is zero.
class SiProcess {
 public:
  SiProcess(const Network& net, std::span<const node_t> initial, double lambda, UpdateMode mode,
            std::uint64_t seed)
      : net_(net), lambda_(lambda), mode_(mode), rng_(seed, Stream::Dynamics),
        infected_neighbours_(net.size(), 0) {
    require(lambda > 0.0 && lambda <= 1.0, ErrorKind::InvalidParameter, "lambda must lie in (0, 1]");
    require(!initial.empty(), ErrorKind::InvalidParameter, "initial infected set is empty");
    state_.status.assign(net.size(), NodeStatus::Susceptible);
    for (node_t i : initial) {
      require(i < net.size(), ErrorKind::InvalidParameter, "initial node out of range");
      require(state_.status[i] == NodeStatus::Susceptible, ErrorKind::InvalidParameter,
              "initial node listed twice");
      infect(i);
    }
    if (mode_ == UpdateMode::AsyncSweep) {
      order_.resize(net.size());
      for (node_t i = 0; i < net.size(); ++i) order_[i] = i;
    }
  }

  const EpidemicState& state() const { return state_; }
  bool absorbed() const { return frontier_ == 0; }

  // Susceptible nodes with at least one infected neighbour.
  std::size_t frontier() const { return frontier_; }

  // Advances one macro step (n node updates). `micro`, when given, receives Z
  // after each update.
  void macro_step(std::vector<std::size_t>* micro = nullptr) {
    const node_t n = net_.size();
    switch (mode_) {
      case UpdateMode::AsyncUniform:
        for (node_t u = 0; u < n; ++u) {
          update(static_cast<node_t>(rng_.below(n)));
          if (micro) micro->push_back(state_.z);
        }
        break;
      case UpdateMode::AsyncSweep:
        for (node_t i = n; i > 1; --i) std::swap(order_[i - 1], order_[rng_.below(i)]);
        for (node_t i : order_) {
          update(i);
          if (micro) micro->push_back(state_.z);
        }
        break;
      case UpdateMode::Synchronous: {
        flips_.clear();
        for (node_t i = 0; i < n; ++i)
          if (draws_infection(i)) flips_.push_back(i);
        std::size_t next = 0;
        for (node_t i = 0; i < n; ++i) {
          if (next < flips_.size() && flips_[next] == i) {
            infect(i);
            ++next;
          }
          if (micro) micro->push_back(state_.z);
        }
        break;
      }
    }
    ++state_.t_macro;
  }

 private:
  bool draws_infection(node_t i) {
    if (state_.status[i] == NodeStatus::Infected) return false;
    const std::uint32_t zi = infected_neighbours_[i];
    if (zi == 0) return false;
    return rng_.uniform() * static_cast<double>(net_.degree(i)) < lambda_ * zi;
  }

  void update(node_t i) {
    if (draws_infection(i)) infect(i);
  }

  void infect(node_t i) {
    state_.status[i] = NodeStatus::Infected;
    ++state_.z;
    if (infected_neighbours_[i] > 0) --frontier_;
    for (node_t j : net_.neighbours(i))
      if (++infected_neighbours_[j] == 1 && state_.status[j] == NodeStatus::Susceptible) ++frontier_;
  }

  const Network& net_;
  double lambda_;
  UpdateMode mode_;
  Rng rng_;
  EpidemicState state_;
  std::vector<std::uint32_t> infected_neighbours_;
  std::size_t frontier_ = 0;
  std::vector<node_t> order_;
  std::vector<node_t> flips_;
};

/// Runs the SI process until absorption or cfg.max_macro_steps.
inline Trajectory run_trajectory(const Network& net, const ComponentDecomposition* cd,
                                 const SimConfig& cfg) {
  Trajectory traj;
  traj.seed = cfg.seed;
  traj.initial_infected = place_initial(net, cd, cfg);
  SiProcess sim(net, traj.initial_infected, cfg.lambda, cfg.update_mode, cfg.seed);
  auto* micro = cfg.record_micro_steps ? &traj.z_micro : nullptr;
  traj.z.push_back(sim.state().z);
  if (micro) micro->push_back(sim.state().z);
  while (!sim.absorbed() && sim.state().t_macro < cfg.max_macro_steps) {
    sim.macro_step(micro);
    traj.z.push_back(sim.state().z);
  }
  traj.absorbed = sim.absorbed();
  traj.t_absorb = sim.state().t_macro;
  return traj;
}

inline Trajectory run_trajectory(const Network& net, const SimConfig& cfg) {
  if (cfg.placement == Placement::LargestComponentOnly) {
    const auto cd = components(net);
    return run_trajectory(net, &cd, cfg);
  }
  return run_trajectory(net, nullptr, cfg);
}

// First macro step with Z >= level, if any.
inline std::optional<std::uint32_t> first_step_reaching(const Trajectory& traj, double level) {
  for (std::size_t t = 0; t < traj.z.size(); ++t)
    if (static_cast<double>(traj.z[t]) >= level) return static_cast<std::uint32_t>(t);
  return std::nullopt;
}

// Time at which Z first reaches `level`, linearly interpolated between the
// bracketing macro steps.
inline std::optional<double> crossing_time(const Trajectory& traj, double level) {
  const auto t = first_step_reaching(traj, level);
  if (!t) return std::nullopt;
  if (*t == 0) return 0.0;
  const auto lo = static_cast<double>(traj.z[*t - 1]);
  const auto hi = static_cast<double>(traj.z[*t]);
  return (*t - 1) + (level - lo) / (hi - lo);
}

struct EnsembleTrajectory {
  std::vector<double> mean_z;  // pointwise mean, shorter series padded with their final value
  std::vector<Trajectory> replicas;
  std::vector<std::uint64_t> seeds;
};

inline std::vector<double> pointwise_mean(std::span<const Trajectory> runs) {
  std::size_t len = 0;
  for (const auto& r : runs) len = std::max(len, r.z.size());
  std::vector<double> mean(len, 0.0);
  for (const auto& r : runs)
    for (std::size_t t = 0; t < len; ++t)
      mean[t] += static_cast<double>(t < r.z.size() ? r.z[t] : r.z.back());
  for (double& m : mean) m /= static_cast<double>(runs.size());
  return mean;
}

/// Replica r reuses `net` and runs with seed cfg.seed + r.
inline EnsembleTrajectory run_ensemble(const Network& net, const SimConfig& cfg, std::size_t replicas,
                                       unsigned threads = 1) {
  require(replicas >= 1, ErrorKind::InvalidParameter, "replicas must be >= 1");
  std::optional<ComponentDecomposition> cd;
  if (cfg.placement == Placement::LargestComponentOnly) cd = components(net);
  EnsembleTrajectory out;
  out.replicas.resize(replicas);
  for (std::size_t r = 0; r < replicas; ++r) out.seeds.push_back(cfg.seed + r);
  parallel_for(replicas, threads, [&](std::size_t r) {
    SimConfig c = cfg;
    c.seed = out.seeds[r];
    out.replicas[r] = run_trajectory(net, cd ? &*cd : nullptr, c);
  });
  out.mean_z = pointwise_mean(out.replicas);
  return out;
}

// Recipe for drawing one fresh network per replica.
struct NetworkSpec {
  node_t n = 0;
  GenParams params;
};

/// Replica r draws a fresh network and runs its dynamics, both from seed
/// cfg.seed + r (on independent streams).
inline EnsembleTrajectory run_ensemble(const NetworkSpec& spec, const SimConfig& cfg,
                                       std::size_t replicas, unsigned threads = 1) {
  require(replicas >= 1, ErrorKind::InvalidParameter, "replicas must be >= 1");
  EnsembleTrajectory out;
  out.replicas.resize(replicas);
  for (std::size_t r = 0; r < replicas; ++r) out.seeds.push_back(cfg.seed + r);
  parallel_for(replicas, threads, [&](std::size_t r) {
    SimConfig c = cfg;
    c.seed = out.seeds[r];
    const Network net = generate(spec.n, spec.params, c.seed);
    out.replicas[r] = run_trajectory(net, c);
  });
  out.mean_z = pointwise_mean(out.replicas);
  return out;
}

}  // namespace erepi
