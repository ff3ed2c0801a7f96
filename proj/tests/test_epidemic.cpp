#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "erepi/components.hpp"
#include "erepi/epidemic.hpp"
#include "erepi/meanfield.hpp"
#include "erepi/stats.hpp"
#include "oracles.hpp"

using namespace erepi;

namespace {

SimConfig config(std::size_t z0, std::uint64_t seed, UpdateMode mode = UpdateMode::AsyncUniform) {
  SimConfig c;
  c.z0 = z0;
  c.seed = seed;
  c.update_mode = mode;
  return c;
}

constexpr UpdateMode kModes[] = {UpdateMode::AsyncUniform, UpdateMode::AsyncSweep, UpdateMode::Synchronous};

}  // namespace

TEST(Trajectory, AllInfectedAtStart) {
  const Network net = generate_gnp(50, 0.1, 1);
  const Trajectory t = run_trajectory(net, config(50, 1));
  EXPECT_TRUE(t.absorbed);
  EXPECT_EQ(t.t_absorb, 0u);
  EXPECT_EQ(t.z, std::vector<std::size_t>{50});
}

TEST(Trajectory, IsolatedSeed) {
  SimConfig c = config(1, 1);
  c.placement = Placement::ExplicitNodeList;
  c.initial_nodes = {3};
  const Network net(5, std::vector<Edge>{{0, 1}, {1, 2}});
  const Trajectory t = run_trajectory(net, c);
  EXPECT_TRUE(t.absorbed);
  EXPECT_EQ(t.t_absorb, 0u);
  EXPECT_EQ(t.z, std::vector<std::size_t>{1});
}

// K3, one infective, synchronous: each susceptible flips independently with
// probability 1/2, so Z(1) is 1, 2, 3 with probabilities 1/4, 1/2, 1/4.
TEST(Trajectory, TriangleSynchronousEnumeration) {
  const Network k3 = generate_gnp(3, 1.0, 0);
  double expected = 0;
  std::vector<double> prob(4, 0.0);
  for (int outcome = 0; outcome < 4; ++outcome) {
    const int z = 1 + (outcome & 1) + ((outcome >> 1) & 1);
    prob[z] += 0.25;
    expected += 0.25 * z;
  }
  ASSERT_DOUBLE_EQ(expected, 2.0);

  const int trials = 20000;
  std::vector<int> freq(4, 0);
  for (int s = 0; s < trials; ++s) {
    SimConfig c = config(1, static_cast<std::uint64_t>(s), UpdateMode::Synchronous);
    c.placement = Placement::ExplicitNodeList;
    c.initial_nodes = {0};
    c.max_macro_steps = 1;
    ++freq[run_trajectory(k3, c).z.at(1)];
  }
  for (int z = 1; z <= 3; ++z) {
    const double sd = std::sqrt(trials * prob[z] * (1 - prob[z]));
    EXPECT_NEAR(freq[z], trials * prob[z], 4.5 * sd) << "Z=" << z;
  }
}

// Hub with one infected neighbour out of four, lambda = 0.5: one synchronous
// step infects it with probability 0.5 * 1/4.
TEST(Trajectory, ContagionProbabilityIsLambdaTimesFraction) {
  const Network star(5, std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const int trials = 40000;
  int hits = 0;
  for (int s = 0; s < trials; ++s) {
    SimConfig c = config(1, static_cast<std::uint64_t>(s), UpdateMode::Synchronous);
    c.placement = Placement::ExplicitNodeList;
    c.initial_nodes = {1};
    c.lambda = 0.5;
    c.max_macro_steps = 1;
    hits += run_trajectory(star, c).z.at(1) == 2;
  }
  const double p = 0.125;
  EXPECT_NEAR(hits, trials * p, 4.5 * std::sqrt(trials * p * (1 - p)));
}

TEST(EquilibriumSize, Examples) {
  // components {0,1,2} and {3..9}
  std::vector<Edge> e{{0, 1}, {1, 2}};
  for (node_t i = 3; i < 9; ++i) e.emplace_back(i, i + 1);
  const Network net(10, e);
  EXPECT_EQ(equilibrium_size(net, std::vector<node_t>{1}), 3u);
  EXPECT_EQ(equilibrium_size(net, std::vector<node_t>{5}), 7u);
  EXPECT_EQ(equilibrium_size(net, std::vector<node_t>{0, 9}), 10u);
  EXPECT_THROW(equilibrium_size(net, std::vector<node_t>{}), Error);

  const Network g = generate_gnp(2000, 0.002, 3);
  const auto cd = components(g);
  const auto members = cd.largest_members();
  const std::vector<node_t> seeds(members.begin(), members.begin() + 5);
  EXPECT_EQ(equilibrium_size(cd, seeds), cd.largest_size());
}

// Monotone, conserving, and confined to the seeded components, in every mode.
TEST(Trajectory, InvariantsAgainstReachability) {
  std::mt19937 gen(77);
  int checked = 0;
  for (int g = 0; g < 200; ++g) {
    const Network net = oracle::small_random(gen);
    for (auto mode : kModes) {
      SimConfig c = config(1 + g % std::min<node_t>(3, net.size()), static_cast<std::uint64_t>(g), mode);
      c.max_macro_steps = 5000;
      const Trajectory t = run_trajectory(net, c);
      for (std::size_t s = 1; s < t.z.size(); ++s) EXPECT_GE(t.z[s], t.z[s - 1]);
      ASSERT_TRUE(t.absorbed);
      const auto reach = oracle::reachable(net, t.initial_infected);
      const auto expect = static_cast<std::size_t>(std::count(reach.begin(), reach.end(), true));
      EXPECT_EQ(t.final_z(), expect);
      EXPECT_EQ(equilibrium_size(net, t.initial_infected), expect);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 600);
}

TEST(SiProcess, StateStaysConsistent) {
  const Network net = generate_gnp(400, 0.01, 8);
  const std::vector<node_t> init{0, 7};
  for (auto mode : kModes) {
    SiProcess sim(net, init, 1.0, mode, 4);
    while (!sim.absorbed()) {
      sim.macro_step();
      const auto& st = sim.state();
      const auto z = static_cast<std::size_t>(std::count(st.status.begin(), st.status.end(), NodeStatus::Infected));
      EXPECT_EQ(st.z, z);
      EXPECT_EQ(st.x() + st.z, net.size());
      // absorption is structural: no S-I edge remains
      std::size_t frontier = 0;
      for (node_t i = 0; i < net.size(); ++i) {
        if (st.status[i] == NodeStatus::Infected) continue;
        for (node_t j : net.neighbours(i))
          if (st.status[j] == NodeStatus::Infected) {
            ++frontier;
            break;
          }
      }
      EXPECT_EQ(sim.frontier(), frontier);
    }
  }
}

TEST(Trajectory, MacroStepIsNUpdates) {
  const Network net = generate_gnp(300, 0.05, 2);
  for (auto mode : kModes) {
    SimConfig c = config(3, 5, mode);
    c.record_micro_steps = true;
    const Trajectory t = run_trajectory(net, c);
    EXPECT_EQ(t.z_micro.size(), 1 + 300 * (t.z.size() - 1));
    for (std::size_t s = 0; s < t.z.size(); ++s) EXPECT_EQ(t.z_micro[300 * s], t.z[s]);
  }
}

TEST(Trajectory, CapLeavesRunUnabsorbed) {
  std::vector<Edge> path;
  for (node_t i = 0; i + 1 < 200; ++i) path.emplace_back(i, i + 1);
  const Network net(200, path);
  SimConfig c = config(1, 3);
  c.lambda = 0.05;
  c.max_macro_steps = 2;
  const Trajectory t = run_trajectory(net, c);
  EXPECT_FALSE(t.absorbed);
  EXPECT_EQ(t.z.size(), 3u);
  EXPECT_EQ(t.t_absorb, 2u);
}

TEST(Trajectory, ConnectedRunsAbsorbQuickly) {
  const node_t n = 2000;
  const double p = 1.5 * std::log(n) / n;
  for (auto mode : kModes)
    for (std::uint64_t s = 1; s <= 3; ++s) {
      const Network net = generate_gnp(n, p, s);
      SimConfig c = config(1, s, mode);
      c.max_macro_steps = 1000;
      EXPECT_TRUE(run_trajectory(net, c).absorbed);
    }
}

TEST(Placement, Variants) {
  const Network net = generate_gnp(3000, 0.0002, 6);
  const auto cd = components(net);
  SimConfig c = config(20, 9);
  c.placement = Placement::LargestComponentOnly;
  const auto seeds = place_initial(net, &cd, c);
  EXPECT_EQ(seeds.size(), 20u);
  for (auto s : seeds) EXPECT_EQ(cd.label[s], cd.largest_label);

  c.z0 = cd.largest_size() + 1;
  EXPECT_THROW(place_initial(net, &cd, c), Error);

  c.placement = Placement::UniformRandom;
  c.z0 = 3001;
  EXPECT_THROW(place_initial(net, nullptr, c), Error);
  c.z0 = 3000;
  EXPECT_EQ(place_initial(net, nullptr, c).size(), 3000u);

  c.placement = Placement::ExplicitNodeList;
  c.initial_nodes = {5, 2, 9};
  EXPECT_EQ(place_initial(net, nullptr, c), (std::vector<node_t>{2, 5, 9}));
  c.initial_nodes = {5, 5};
  EXPECT_THROW(place_initial(net, nullptr, c), Error);
}

TEST(Ensemble, SeedsAndDeterminism) {
  const Network net = generate_gnp(1000, 0.01, 3);
  const SimConfig c = config(2, 40);
  const auto a = run_ensemble(net, c, 6, 1);
  const auto b = run_ensemble(net, c, 6, 3);
  EXPECT_EQ(a.seeds, (std::vector<std::uint64_t>{40, 41, 42, 43, 44, 45}));
  EXPECT_EQ(a.mean_z, b.mean_z);
  for (std::size_t r = 0; r < 6; ++r) EXPECT_EQ(a.replicas[r].z, b.replicas[r].z);
  for (double m : a.mean_z) {
    EXPECT_GE(m, 2.0);
    EXPECT_LE(m, 1000.0);
  }

  const NetworkSpec spec{800, GenParams::gnp(0.01)};
  const auto f1 = run_ensemble(spec, c, 4, 1);
  const auto f2 = run_ensemble(spec, c, 4, 2);
  EXPECT_EQ(f1.mean_z, f2.mean_z);
}

TEST(Ensemble, MeanPadsWithFinalValue) {
  Trajectory a, b;
  a.z = {1, 3, 5};
  b.z = {1, 2};
  const std::vector<Trajectory> runs{a, b};
  EXPECT_EQ(pointwise_mean(runs), (std::vector<double>{1.0, 2.5, 3.5}));
}

// Dense network, one infective. Each replica starts after a random delay (the
// single seed's first contacts), so the raw ensemble mean trails the
// logistic by about one step; with the onset removed every replica follows
// the beta = 1 logistic closely.
TEST(Ensemble, DenseNetworkFollowsLogistic) {
  const node_t n = 10000;
  const Network net = generate_gnp(n, 0.05, 1);
  const auto ens = run_ensemble(net, config(1, 1), 10);
  const MeanFieldParams mf{double(n), 1.0, 1.0};
  const double t_half = analytic_t_rho(0.5, mf);
  double aligned = 0;
  for (const auto& tr : ens.replicas) {
    const double shift = *crossing_time(tr, 0.5 * n) - t_half;
    for (std::size_t t = 0; t < tr.z.size(); ++t)
      if (double(t) >= shift) aligned = std::max(aligned, std::abs(double(tr.z[t]) - logistic_z(double(t) - shift, mf)));
  }
  EXPECT_LT(aligned, 0.05 * n);

  double raw = 0;
  for (std::size_t t = 0; t < ens.mean_z.size(); ++t)
    raw = std::max(raw, std::abs(ens.mean_z[t] - logistic_z(double(t), mf)));
  RecordProperty("raw_mean_max_deviation", std::to_string(raw));
}

// The spread of the half-time shrinks as more initial infectives are seeded.
TEST(Ensemble, HalfTimeSpreadFallsWithZ0) {
  const node_t n = 10000;
  const Network net = generate_gnp(n, 0.001, 5);
  double previous = INFINITY;
  for (std::size_t z0 : {1, 5, 10, 50, 100, 500}) {
    const auto ens = run_ensemble(net, config(z0, 100), 25);
    std::vector<double> half;
    for (const auto& tr : ens.replicas) half.push_back(*crossing_time(tr, 0.5 * tr.final_z()));
    const double sd = sample_sd(half);
    EXPECT_LT(sd, previous) << "z0=" << z0;
    previous = sd;
  }
}

TEST(CrossingTime, Interpolates) {
  Trajectory t;
  t.z = {1, 3, 9, 10};
  EXPECT_EQ(first_step_reaching(t, 5.0), 2u);
  EXPECT_DOUBLE_EQ(*crossing_time(t, 6.0), 1.5);
  EXPECT_FALSE(first_step_reaching(t, 11.0).has_value());
}
