#pragma once

#include <cstdint>
#include <vector>

#include "karma/best_response.hpp"
#include "karma/network.hpp"
#include "karma/rng.hpp"

namespace karma {

struct Agent {
  long long karma = 0;
  long long k_ref = 0;
  double sensitivity = 0.0;  // redrawn daily
  bool traveling = false;
  int arc = -1;  // today's choice, -1 = home
};

// Initial-Karma distribution. UniformRange draws a uniform integer in
// [lo_mult p1, hi_mult p1] (the default); TwoPoint picks one of the two
// endpoints. Multipliers apply to p_1.
enum class KarmaInitKind { UniformRange, TwoPoint, Delta };

struct KarmaInitSpec {
  KarmaInitKind kind = KarmaInitKind::UniformRange;
  double lo_mult = 25.0;
  double hi_mult = 50.0;
  long long delta_value = 0;  // for Delta

  long long sample(Rng& rng, int p1) const;
};

struct SimConfig {
  int num_agents = 1000;
  int days = 600;
  KarmaInitSpec karma_init;
  std::uint64_t seed = 0;
};

struct DayRecord {
  int day = 0;
  std::vector<long long> counts;  // per-arc traveler counts (exact)
  long long travelers = 0;
  double k_mean = 0.0;  // after the day's Karma update
  double k_std = 0.0;
  double rel_cost = 0.0;        // (C(x(t)) - C(x*)) / C(x*)
  double dbar_literal = 0.0;    // the displayed-formula variant
  double dbar_interpreted = 0.0;  // mech/random perceived-discomfort ratio - 1
  double sbar_dev = 0.0;        // (1/M) sum (s_i - s_bar) / s_bar
  bool converged = true;        // daily equilibrium certificate

  Vec flows(int n, int m) const {
    Vec x(n);
    for (int j = 0; j < n; ++j)
      x[j] = static_cast<double>(counts[j]) / static_cast<double>(m);
    return x;
  }
};

struct SimTrace {
  int num_agents = 0;
  std::vector<DayRecord> days;
};

// Seed-deterministic agent initialization.
std::vector<Agent> init_population(int m, const KarmaInitSpec& karma_init,
                                   const KrefDist& kref_dist, int p1,
                                   std::uint64_t seed);

struct EquilibriumOutcome {
  std::vector<long long> counts;  // per-arc
  bool converged = false;         // no profitable unilateral deviation found
  int sweeps = 0;
};

// Sequential best-response sweeps over the traveling agents (randomized
// order, incremental flow updates) until a full sweep changes nothing, then a
// post-hoc unilateral-deviation scan as the convergence certificate.
EquilibriumOutcome daily_equilibrium(std::vector<Agent>& agents,
                                     const PriceVector& p, const Network& net,
                                     const Population& pop,
                                     const std::vector<long long>& initial_counts,
                                     int m, Rng& rng, int max_sweeps = 50);

// One simulated day: travel draws, sensitivities, equilibrium, Karma update,
// metrics. `x_star` is the system optimum used by the cost/discomfort metrics.
DayRecord step_day(std::vector<Agent>& agents, const PriceVector& p,
                   const Network& net, const Population& pop, const Vec& x_star,
                   int day, std::uint64_t master_seed,
                   std::vector<long long>& prev_counts);

// Full repeated-game run; deterministic given the seed.
SimTrace run_simulation(const Network& net, const Population& pop,
                        const SimConfig& cfg, const PriceVector& p,
                        const Vec& x_star);

}  // namespace karma
