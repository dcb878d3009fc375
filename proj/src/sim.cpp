#include "karma/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "karma/errors.hpp"
#include "karma/oracle.hpp"

namespace karma {

long long KarmaInitSpec::sample(Rng& rng, int p1) const {
  switch (kind) {
    case KarmaInitKind::UniformRange:
      return rng.uniform_int(std::llround(lo_mult * p1), std::llround(hi_mult * p1));
    case KarmaInitKind::TwoPoint:
      return rng.bernoulli(0.5) ? std::llround(lo_mult * p1)
                                : std::llround(hi_mult * p1);
    case KarmaInitKind::Delta:
      return delta_value;
  }
  return delta_value;
}

std::vector<Agent> init_population(int m, const KarmaInitSpec& karma_init,
                                   const KrefDist& kref_dist, int p1,
                                   std::uint64_t seed) {
  kref_dist.validate();
  Rng karma_rng = Rng::stream(seed, 1);
  Rng kref_rng = Rng::stream(seed, 2);
  Vec cum(kref_dist.weights.size());
  std::partial_sum(kref_dist.weights.begin(), kref_dist.weights.end(), cum.begin());

  std::vector<Agent> agents(m);
  for (Agent& a : agents) {
    a.karma = karma_init.sample(karma_rng, p1);
    const double u = kref_rng.u01();
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    const std::size_t idx =
        std::min<std::size_t>(it - cum.begin(), kref_dist.support.size() - 1);
    a.k_ref = kref_dist.support[idx];
  }
  return agents;
}

EquilibriumOutcome daily_equilibrium(std::vector<Agent>& agents,
                                     const PriceVector& p, const Network& net,
                                     const Population& pop,
                                     const std::vector<long long>& initial_counts,
                                     int m, Rng& rng, int max_sweeps) {
  const int n = net.n;
  const double s_bar = pop.s_bar();

  std::vector<int> travelers;
  for (std::size_t i = 0; i < agents.size(); ++i)
    if (agents[i].traveling) travelers.push_back(static_cast<int>(i));

  auto flows_of = [&](const std::vector<long long>& counts) {
    Vec x(n);
    for (int j = 0; j < n; ++j)
      x[j] = static_cast<double>(counts[j]) / static_cast<double>(m);
    return x;
  };

  // Initial assignment: everyone best-responds to the previous day's flows.
  const Vec d_prev = discomfort(net, flows_of(initial_counts));
  EquilibriumOutcome out;
  out.counts.assign(n, 0);
  rng.shuffle(travelers);
  for (int i : travelers) {
    Agent& a = agents[i];
    UserContext ctx{a.karma, a.k_ref, a.sensitivity, pop.horizon};
    a.arc = best_response_d(ctx, p, d_prev, pop.s_min, pop.s_max, s_bar).arc;
    ++out.counts[a.arc];
  }

  // Deviation-aware discomfort for an agent currently on `arc`: every other
  // arc is evaluated at its post-move flow (one more traveler), the current
  // arc at its actual flow. Without this, pairs of agents each see the
  // other's arc as marginally cheaper and swap forever.
  auto deviation_discomfort = [&](int arc) {
    const Vec x = flows_of(out.counts);
    Vec d(n);
    for (int j = 0; j < n; ++j)
      d[j] = discomfort_arc(net, j,
                            j == arc ? x[j] : x[j] + 1.0 / static_cast<double>(m));
    return d;
  };

  // Sequential best-response sweeps. An agent moves only when their current
  // arc is strictly suboptimal at the post-deviation flows.
  for (out.sweeps = 1; out.sweeps <= max_sweeps; ++out.sweeps) {
    rng.shuffle(travelers);
    int changes = 0;
    for (int i : travelers) {
      Agent& a = agents[i];
      UserContext ctx{a.karma, a.k_ref, a.sensitivity, pop.horizon};
      const Vec d_dev = deviation_discomfort(a.arc);
      const BestResponseSolution sol =
          best_response_d(ctx, p, d_dev, pop.s_min, pop.s_max, s_bar);
      if (std::find(sol.optimal_set.begin(), sol.optimal_set.end(), a.arc) !=
          sol.optimal_set.end())
        continue;
      --out.counts[a.arc];
      ++out.counts[sol.arc];
      a.arc = sol.arc;
      ++changes;
    }
    if (changes == 0) break;
  }

  // Post-hoc certificate: no traveler may improve by more than 1e-9 by
  // switching arcs unilaterally (independent oracle arithmetic, same
  // post-deviation flow accounting).
  out.converged = true;
  for (int i : travelers) {
    const Agent& a = agents[i];
    UserContext ctx{a.karma, a.k_ref, a.sensitivity, pop.horizon};
    const Vec d_dev = deviation_discomfort(a.arc);
    const double cur = oracle_arc_objective(ctx, p, d_dev, s_bar, a.arc);
    const double best = oracle_best_response_d(ctx, p, d_dev, s_bar).objective;
    if (cur - best > 1e-9) {
      out.converged = false;
      break;
    }
  }
  return out;
}

DayRecord step_day(std::vector<Agent>& agents, const PriceVector& p,
                   const Network& net, const Population& pop, const Vec& x_star,
                   int day, std::uint64_t master_seed,
                   std::vector<long long>& prev_counts) {
  const int m = static_cast<int>(agents.size());
  const std::uint64_t base = static_cast<std::uint64_t>(day) * 8;
  Rng travel_rng = Rng::stream(master_seed, base + 1);
  Rng sens_rng = Rng::stream(master_seed, base + 2);
  Rng sweep_rng = Rng::stream(master_seed, base + 3);
  Rng alloc_rng = Rng::stream(master_seed, base + 4);

  for (Agent& a : agents) {
    a.sensitivity = sens_rng.uniform_real(pop.s_min, pop.s_max);
    a.traveling = travel_rng.bernoulli(pop.p_go());
    if (a.traveling) {
      // Adversarial prices can strand a traveler; they stay home rather
      // than face an infeasible decision problem.
      UserContext ctx{a.karma, a.k_ref, a.sensitivity, pop.horizon};
      if (!is_feasible(ctx, p)) a.traveling = false;
    }
    a.arc = -1;
  }

  const EquilibriumOutcome eq =
      daily_equilibrium(agents, p, net, pop, prev_counts, m, sweep_rng);

  DayRecord rec;
  rec.day = day;
  rec.counts = eq.counts;
  rec.converged = eq.converged;
  rec.travelers = std::accumulate(eq.counts.begin(), eq.counts.end(), 0LL);

  // Karma update (exact integer bookkeeping).
  for (Agent& a : agents)
    if (a.traveling) a.karma -= p[a.arc];

  const Vec x = rec.flows(net.n, m);
  const Vec d_now = discomfort(net, x);
  const Vec d_star = discomfort(net, x_star);
  const double s_bar = pop.s_bar();
  const double c_star = societal_cost(net, x_star);
  rec.rel_cost = (societal_cost(net, x) - c_star) / c_star;

  // Random-allocation baseline: travelers assigned to arcs in proportions
  // x*/P_go, blind to sensitivity.
  Vec cum(net.n);
  std::partial_sum(x_star.begin(), x_star.end(), cum.begin());
  const double total = cum.back();
  double lit_num = 0.0, lit_den = 0.0, mech = 0.0, random_alloc = 0.0;
  double s_dev = 0.0;
  for (const Agent& a : agents) {
    s_dev += (a.sensitivity - s_bar) / s_bar;
    if (!a.traveling) continue;
    const double dd = d_now[a.arc];
    lit_num += a.sensitivity * dd + s_bar * dd;
    lit_den += s_bar * dd;
    mech += a.sensitivity * dd;
    const double u = alloc_rng.u01() * total;
    const int arc = static_cast<int>(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    random_alloc += a.sensitivity * d_star[std::min(arc, net.n - 1)];
  }
  rec.dbar_literal = rec.travelers > 0 ? lit_num / lit_den : 0.0;
  rec.dbar_interpreted = rec.travelers > 0 ? mech / random_alloc - 1.0 : 0.0;
  rec.sbar_dev = s_dev / m;

  double mean = 0.0;
  for (const Agent& a : agents) mean += static_cast<double>(a.karma);
  mean /= m;
  double var = 0.0;
  for (const Agent& a : agents) {
    const double dk = static_cast<double>(a.karma) - mean;
    var += dk * dk;
  }
  rec.k_mean = mean;
  rec.k_std = std::sqrt(var / m);

  prev_counts = rec.counts;
  return rec;
}

SimTrace run_simulation(const Network& net, const Population& pop,
                        const SimConfig& cfg, const PriceVector& p,
                        const Vec& x_star) {
  net.validate();
  pop.validate();
  const KrefDist kref = pop.kref.materialize(p);
  std::vector<Agent> agents =
      init_population(cfg.num_agents, cfg.karma_init, kref, p.front(), cfg.seed);

  SimTrace trace;
  trace.num_agents = cfg.num_agents;
  trace.days.reserve(cfg.days);
  std::vector<long long> prev_counts(net.n, 0);
  for (int day = 1; day <= cfg.days; ++day)
    trace.days.push_back(
        step_day(agents, p, net, pop, x_star, day, cfg.seed, prev_counts));
  return trace;
}

}  // namespace karma
