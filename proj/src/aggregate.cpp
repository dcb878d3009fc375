#include "karma/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "karma/errors.hpp"

namespace karma {

AggregateResult steady_state_flows(const PriceVector& p, const Vec& x_eval,
                                   const Network& net, const Population& pop,
                                   std::optional<long long> k0_opt,
                                   long long power_iter_cap) {
  const Vec d = discomfort(net, x_eval);
  for (int j = 1; j < net.n; ++j)
    if (!(d[j] > d[j - 1]))
      throw AssumptionError(
          "steady_state_flows: discomforts at x_eval must be strictly "
          "increasing in arc order");

  const KrefDist theta = pop.kref.materialize(p);
  const long long k0 = k0_opt.value_or(static_cast<long long>(p.front()));
  const double p_go = pop.p_go();

  AggregateResult out;
  out.flows.assign(net.n, 0.0);
  for (std::size_t r = 0; r < theta.support.size(); ++r) {
    const long long k_ref = theta.support[r];
    const KarmaChain chain =
        build_chain(k0, k_ref, p, x_eval, net, pop, power_iter_cap);
    Vec contrib(net.n, 0.0);  // P_sel * pi_inf
    for (std::size_t v = 0; v < chain.states.size(); ++v) {
      const double w = chain.pi_inf[v];
      if (w == 0.0) continue;
      for (int j = 0; j < net.n; ++j) contrib[j] += chain.P_sel[v][j] * w;
    }
    for (int j = 0; j < net.n; ++j)
      out.flows[j] += p_go * theta.weights[r] * contrib[j];
    out.per_kref.emplace_back(k_ref, std::move(contrib));
  }
  out.cost = societal_cost(net, out.flows);
  return out;
}

Vec wardrop_fixed_point(const PriceVector& p, const Network& net,
                        const Population& pop, const Vec& x0,
                        std::optional<long long> k0, double damping, double tol,
                        int max_iters) {
  Vec x = x0;
  double diff = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    const AggregateResult agg = steady_state_flows(p, x, net, pop, k0);
    diff = 0.0;
    for (int j = 0; j < net.n; ++j) {
      const double nx = (1.0 - damping) * x[j] + damping * agg.flows[j];
      diff = std::max(diff, std::abs(nx - x[j]));
      x[j] = nx;
    }
    if (diff <= tol) return x;
  }
  throw ConvergenceError("wardrop_fixed_point: change " + std::to_string(diff) +
                             " after max iterations",
                         diff);
}

}  // namespace karma
