#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "karma/chain.hpp"
#include "karma/network.hpp"

namespace karma {

struct AggregateResult {
  Vec flows;                                        // x_hat, sums to P_go
  std::vector<std::pair<long long, Vec>> per_kref;  // k_ref -> chain flow contribution
  double cost = 0.0;                                // C(x_hat)
};

// Steady-state aggregate flows: the theta_p-weighted aggregate of per-k_ref
// chain stationary selections, evaluated at fixed flows x_eval.
// x = P_go * sum_kref P_sel(kref) pi_inf(k0, kref) theta_p(kref).
// k0 = nullopt means "first price".
// Requires strictly increasing discomforts at x_eval; throws AssumptionError
// otherwise.
AggregateResult steady_state_flows(const PriceVector& p, const Vec& x_eval,
                                   const Network& net, const Population& pop,
                                   std::optional<long long> k0 = std::nullopt,
                                   long long power_iter_cap = 1000000);

// Damped fixed-point iteration x <- (1 - damping) x + damping * flows(p, x)
// for the stationary equilibrium flows themselves. Diagnostic; existence /
// convergence are assumed, so non-convergence raises ConvergenceError.
// The iteration starts from x0 (typically the system optimum; the uniform
// split easily violates the arc-ordering assumption).
Vec wardrop_fixed_point(const PriceVector& p, const Network& net,
                        const Population& pop, const Vec& x0,
                        std::optional<long long> k0 = std::nullopt,
                        double damping = 0.3, double tol = 1e-8,
                        int max_iters = 500);

}  // namespace karma
