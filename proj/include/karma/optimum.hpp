#pragma once

#include "karma/network.hpp"

namespace karma {

struct OptimumResult {
  Vec x_star;
  Vec x_star_quant;
  double cost = 0.0;          // C(x_star)
  double kkt_residual = 0.0;  // scale-free first-order certificate
  int iterations = 0;
};

// Euclidean projection onto {x : 1^T x = total, 0 <= x_j <= 1}.
Vec project_simplex_slice(const Vec& v, double total);

// Minimizes C(x) over the simplex slice {1^T x = p_go, x in [0,1]^n} by
// projected gradient descent with backtracking line search.
// Throws ValidationError for infeasible p_go and ConvergenceError if the
// KKT residual does not reach tol within max_iters.
OptimumResult solve_system_optimum(const Network& net, double p_go,
                                   double tol = 1e-9, int max_iters = 100000,
                                   const Vec* x0 = nullptr, int quant_decimals = 3);

// Componentwise half-away-from-zero rounding to the given decimals.
Vec quantize_flows(const Vec& x, int decimals);

}  // namespace karma
