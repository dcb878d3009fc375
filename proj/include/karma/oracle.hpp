#pragma once

#include "karma/best_response.hpp"

namespace karma {

// Brute-force best-response reference: for every affordable integer choice it
// enumerates the LP vertices of the future-plan polytope (single-entry plans
// and two-entry plans on the Karma-budget boundary) and takes the global
// minimum. Exhaustive and independent of the closed form; used in tests and
// cross-validation.
BestResponseSolution oracle_best_response_d(const UserContext& ctx,
                                            const PriceVector& p, const Vec& d,
                                            double s_bar);

BestResponseSolution oracle_best_response(const UserContext& ctx,
                                          const PriceVector& p, const Vec& x,
                                          const Network& net, double s_bar);

// Optimal objective conditional on the integer choice being `arc`;
// +infinity when that choice is infeasible.
double oracle_arc_objective(const UserContext& ctx, const PriceVector& p,
                            const Vec& d, double s_bar, int arc);

}  // namespace karma
