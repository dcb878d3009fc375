#include "karma/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "karma/errors.hpp"

namespace karma {

namespace {
constexpr double kObjTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimal future discomfort d^T ybar for the fixed integer choice j, by
// enumerating the LP vertices; +inf when j is infeasible. Vertex membership
// is tested in integer arithmetic.
double best_future(const UserContext& ctx, const PriceVector& p, const Vec& d,
                   int j, Vec* plan_out) {
  const int n = static_cast<int>(p.size());
  if (ctx.k < p[j]) return kInf;  // daily budget (1c)
  // Future budget from (1b): T p^T ybar <= k - p_j - k_ref =: B.
  const long long B = ctx.k - p[j] - ctx.k_ref;
  const long long T = ctx.horizon;

  double best = kInf;
  Vec plan;
  // Vertices with a single nonzero entry.
  for (int i = 0; i < n; ++i) {
    if (T * p[i] <= B && d[i] < best) {
      best = d[i];
      plan.assign(n, 0.0);
      plan[i] = 1.0;
    }
  }
  // Vertices with two nonzero entries on the budget boundary:
  // ybar_i = (B - T p_a) / (T (p_i - p_a)), ybar_a = 1 - ybar_i.
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < n; ++i) {
      if (i == a || p[i] == p[a]) continue;
      const long long num = B - T * p[a];
      const long long den = T * (p[i] - p[a]);
      const bool in_range =
          den > 0 ? (num >= 0 && num <= den) : (num <= 0 && num >= den);
      if (!in_range) continue;
      const double yi = static_cast<double>(num) / static_cast<double>(den);
      const double val = d[a] * (1.0 - yi) + d[i] * yi;
      if (val < best) {
        best = val;
        plan.assign(n, 0.0);
        plan[a] = 1.0 - yi;
        plan[i] = yi;
      }
    }
  }
  if (plan_out) *plan_out = std::move(plan);
  return best;
}

}  // namespace

double oracle_arc_objective(const UserContext& ctx, const PriceVector& p,
                            const Vec& d, double s_bar, int arc) {
  const double future = best_future(ctx, p, d, arc, nullptr);
  if (!std::isfinite(future)) return kInf;
  return ctx.s * d[arc] + ctx.horizon * s_bar * future;
}

BestResponseSolution oracle_best_response_d(const UserContext& ctx,
                                            const PriceVector& p, const Vec& d,
                                            double s_bar) {
  if (!is_feasible(ctx, p))
    throw FeasibilityError("oracle_best_response: no affordable plan at k=" +
                           std::to_string(ctx.k));
  const int n = static_cast<int>(p.size());

  double best_obj = kInf;
  std::vector<double> obj_per_arc(n, kInf);
  std::vector<Vec> plan_per_arc(n);
  for (int j = 0; j < n; ++j) {
    Vec plan;
    const double future = best_future(ctx, p, d, j, &plan);
    if (!std::isfinite(future)) continue;
    obj_per_arc[j] = ctx.s * d[j] + ctx.horizon * s_bar * future;
    plan_per_arc[j] = std::move(plan);
    best_obj = std::min(best_obj, obj_per_arc[j]);
  }
  if (!std::isfinite(best_obj))
    throw FeasibilityError("oracle_best_response: no choosable arc (unexpected)");

  BestResponseSolution sol;
  sol.objective = best_obj;
  for (int j = 0; j < n; ++j)
    if (obj_per_arc[j] <= best_obj + kObjTol) sol.optimal_set.push_back(j);
  sol.arc = sol.optimal_set.front();
  sol.future_plan = plan_per_arc[sol.arc];
  return sol;
}

BestResponseSolution oracle_best_response(const UserContext& ctx,
                                          const PriceVector& p, const Vec& x,
                                          const Network& net, double s_bar) {
  return oracle_best_response_d(ctx, p, discomfort(net, x), s_bar);
}

}  // namespace karma
