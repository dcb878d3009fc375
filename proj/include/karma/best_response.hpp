#pragma once

#include <optional>
#include <vector>

#include "karma/network.hpp"

namespace karma {

using PriceVector = std::vector<int>;

// A traveling user's daily decision context.
struct UserContext {
  long long k = 0;      // current Karma
  long long k_ref = 0;  // reference Karma the user will not plan below
  double s = 0.0;       // today's sensitivity
  int horizon = 1;      // T
};

// Result of arc screening: dominated arcs, discomfort duplicates,
// and the surviving strictly ordered arcs (original indices, by increasing
// discomfort / decreasing price).
struct ArcReduction {
  std::vector<int> unreasonable;  // J_u
  std::vector<int> duplicates;    // J_e
  std::vector<int> kept;
};

// Sensitivity-threshold table over the kept arcs.
struct ThresholdTable {
  // All vectors are indexed by position in `kept`.
  std::vector<int> kept;           // original arc indices
  Vec d;                           // discomfort, strictly increasing
  std::vector<int> p;              // prices, strictly decreasing
  std::vector<bool> feasible;      // k >= max(0, p_j, k(j,n))
  std::vector<bool> admissible;    // gamma_bar_j >= gamma_under_j
  Vec gamma_bar;                   // upper sensitivity cutoffs
  Vec gamma_under;                 // lower sensitivity cutoffs
  Vec gamma;                       // saturated thresholds, size kept+1; gamma[0] = s_max/s_bar
  std::vector<Vec> future_plans;   // ybar*_j over kept arcs (<= 2 nonzero entries)

  // Number of kept arcs.
  int size() const { return static_cast<int>(kept.size()); }
};

struct BestResponseSolution {
  int arc = -1;               // chosen original arc index (0-based)
  std::vector<int> optimal_set;  // all original arcs attaining the optimum
  Vec future_plan;            // ybar* over original arcs
  double objective = 0.0;     // s d_j + T s_bar d^T ybar*
};

// Plan feasibility: k >= max(0, k_ref + (min_j p_j) (T+1)).
bool is_feasible(const UserContext& ctx, const PriceVector& p);

// Arc screening. `order` must list arc indices sorted by
// nondecreasing discomfort (the caller carries the permutation); d and p are
// indexed by original arc.
ArcReduction reduce_arcs(const Vec& d, const PriceVector& p,
                         const std::vector<int>& order);

// Convenience: sort by discomfort (price, then index, as tie-breaks) and reduce.
ArcReduction reduce_arcs(const Vec& d, const PriceVector& p);

// Threshold construction for a user with Karma k and reference k_ref
// (sensitivity-independent). Throws FeasibilityError when no plan is affordable.
ThresholdTable threshold_table(long long k, long long k_ref, int horizon,
                               const PriceVector& p, const Vec& d,
                               double s_min, double s_max, double s_bar);

// Exact daily best response via the closed form, lifted back to the
// original arcs. Ties are broken by lowest original arc index; the full
// optimal set is exposed for tests.
BestResponseSolution best_response(const UserContext& ctx, const PriceVector& p,
                                   const Vec& x, const Network& net,
                                   double s_min, double s_max, double s_bar);

// Same, with a precomputed discomfort vector.
BestResponseSolution best_response_d(const UserContext& ctx, const PriceVector& p,
                                     const Vec& d, double s_min, double s_max,
                                     double s_bar);

// P(j | k, k_ref, p, x): per-arc probability that a traveling user at Karma k
// picks arc j, in closed form for the uniform sensitivity distribution.
// Requires d(x) nondecreasing in the given arc order; throws AssumptionError
// otherwise (sort / reduce_arcs first).
Vec choice_probability(long long k, long long k_ref, const PriceVector& p,
                       const Vec& x, const Network& net, const Population& pop);

// Variant taking the discomfort vector directly.
Vec choice_probability_d(long long k, long long k_ref, const PriceVector& p,
                         const Vec& d, const Population& pop);

}  // namespace karma
