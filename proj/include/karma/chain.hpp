#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "karma/best_response.hpp"
#include "karma/network.hpp"

namespace karma {

// Column-compressed sparse square matrix; at most n_arcs+1 nonzeros per column.
struct SparseColMatrix {
  std::vector<std::vector<std::pair<int, double>>> cols;  // (row, value)

  int size() const { return static_cast<int>(cols.size()); }
  Vec apply(const Vec& v) const;  // returns A v
};

// Per-user stationary Karma Markov chain at fixed flows.
struct KarmaChain {
  std::vector<long long> states;  // sorted reachable Karma levels
  SparseColMatrix A;              // column-stochastic transition matrix
  Vec pi_inf;                     // stationary distribution (power-iteration limit)
  std::vector<Vec> P_sel;         // arc-selection columns, one length-n vector per state
  int k0_index = -1;
  int power_iterations = 0;
};

// Closure of k0 under k -> k - p_j over arcs with positive choice probability.
// Throws ResourceError past `state_cap` states and FeasibilityError when the
// initial level is infeasible.
std::vector<long long> enumerate_states(long long k0, long long k_ref,
                                        const PriceVector& p, const Vec& d,
                                        const Population& pop,
                                        std::size_t state_cap = 1000000);

SparseColMatrix transition_matrix(const std::vector<long long>& states,
                                  long long k_ref, const PriceVector& p,
                                  const Vec& d, const Population& pop);

// Power iteration from the delta at k0_index. Stops at l-inf change <= 1e-12
// or residual <= 1e-10; throws ConvergenceError past max_iters.
Vec stationary_distribution(const SparseColMatrix& A, int k0_index,
                            long long max_iters = 1000000, int* iters_out = nullptr);

std::vector<Vec> arc_selection_matrix(const std::vector<long long>& states,
                                      long long k_ref, const PriceVector& p,
                                      const Vec& d, const Population& pop);

// Builds the full chain for one (k0, k_ref) pair at flows x.
KarmaChain build_chain(long long k0, long long k_ref, const PriceVector& p,
                       const Vec& x, const Network& net, const Population& pop,
                       long long power_iter_cap = 1000000);

}  // namespace karma
