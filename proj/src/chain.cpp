#include "karma/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "karma/errors.hpp"

namespace karma {

Vec SparseColMatrix::apply(const Vec& v) const {
  Vec out(v.size(), 0.0);
  for (int c = 0; c < size(); ++c) {
    const double vc = v[c];
    if (vc == 0.0) continue;
    for (const auto& [r, a] : cols[c]) out[r] += a * vc;
  }
  return out;
}

std::vector<long long> enumerate_states(long long k0, long long k_ref,
                                        const PriceVector& p, const Vec& d,
                                        const Population& pop,
                                        std::size_t state_cap) {
  std::unordered_set<long long> seen{k0};
  std::deque<long long> frontier{k0};
  while (!frontier.empty()) {
    const long long k = frontier.front();
    frontier.pop_front();
    const Vec prob = choice_probability_d(k, k_ref, p, d, pop);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (prob[j] <= 0.0) continue;
      const long long next = k - p[j];
      if (seen.insert(next).second) {
        if (seen.size() > state_cap)
          throw ResourceError("enumerate_states: state cap " +
                              std::to_string(state_cap) + " exceeded");
        frontier.push_back(next);
      }
    }
  }
  std::vector<long long> states(seen.begin(), seen.end());
  std::sort(states.begin(), states.end());
  return states;
}

SparseColMatrix transition_matrix(const std::vector<long long>& states,
                                  long long k_ref, const PriceVector& p,
                                  const Vec& d, const Population& pop) {
  std::unordered_map<long long, int> index;
  for (std::size_t i = 0; i < states.size(); ++i)
    index.emplace(states[i], static_cast<int>(i));

  SparseColMatrix A;
  A.cols.resize(states.size());
  const double p_go = pop.p_go();
  for (std::size_t v = 0; v < states.size(); ++v) {
    const Vec prob = choice_probability_d(states[v], k_ref, p, d, pop);
    std::unordered_map<int, double> col;
    double travel_mass = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (prob[j] <= 0.0) continue;
      const auto it = index.find(states[v] - p[j]);
      if (it == index.end())
        throw ValidationError("transition_matrix: states not closed under transitions");
      col[it->second] += p_go * prob[j];
      travel_mass += prob[j];
    }
    // Stay-home mass plus any probability defect (none for feasible states).
    col[static_cast<int>(v)] += 1.0 - p_go * travel_mass;
    A.cols[v].assign(col.begin(), col.end());
    std::sort(A.cols[v].begin(), A.cols[v].end());
  }
  return A;
}

Vec stationary_distribution(const SparseColMatrix& A, int k0_index,
                            long long max_iters, int* iters_out) {
  Vec pi(A.size(), 0.0);
  pi[k0_index] = 1.0;
  double res = 1.0;
  Vec prev1;  // the iterate preceding pi
  for (long long it = 0; it < max_iters; ++it) {
    Vec next = A.apply(pi);
    double diff = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i)
      diff = std::max(diff, std::abs(next[i] - pi[i]));
    // One step's l-inf change equals the residual ||A pi - pi||_inf of the
    // previous iterate, so the change/residual stopping rules coincide.
    // `pi` is the iterate this bound certifies, so return it, not `next`.
    if (diff <= 1e-10) {
      if (iters_out) *iters_out = static_cast<int>(it + 1);
      return pi;
    }
    // Aitken delta-squared extrapolation every few steps: the error is
    // dominated by a single subdominant eigenvalue once the transient has
    // passed, so the componentwise geometric-series jump lands much closer
    // to the same limit the plain iteration converges to. The result is
    // only adopted when it certifiably reduces the residual.
    if (it >= 64 && it % 16 == 0) {
      Vec extr(pi.size());
      bool ok = true;
      for (std::size_t i = 0; i < pi.size(); ++i) {
        const double d1 = pi[i] - prev1[i];
        const double d2 = next[i] - pi[i];
        const double den = d2 - d1;
        extr[i] = std::abs(den) > 1e-300 ? next[i] - d2 * d2 / den : next[i];
        if (extr[i] < 0.0) extr[i] = 0.0;
        if (!std::isfinite(extr[i])) { ok = false; break; }
      }
      if (ok) {
        double sum = 0.0;
        for (double v : extr) sum += v;
        if (sum > 0.0) {
          for (double& v : extr) v /= sum;
          const Vec check = A.apply(extr);
          double r2 = 0.0;
          for (std::size_t i = 0; i < extr.size(); ++i)
            r2 = std::max(r2, std::abs(check[i] - extr[i]));
          if (r2 < diff) {
            // r2 certifies `extr`; `check` is one application further along.
            if (r2 <= 1e-10) {
              if (iters_out) *iters_out = static_cast<int>(it + 1);
              return extr;
            }
            next = std::move(check);  // one extra application already done
          }
        }
      }
    }
    prev1 = std::move(pi);
    pi = std::move(next);
    res = diff;
  }
  throw ConvergenceError("stationary_distribution: power iteration residual " +
                             std::to_string(res),
                         res);
}

std::vector<Vec> arc_selection_matrix(const std::vector<long long>& states,
                                      long long k_ref, const PriceVector& p,
                                      const Vec& d, const Population& pop) {
  std::vector<Vec> cols;
  cols.reserve(states.size());
  for (long long k : states)
    cols.push_back(choice_probability_d(k, k_ref, p, d, pop));
  return cols;
}

KarmaChain build_chain(long long k0, long long k_ref, const PriceVector& p,
                       const Vec& x, const Network& net, const Population& pop,
                       long long power_iter_cap) {
  const Vec d = discomfort(net, x);
  KarmaChain chain;
  chain.states = enumerate_states(k0, k_ref, p, d, pop);
  chain.A = transition_matrix(chain.states, k_ref, p, d, pop);
  const auto it = std::lower_bound(chain.states.begin(), chain.states.end(), k0);
  chain.k0_index = static_cast<int>(it - chain.states.begin());
  chain.pi_inf = stationary_distribution(chain.A, chain.k0_index, power_iter_cap,
                                         &chain.power_iterations);
  chain.P_sel = arc_selection_matrix(chain.states, k_ref, p, d, pop);
  return chain;
}

}  // namespace karma
