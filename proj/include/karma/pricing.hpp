#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "karma/best_response.hpp"
#include "karma/network.hpp"

namespace karma {

struct DesignConfig {
  int price_bound = 100;       // ||p||_inf cap
  int population_size = 64;
  int generations = 300;
  double mutation_rate = 0.15;  // per-gene
  double crossover_rate = 0.8;
  int elite_count = 4;
  double subopt_stop = 0.005;   // stop when relative suboptimality <= this
  std::uint64_t seed = 0;

  void validate(int n) const;
};

struct DesignResult {
  PriceVector p_star;
  double achieved_cost = 0.0;
  double relative_subopt = 0.0;  // (achieved - C(x*)) / C(x*)
  long long evaluations = 0;     // objective evaluations (cache misses)
  Vec history;                   // best cost per generation, nonincreasing
  bool target_met = false;       // reached subopt_stop before budget ran out
};

// Constraint repair for design candidates: enforce strict descending order,
// p_1 > 0, p_n < 0, the price bound, and zero the Karma-balance equality
// p^T x*_quant = 0 exactly by adjusting the reward arc p_n. Returns nullopt
// when no adjustment achieves equality within bounds.
std::optional<PriceVector> repair_candidate(const std::vector<int>& p_raw,
                                            const Vec& x_star_quant,
                                            int price_bound);

// Genetic search over integer prices: minimize the societal cost of the steady-state
// aggregate flows evaluated at x*, over integer prices satisfying the four
// design constraints. Stops early when the known optimum C(x*) is approached
// within cfg.subopt_stop.
DesignResult design_prices(const Network& net, const Vec& x_star,
                           const Vec& x_star_quant, const Population& pop,
                           const DesignConfig& cfg,
                           std::optional<long long> k0 = std::nullopt);

}  // namespace karma
