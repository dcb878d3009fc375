#include "karma/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "karma/aggregate.hpp"
#include "karma/errors.hpp"
#include "karma/rng.hpp"

namespace karma {

void DesignConfig::validate(int n) const {
  if (price_bound < n)
    throw ValidationError("design: price_bound must be >= n for strict ordering");
  if (population_size < 2) throw ValidationError("design: population_size must be >= 2");
  if (generations < 1) throw ValidationError("design: generations must be >= 1");
  if (elite_count < 0 || elite_count >= population_size)
    throw ValidationError("design: elite_count must be in [0, population_size)");
  if (mutation_rate < 0.0 || mutation_rate > 1.0 || crossover_rate < 0.0 ||
      crossover_rate > 1.0)
    throw ValidationError("design: rates must be in [0,1]");
  if (subopt_stop < 0.0) throw ValidationError("design: subopt_stop must be >= 0");
}

namespace {

// Integer coefficients of the equality constraint p^T x*_quant = 0.
std::vector<long long> equality_coeffs(const Vec& x_star_quant) {
  std::vector<long long> q(x_star_quant.size());
  long long g = 0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    q[j] = std::llround(x_star_quant[j] * 1e9);
    g = std::gcd(g, q[j]);
  }
  if (g > 1)
    for (auto& e : q) e /= g;
  return q;
}

// Slow-mixing candidate chains are cut off early during design; they get
// the +inf penalty rather than a 10^6-iteration certification attempt.
constexpr long long kDesignPowerIterCap = 50000;

}  // namespace

std::optional<PriceVector> repair_candidate(const std::vector<int>& p_raw,
                                            const Vec& x_star_quant,
                                            int price_bound) {
  const int n = static_cast<int>(p_raw.size());
  const std::vector<long long> q = equality_coeffs(x_star_quant);

  PriceVector p = p_raw;
  std::sort(p.begin(), p.end(), std::greater<int>());
  for (int& e : p) e = std::clamp(e, -price_bound, price_bound);
  p[0] = std::max(p[0], 1);
  for (int i = 1; i < n; ++i) p[i] = std::min(p[i], p[i - 1] - 1);
  p[n - 1] = std::min(p[n - 1], -1);
  for (int e : p)
    if (e < -price_bound || e > price_bound) return std::nullopt;

  // Zero the Karma balance by adjusting the reward arc.
  long long s = 0;
  for (int j = 0; j + 1 < n; ++j) s += q[j] * p[j];
  if (q[n - 1] == 0) {
    if (s != 0) return std::nullopt;
  } else {
    if (s % q[n - 1] != 0) return std::nullopt;
    const long long pn = -s / q[n - 1];
    if (pn > -1 || pn < -price_bound) return std::nullopt;
    if (n >= 2 && pn >= p[n - 2]) return std::nullopt;
    p[n - 1] = static_cast<int>(pn);
  }
  return p;
}

DesignResult design_prices(const Network& net, const Vec& x_star,
                           const Vec& x_star_quant, const Population& pop,
                           const DesignConfig& cfg, std::optional<long long> k0) {
  const int n = net.n;
  cfg.validate(n);
  const double c_star = societal_cost(net, x_star);

  std::map<PriceVector, double> cache;
  long long evaluations = 0;
  auto objective = [&](const PriceVector& p) {
    const auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    const long long chain_k0 = k0.value_or(static_cast<long long>(p.front()));
    // The aggregate is evaluated at the quantized optimum: the Karma-balance
    // equality p^T x*_quant = 0 only has integer solutions against the
    // quantized flows, so the whole design problem lives on that grid.
    // Candidates whose chain mixes too slowly to certify a stationary
    // distribution are penalized instead of aborting the search.
    double cost;
    try {
      cost = steady_state_flows(p, x_star_quant, net, pop, chain_k0,
                                kDesignPowerIterCap)
                 .cost;
    } catch (const ConvergenceError&) {
      cost = std::numeric_limits<double>::infinity();
    }
    ++evaluations;
    cache.emplace(p, cost);
    return cost;
  };

  Rng rng = Rng::stream(cfg.seed, 0xde516);
  auto random_candidate = [&]() -> std::optional<PriceVector> {
    std::vector<int> raw(n);
    for (int& g : raw)
      g = static_cast<int>(rng.uniform_int(-cfg.price_bound, cfg.price_bound));
    return repair_candidate(raw, x_star_quant, cfg.price_bound);
  };

  // Short kernel vectors of the Karma-balance equality over the non-reward
  // genes: adding one keeps sum_j q_j p_j divisible by q_{n-1}, so mutation
  // can walk the feasible lattice locally instead of relying on rejection.
  // The feasible set has density ~1/q_{n-1} among raw integer vectors, which
  // makes blind mutate-and-repair hopeless as a local search.
  const std::vector<long long> q = equality_coeffs(x_star_quant);
  const long long qn = std::llabs(q[n - 1]);
  std::vector<int> active;  // genes with nonzero coefficient, excluding reward
  std::vector<int> free_genes;  // zero-coefficient genes: unconstrained moves
  for (int j = 0; j + 1 < n; ++j)
    (q[j] != 0 ? active : free_genes).push_back(j);
  std::vector<std::vector<int>> moves;  // over genes 0..n-2
  {
    const int radius = 12;
    const std::size_t dim = active.size();
    std::vector<int> v(dim, -radius);
    bool enumerable = dim <= 4;  // 25^4 combinations at most
    while (enumerable && !v.empty()) {
      long long s = 0;
      bool zero = true;
      for (std::size_t i = 0; i < dim; ++i) {
        s += q[active[i]] * v[i];
        zero = zero && v[i] == 0;
      }
      if (!zero && (qn == 0 ? s == 0 : s % qn == 0)) {
        std::vector<int> m(n - 1, 0);
        for (std::size_t i = 0; i < dim; ++i) m[active[i]] = v[i];
        moves.push_back(std::move(m));
        if (moves.size() >= 128) break;
      }
      std::size_t i = 0;
      while (i < dim && v[i] == radius) v[i++] = -radius;
      if (i == dim) break;
      ++v[i];
    }
    if (!enumerable) {
      for (int t = 0; t < 200000 && moves.size() < 64; ++t) {
        std::vector<int> m(n - 1, 0);
        long long s = 0;
        bool zero = true;
        for (int j : active) {
          m[j] = static_cast<int>(rng.uniform_int(-radius, radius));
          s += q[j] * m[j];
          zero = zero && m[j] == 0;
        }
        if (!zero && (qn == 0 ? s == 0 : s % qn == 0)) moves.push_back(std::move(m));
      }
    }
    // Unconstrained single-gene steps for zero-coefficient genes.
    for (int j : free_genes)
      for (int step : {1, -1, 2, -2, 5, -5}) {
        std::vector<int> m(n - 1, 0);
        m[j] = step;
        moves.push_back(std::move(m));
      }
  }

  std::vector<PriceVector> popn;
  for (long long attempt = 0;
       static_cast<int>(popn.size()) < cfg.population_size; ++attempt) {
    if (attempt > 2000000)
      throw FeasibilityError(
          "design_prices: no feasible integer price vector found within bounds");
    if (auto c = random_candidate()) popn.push_back(std::move(*c));
  }

  DesignResult res;
  res.history.reserve(cfg.generations);
  auto better = [](const std::pair<double, PriceVector>& a,
                   const std::pair<double, PriceVector>& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  };

  for (int gen = 0; gen < cfg.generations; ++gen) {
    std::vector<std::pair<double, PriceVector>> scored;
    scored.reserve(popn.size());
    for (const auto& p : popn) scored.emplace_back(objective(p), p);
    std::sort(scored.begin(), scored.end(), better);

    res.p_star = scored.front().second;
    res.achieved_cost = scored.front().first;
    res.relative_subopt = (res.achieved_cost - c_star) / c_star;
    res.history.push_back(res.achieved_cost);
#ifdef KARMA_DESIGN_DEBUG
    {
      std::map<PriceVector, int> uniq;
      for (const auto& pv : popn) uniq[pv]++;
      std::fprintf(stderr, "gen %d best %.6f uniq %zu evals %lld\n", gen,
                   res.achieved_cost, uniq.size(), evaluations);
    }
#endif
    if (res.relative_subopt <= cfg.subopt_stop) {
      res.target_met = true;
      break;
    }
    if (gen + 1 == cfg.generations) break;

    const long long last = static_cast<long long>(scored.size()) - 1;
    auto tournament = [&]() -> const PriceVector& {
      int best = static_cast<int>(rng.uniform_int(0, last));
      for (int t = 1; t < 3; ++t) {
        const int c = static_cast<int>(rng.uniform_int(0, last));
        if (c < best) best = c;  // scored is sorted: lower index is fitter
      }
      return scored[best].second;
    };

    std::vector<PriceVector> next;
    next.reserve(popn.size());
    for (int e = 0; e < cfg.elite_count; ++e) next.push_back(scored[e].second);
    // A few random immigrants per generation keep global exploration alive:
    // the feasible lattice is thin, so local moves alone cannot escape a bad
    // initial basin.
    const int immigrants =
        std::min(4, cfg.population_size - cfg.elite_count - 1);
    for (int e = 0; e < immigrants; ++e) {
      for (int attempt = 0; attempt < 200000; ++attempt)
        if (auto c = random_candidate()) {
          next.push_back(std::move(*c));
          break;
        }
    }
    while (static_cast<int>(next.size()) < cfg.population_size) {
      const PriceVector& pa = tournament();
      const PriceVector& pb = tournament();
      // Unmutated crossovers repair straight back to a parent; requiring
      // novelty keeps selection pressure from collapsing the population
      // onto the elites within a few generations.
      auto novel = [&](const std::optional<PriceVector>& c) {
        return c && *c != pa && *c != pb;
      };
      std::optional<PriceVector> child;
      for (int tries = 0; tries < 200 && !child; ++tries) {
        std::vector<int> raw(n);
        const bool cross = rng.bernoulli(cfg.crossover_rate);
        for (int j = 0; j < n; ++j)
          raw[j] = (cross && rng.bernoulli(0.5)) ? pb[j] : pa[j];
        for (int j = 0; j < n; ++j) {
          if (!rng.bernoulli(cfg.mutation_rate)) continue;
          static constexpr int kSteps[3] = {1, 2, 5};
          const int step = kSteps[rng.uniform_int(0, 2)];
          raw[j] += rng.bernoulli(0.5) ? step : -step;
        }
        child = repair_candidate(raw, x_star_quant, cfg.price_bound);
        if (!novel(child)) child.reset();
        // Lattice step: perturb the crossover mix along a short kernel
        // vector of the equality constraint, preserving divisibility.
        if (!child && !moves.empty()) {
          std::vector<int> stepped = raw;
          const auto& m = moves[rng.uniform_int(
              0, static_cast<long long>(moves.size()) - 1)];
          const int scale = static_cast<int>(rng.uniform_int(1, 3));
          for (int j = 0; j + 1 < n; ++j) stepped[j] += scale * m[j];
          child = repair_candidate(stepped, x_star_quant, cfg.price_bound);
          if (!novel(child)) child.reset();
        }
        // Wide single-gene nudge: restores divisibility when the p_n
        // adjustment alone cannot.
        for (int extra = 0; extra < 30 && !child; ++extra) {
          std::vector<int> nudged = raw;
          nudged[rng.uniform_int(0, n - 2)] +=
              static_cast<int>(rng.uniform_int(-30, 30));
          child = repair_candidate(nudged, x_star_quant, cfg.price_bound);
          if (!novel(child)) child.reset();
        }
      }
      next.push_back(child ? std::move(*child) : pa);
    }
    popn = std::move(next);
  }

  res.evaluations = evaluations;
  return res;
}

}  // namespace karma
