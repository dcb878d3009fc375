#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "karma/aggregate.hpp"
#include "karma/errors.hpp"
#include "karma/network.hpp"
#include "karma/optimum.hpp"
#include "karma/pricing.hpp"
#include "karma/rng.hpp"

using namespace karma;

namespace {

const Vec kXStarQuant{0.088, 0.131, 0.0, 0.305, 0.426};

long long balance(const PriceVector& p, const Vec& x_quant) {
  long long s = 0;
  for (std::size_t j = 0; j < p.size(); ++j)
    s += static_cast<long long>(std::llround(x_quant[j] * 1000.0)) * p[j];
  return s;
}

Network two_arc() {
  Network net;
  net.n = 2;
  net.d0 = {0.5, 0.8};
  net.kappa = {0.3, 0.5};
  net.c0 = {1.0, 0.7};
  return net;
}

}  // namespace

TEST_CASE("repair keeps an already feasible vector") {
  const PriceVector p{79, 63, 39, 13, -45};
  const auto r = repair_candidate(p, kXStarQuant, 100);
  REQUIRE(r.has_value());
  CHECK(*r == p);
}

TEST_CASE("repair re-balances through the reward arc") {
  // Same paying arcs as the reference vector, broken reward price.
  const auto r = repair_candidate({79, 63, 39, 13, -7}, kXStarQuant, 100);
  REQUIRE(r.has_value());
  CHECK(*r == PriceVector{79, 63, 39, 13, -45});
}

TEST_CASE("repair refuses unreachable balances") {
  // 88*100 + 131*99 + 305*97 = 51354 is not divisible by 426.
  CHECK_FALSE(repair_candidate({100, 99, 98, 97, -1}, kXStarQuant, 100).has_value());
  // Divisible but the required reward exceeds the bound:
  // p = {100, 98, 1, 96, .}: 88*100 + 131*98 + 305*96 = 50918, not divisible;
  // use a crafted small bound instead.
  CHECK_FALSE(repair_candidate({79, 63, 39, 13, -45}, kXStarQuant, 44).has_value());
}

TEST_CASE("repaired candidates always satisfy the design constraints") {
  Rng rng(17);
  int accepted = 0;
  for (int t = 0; t < 20000; ++t) {
    std::vector<int> raw(5);
    for (int& v : raw) v = static_cast<int>(rng.uniform_int(-100, 100));
    const auto r = repair_candidate(raw, kXStarQuant, 100);
    if (!r) continue;
    ++accepted;
    const PriceVector& p = *r;
    CHECK(p.front() >= 1);
    CHECK(p.back() <= -1);
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] < p[i - 1]);
    for (int v : p) CHECK(std::abs(v) <= 100);
    CHECK(balance(p, kXStarQuant) == 0);
  }
  CHECK(accepted > 0);
}

TEST_CASE("config validation") {
  DesignConfig cfg;
  CHECK_NOTHROW(cfg.validate(5));
  DesignConfig bad = cfg;
  bad.population_size = 1;
  CHECK_THROWS_AS(bad.validate(5), ValidationError);
  bad = cfg;
  bad.price_bound = 3;
  CHECK_THROWS_AS(bad.validate(5), ValidationError);
  bad = cfg;
  bad.elite_count = bad.population_size;
  CHECK_THROWS_AS(bad.validate(5), ValidationError);
}

TEST_CASE("two-arc design matches exhaustive enumeration") {
  Network net = two_arc();
  Population pop;
  const OptimumResult opt = solve_system_optimum(net, pop.p_go(), 1e-8, 100000, nullptr, 1);
  const Vec& xq = opt.x_star_quant;
  const int bound = 12;

  // Exhaustive search over the feasible integer lattice.
  const long long q1 = std::llround(xq[0] * 1000.0);
  const long long q2 = std::llround(xq[1] * 1000.0);
  double best_cost = std::numeric_limits<double>::infinity();
  PriceVector best;
  for (int p1 = 1; p1 <= bound; ++p1) {
    if (q2 == 0 || (q1 * p1) % q2 != 0) continue;
    const long long p2 = -(q1 * p1) / q2;
    if (p2 > -1 || p2 < -bound || p2 >= p1) continue;
    const PriceVector p{p1, static_cast<int>(p2)};
    const double c = steady_state_flows(p, xq, net, pop).cost;
    if (c < best_cost) {
      best_cost = c;
      best = p;
    }
  }
  REQUIRE(!best.empty());

  DesignConfig cfg;
  cfg.price_bound = bound;
  cfg.population_size = 16;
  cfg.generations = 20;
  cfg.elite_count = 2;
  cfg.subopt_stop = 0.0;
  cfg.seed = 3;
  const DesignResult r =
      design_prices(net, opt.x_star, xq, pop, cfg);
  CHECK(r.achieved_cost == doctest::Approx(best_cost).epsilon(1e-12));
  CHECK(r.p_star == best);
  CHECK(r.evaluations > 0);
}

TEST_CASE("history is nonincreasing and the run is deterministic") {
  Network net = two_arc();
  Population pop;
  const OptimumResult opt = solve_system_optimum(net, pop.p_go(), 1e-8, 100000, nullptr, 1);
  DesignConfig cfg;
  cfg.price_bound = 12;
  cfg.population_size = 12;
  cfg.generations = 8;
  cfg.elite_count = 2;
  cfg.subopt_stop = 0.0;
  cfg.seed = 42;
  const DesignResult a = design_prices(net, opt.x_star, opt.x_star_quant, pop, cfg);
  const DesignResult b = design_prices(net, opt.x_star, opt.x_star_quant, pop, cfg);
  CHECK(a.p_star == b.p_star);
  CHECK(a.history == b.history);
  CHECK(a.evaluations == b.evaluations);
  for (std::size_t i = 1; i < a.history.size(); ++i)
    CHECK(a.history[i] <= a.history[i - 1] + 1e-15);
  CHECK(a.relative_subopt ==
        doctest::Approx((a.achieved_cost - societal_cost(net, opt.x_star)) /
                        societal_cost(net, opt.x_star)));
}
