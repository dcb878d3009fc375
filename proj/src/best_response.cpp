#include "karma/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "karma/errors.hpp"

namespace karma {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCmpTol = 1e-12;  // threshold comparisons
}  // namespace

bool is_feasible(const UserContext& ctx, const PriceVector& p) {
  const long long pmin = *std::min_element(p.begin(), p.end());
  const long long bound =
      std::max<long long>(0, ctx.k_ref + pmin * (ctx.horizon + 1));
  return ctx.k >= bound;
}

ArcReduction reduce_arcs(const Vec& d, const PriceVector& p,
                         const std::vector<int>& order) {
  const int n = static_cast<int>(d.size());
  ArcReduction r;
  std::vector<bool> unreasonable(n, false), duplicate(n, false);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (p[i] <= p[j] && d[i] < d[j]) {
        unreasonable[j] = true;
        break;
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    if (unreasonable[j]) continue;
    for (int i = 0; i < n; ++i) {
      if (i == j || unreasonable[i]) continue;
      if (d[i] == d[j] && (p[i] < p[j] || (p[i] == p[j] && i < j))) {
        duplicate[j] = true;
        break;
      }
    }
  }
  for (int idx : order) {
    if (unreasonable[idx])
      r.unreasonable.push_back(idx);
    else if (duplicate[idx])
      r.duplicates.push_back(idx);
    else
      r.kept.push_back(idx);
  }
  return r;
}

ArcReduction reduce_arcs(const Vec& d, const PriceVector& p) {
  std::vector<int> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (d[a] != d[b]) return d[a] < d[b];
    if (p[a] != p[b]) return p[a] < p[b];
    return a < b;
  });
  return reduce_arcs(d, p, order);
}

namespace {

// Threshold machinery over the kept (strictly ordered) arcs.
struct Reduced {
  Vec d;               // strictly increasing
  std::vector<int> p;  // strictly decreasing
  long long k = 0, k_ref = 0;
  int T = 1;

  int m() const { return static_cast<int>(d.size()); }

  // k(j1, j2) = k_ref + p_{j1} + T p_{j2}
  double kfun(int j1, int j2) const {
    return static_cast<double>(k_ref) + p[j1] + static_cast<double>(T) * p[j2];
  }

  bool feasible_choice(int j) const {
    return k >= p[j] && static_cast<double>(k) >= kfun(j, m() - 1) && k >= 0;
  }

  // Optimal future plan ybar*_j for the integer choice j (must be feasible).
  // Returns the plan over kept positions; empty on failure (no admissible a).
  Vec future_plan(int j) const {
    const int n = m();
    Vec plan(n, 0.0);
    if (static_cast<double>(k) >= kfun(j, 0)) {
      plan[0] = 1.0;  // rich enough to plan the fastest arc every day
      return plan;
    }
    int best_a = -1, best_jhat = -1;
    double best_val = kInf;
    for (int a = 0; a < n; ++a) {
      int jhat = -1;
      double best_ratio = kInf;
      for (int i = 0; i < n; ++i) {
        if (i == a) continue;
        const double lo = std::min(kfun(j, a), kfun(j, i));
        const double hi = std::max(kfun(j, a), kfun(j, i));
        if (static_cast<double>(k) < lo || static_cast<double>(k) > hi) continue;
        const double ratio = (d[i] - d[a]) / static_cast<double>(p[a] - p[i]);
        if (ratio < best_ratio) {  // argmin ties -> lowest i
          best_ratio = ratio;
          jhat = i;
        }
      }
      if (jhat < 0) continue;  // a excluded: empty candidate window
      const double denom = static_cast<double>(T) * (p[a] - p[jhat]);
      const double ya = (static_cast<double>(k) - kfun(j, jhat)) / denom;
      const double yh = -(static_cast<double>(k) - kfun(j, a)) / denom;
      const double val = d[a] * ya + d[jhat] * yh;
      if (val < best_val - kCmpTol || best_a < 0) {  // ties -> lowest a
        if (val < best_val) {
          best_val = val;
          best_a = a;
          best_jhat = jhat;
        }
      }
    }
    if (best_a < 0) return {};
    const double denom = static_cast<double>(T) * (p[best_a] - p[best_jhat]);
    plan[best_a] = (static_cast<double>(k) - kfun(j, best_jhat)) / denom;
    plan[best_jhat] = -(static_cast<double>(k) - kfun(j, best_a)) / denom;
    // Clip float dust at the window boundary.
    for (double& e : plan) e = std::clamp(e, 0.0, 1.0);
    return plan;
  }
};

}  // namespace

ThresholdTable threshold_table(long long k, long long k_ref, int horizon,
                               const PriceVector& p, const Vec& d,
                               double s_min, double s_max, double s_bar) {
  UserContext ctx{k, k_ref, 0.0, horizon};
  if (!is_feasible(ctx, p))
    throw FeasibilityError("threshold_table: no affordable plan at k=" +
                           std::to_string(k));

  const ArcReduction red = reduce_arcs(d, p);
  Reduced rp;
  rp.k = k;
  rp.k_ref = k_ref;
  rp.T = horizon;
  for (int idx : red.kept) {
    rp.d.push_back(d[idx]);
    rp.p.push_back(p[idx]);
  }
  const int m = rp.m();

  ThresholdTable t;
  t.kept = red.kept;
  t.d = rp.d;
  t.p = rp.p;
  t.feasible.resize(m);
  t.future_plans.assign(m, Vec(m, 0.0));
  for (int j = 0; j < m; ++j) {
    t.feasible[j] = rp.feasible_choice(j);
    if (t.feasible[j]) {
      Vec plan = rp.future_plan(j);
      if (plan.empty())
        t.feasible[j] = false;  // no LP vertex available
      else
        t.future_plans[j] = std::move(plan);
    }
  }

  // gamma_pair(u, v), u < v: choosing u over v is optimal iff s/s_bar >= value.
  auto dot_d = [&](const Vec& y) {
    double s = 0.0;
    for (int l = 0; l < m; ++l) s += rp.d[l] * y[l];
    return s;
  };
  auto gamma_pair = [&](int u, int v) {
    if (!t.feasible[u]) return kInf;   // u never choosable: v always wins
    if (!t.feasible[v]) return -kInf;  // v never choosable: u always wins
    return static_cast<double>(horizon) *
           (dot_d(t.future_plans[u]) - dot_d(t.future_plans[v])) /
           (rp.d[v] - rp.d[u]);
  };

  t.gamma_under.assign(m, -kInf);
  t.gamma_bar.assign(m, kInf);
  t.admissible.resize(m);
  for (int j = 0; j < m; ++j) {
    for (int i = j + 1; i < m; ++i)
      t.gamma_under[j] = std::max(t.gamma_under[j], gamma_pair(j, i));
    for (int i = 0; i < j; ++i)
      t.gamma_bar[j] = std::min(t.gamma_bar[j], gamma_pair(i, j));
    t.admissible[j] = t.feasible[j] && t.gamma_bar[j] >= t.gamma_under[j] - kCmpTol;
  }

  // Saturated thresholds, one-based: gamma[0] = s_max/s_bar, gamma[m] = s_min/s_bar.
  const double lo = s_min / s_bar, hi = s_max / s_bar;
  t.gamma.assign(m + 1, 0.0);
  t.gamma[m] = lo;
  for (int j = m - 1; j >= 1; --j) {
    if (t.admissible[j])
      t.gamma[j] = std::clamp(t.gamma_bar[j], lo, hi);
    else
      t.gamma[j] = t.gamma[j + 1];
  }
  t.gamma[0] = hi;
  return t;
}

BestResponseSolution best_response_d(const UserContext& ctx, const PriceVector& p,
                                     const Vec& d, double s_min, double s_max,
                                     double s_bar) {
  if (!is_feasible(ctx, p))
    throw FeasibilityError("best_response: no affordable plan at k=" +
                           std::to_string(ctx.k));
  const ThresholdTable t = threshold_table(ctx.k, ctx.k_ref, ctx.horizon, p, d,
                                           s_min, s_max, s_bar);
  const int m = t.size();
  const double r = std::clamp(ctx.s / s_bar, s_min / s_bar, s_max / s_bar);

  auto objective_at = [&](int pos) {
    double future = 0.0;
    for (int l = 0; l < m; ++l) future += t.d[l] * t.future_plans[pos][l];
    return ctx.s * t.d[pos] + ctx.horizon * s_bar * future;
  };

  // Scan the threshold partition; collect every arc whose interval contains r.
  int best_pos = -1;
  double best_obj = kInf;
  for (int pos = 0; pos < m; ++pos) {
    const int j = pos + 1;  // one-based threshold index
    if (!t.admissible[pos]) continue;
    if (t.gamma[j] <= r + kCmpTol && r <= t.gamma[j - 1] + kCmpTol) {
      const double obj = objective_at(pos);
      if (obj < best_obj - kCmpTol || best_pos < 0) {
        if (obj < best_obj) {
          best_obj = obj;
          best_pos = pos;
        }
      }
    }
  }
  if (best_pos < 0) {
    // Numeric corner: fall back to direct comparison over feasible arcs.
    for (int pos = 0; pos < m; ++pos) {
      if (!t.feasible[pos]) continue;
      const double obj = objective_at(pos);
      if (best_pos < 0 || obj < best_obj) {
        best_obj = obj;
        best_pos = pos;
      }
    }
  }
  if (best_pos < 0)
    throw FeasibilityError("best_response: no choosable arc (unexpected)");

  BestResponseSolution sol;
  sol.objective = best_obj;
  // Map the future plan back to original arc indices.
  sol.future_plan.assign(p.size(), 0.0);
  double plan_payment = 0.0;
  for (int l = 0; l < m; ++l) {
    sol.future_plan[t.kept[l]] = t.future_plans[best_pos][l];
    plan_payment += static_cast<double>(t.p[l]) * t.future_plans[best_pos][l];
  }
  // Lift to every equally-fit original arc that stays feasible.
  const int n = static_cast<int>(p.size());
  for (int l = 0; l < n; ++l) {
    if (d[l] != t.d[best_pos]) continue;
    if (ctx.k < p[l]) continue;
    if (static_cast<double>(ctx.k) - p[l] - ctx.horizon * plan_payment <
        static_cast<double>(ctx.k_ref) - 1e-9)
      continue;
    sol.optimal_set.push_back(l);
  }
  sol.arc = sol.optimal_set.front();
  return sol;
}

BestResponseSolution best_response(const UserContext& ctx, const PriceVector& p,
                                   const Vec& x, const Network& net,
                                   double s_min, double s_max, double s_bar) {
  return best_response_d(ctx, p, discomfort(net, x), s_min, s_max, s_bar);
}

Vec choice_probability_d(long long k, long long k_ref, const PriceVector& p,
                         const Vec& d, const Population& pop) {
  for (std::size_t j = 1; j < d.size(); ++j)
    if (d[j] < d[j - 1])
      throw AssumptionError(
          "choice_probability: discomforts not nondecreasing in arc order; "
          "sort and reduce_arcs first");
  const double s_bar = pop.s_bar();
  const ThresholdTable t = threshold_table(k, k_ref, pop.horizon, p, d,
                                           pop.s_min, pop.s_max, s_bar);
  Vec prob(p.size(), 0.0);
  const double span = pop.s_max - pop.s_min;
  for (int pos = 0; pos < t.size(); ++pos) {
    const int j = pos + 1;
    const double mass = (t.gamma[j - 1] - t.gamma[j]) * s_bar / span;
    if (mass > 0.0) prob[t.kept[pos]] += mass;
  }
  return prob;
}

Vec choice_probability(long long k, long long k_ref, const PriceVector& p,
                       const Vec& x, const Network& net, const Population& pop) {
  return choice_probability_d(k, k_ref, p, discomfort(net, x), pop);
}

}  // namespace karma
