#include "karma/optimum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "karma/errors.hpp"

namespace karma {

Vec project_simplex_slice(const Vec& v, double total) {
  const int n = static_cast<int>(v.size());
  // Bisection on the shift tau in x_j = clamp(v_j - tau, 0, 1).
  double lo = *std::max_element(v.begin(), v.end()) - static_cast<double>(n);
  double hi = *std::max_element(v.begin(), v.end());
  lo -= 1.0;
  hi += 1.0;
  auto mass = [&](double tau) {
    double s = 0.0;
    for (double e : v) s += std::clamp(e - tau, 0.0, 1.0);
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) > total)
      lo = mid;
    else
      hi = mid;
  }
  const double tau = 0.5 * (lo + hi);
  Vec x(n);
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    x[j] = std::clamp(v[j] - tau, 0.0, 1.0);
    s += x[j];
  }
  // Absorb the bisection leftover into a coordinate with slack.
  double diff = total - s;
  for (int j = 0; j < n && std::abs(diff) > 0.0; ++j) {
    const double nx = std::clamp(x[j] + diff, 0.0, 1.0);
    diff -= nx - x[j];
    x[j] = nx;
  }
  return x;
}

namespace {

Vec marginal_cost(const Network& net, const Vec& x) {
  const Vec d = discomfort(net, x);
  const Vec dd = discomfort_derivative(net, x);
  Vec m(net.n);
  for (int j = 0; j < net.n; ++j) m[j] = net.c0[j] * (d[j] + x[j] * dd[j]);
  return m;
}

// Scale-free first-order optimality residual on the simplex slice.
double kkt_residual(const Network& net, const Vec& x) {
  const Vec m = marginal_cost(net, x);
  double wsum = 0.0, lam = 0.0;
  for (int j = 0; j < net.n; ++j) {
    if (x[j] > 1e-12) {
      lam += x[j] * m[j];
      wsum += x[j];
    }
  }
  if (wsum == 0.0) return 0.0;
  lam /= wsum;
  double r = 0.0;
  for (int j = 0; j < net.n; ++j) {
    if (x[j] > 1e-12)
      r = std::max(r, x[j] * std::abs(m[j] - lam));
    else
      r = std::max(r, std::max(0.0, lam - m[j]));
  }
  return r / std::max(std::abs(lam), 1e-300);
}

}  // namespace

Vec quantize_flows(const Vec& x, int decimals) {
  if (decimals < 0) throw ValidationError("quantize_flows: decimals must be >= 0");
  const double scale = std::pow(10.0, decimals);
  Vec q(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    // round() is half-away-from-zero.
    q[j] = std::round(x[j] * scale) / scale;
  }
  return q;
}

OptimumResult solve_system_optimum(const Network& net, double p_go, double tol,
                                   int max_iters, const Vec* x0, int quant_decimals) {
  net.validate();
  if (!(p_go > 0.0) || p_go > static_cast<double>(net.n))
    throw ValidationError("solve_system_optimum: p_go must be in (0, n]");

  Vec x = x0 ? project_simplex_slice(*x0, p_go)
             : Vec(net.n, p_go / static_cast<double>(net.n));
  double fx = societal_cost(net, x);
  double step = 1.0;
  int it = 0;
  double res = kkt_residual(net, x);
  for (; it < max_iters && res > tol; ++it) {
    const Vec g = marginal_cost(net, x);
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      Vec trial(net.n);
      for (int j = 0; j < net.n; ++j) trial[j] = x[j] - step * g[j];
      trial = project_simplex_slice(trial, p_go);
      double quad = 0.0, lin = 0.0;
      for (int j = 0; j < net.n; ++j) {
        const double dj = trial[j] - x[j];
        quad += dj * dj;
        lin += g[j] * dj;
      }
      const double ft = societal_cost(net, trial);
      if (ft <= fx + lin + quad / (2.0 * step) + 1e-18) {
        if (quad > 0.0) moved = true;
        x = std::move(trial);
        fx = ft;
        step *= 1.4;
        break;
      }
      step *= 0.5;
    }
    res = kkt_residual(net, x);
    if (!moved && res > tol && step < 1e-18)
      throw ConvergenceError("solve_system_optimum: stalled, residual " +
                                 std::to_string(res), res);
  }
  if (res > tol)
    throw ConvergenceError("solve_system_optimum: residual " + std::to_string(res) +
                               " after max iterations", res);

  OptimumResult out;
  out.x_star = x;
  out.x_star_quant = quantize_flows(x, quant_decimals);
  out.cost = fx;
  out.kkt_residual = res;
  out.iterations = it;
  return out;
}

}  // namespace karma
