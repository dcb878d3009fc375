#pragma once

#include <cstdint>
#include <vector>

namespace karma {

using Vec = std::vector<double>;

// Parallel-arc network with BPR discomfort d_j(x_j) = d0_j (1 + alpha (x_j/kappa_j)^beta)
// and societal cost C(x) = sum_j c0_j d_j(x_j) x_j.
struct Network {
  int n = 0;
  Vec d0;      // free-flow discomfort, one entry per arc, > 0
  Vec kappa;   // capacity, > 0
  double alpha = 0.15;
  int beta = 4;
  Vec c0;      // societal cost weight, > 0

  void validate() const;
};

// Discrete distribution over reference Karma levels.
struct KrefDist {
  std::vector<long long> support;  // nonnegative integers
  Vec weights;                     // sum to 1

  void validate() const;
};

// How the reference-Karma distribution theta_p is built for a given price
// vector. PriceSupport: discrete uniform on {0} union {p_j : p_j > 0}.
enum class KrefMode { PriceSupport, Explicit };

struct KrefSpec {
  KrefMode mode = KrefMode::PriceSupport;
  KrefDist explicit_dist;  // used when mode == Explicit

  KrefDist materialize(const std::vector<int>& prices) const;
};

// User population: travel probability, horizon, sensitivity distribution
// (uniform on [s_min, s_max]) and the reference-Karma rule.
struct Population {
  double p_home = 0.05;
  int horizon = 4;  // T
  double s_min = 0.0;
  double s_max = 2.0;
  KrefSpec kref;

  double p_go() const { return 1.0 - p_home; }
  double s_bar() const { return 0.5 * (s_min + s_max); }

  void validate() const;
};

// Per-arc discomfort at flows x.
Vec discomfort(const Network& net, const Vec& x);

// Single-arc discomfort d_j(x_j); no cross-arc validation, so callers may
// evaluate hypothetical loads (e.g. one extra traveler on arc j).
double discomfort_arc(const Network& net, int j, double x_j);

// Derivative of d_j w.r.t. x_j (used by the optimum solver).
Vec discomfort_derivative(const Network& net, const Vec& x);

// Total societal cost C(x) = c(x)^T x.
double societal_cost(const Network& net, const Vec& x);

// Throws ValidationError unless x has n entries in [0,1] summing to <= 1 + tol.
void validate_flows(const Network& net, const Vec& x);

}  // namespace karma
