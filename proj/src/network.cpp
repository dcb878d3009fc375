#include "karma/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "karma/errors.hpp"

namespace karma {

void Network::validate() const {
  if (n < 2) throw ValidationError("network: n must be >= 2, got " + std::to_string(n));
  auto check_len = [&](const Vec& v, const char* name) {
    if (static_cast<int>(v.size()) != n)
      throw ValidationError(std::string("network: ") + name + " must have length n");
    for (double e : v)
      if (!(e > 0.0))
        throw ValidationError(std::string("network: ") + name + " entries must be > 0");
  };
  check_len(d0, "d0");
  check_len(kappa, "kappa");
  check_len(c0, "c0");
  if (alpha < 0.0) throw ValidationError("network: alpha must be >= 0");
  if (beta < 1) throw ValidationError("network: beta must be >= 1");
}

void KrefDist::validate() const {
  if (support.size() != weights.size() || support.empty())
    throw ValidationError("kref: support/weights size mismatch or empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0) throw ValidationError("kref: support values must be nonnegative");
    if (weights[i] < 0.0) throw ValidationError("kref: weights must be nonnegative");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("kref: weights must sum to 1");
}

KrefDist KrefSpec::materialize(const std::vector<int>& prices) const {
  if (mode == KrefMode::Explicit) {
    explicit_dist.validate();
    return explicit_dist;
  }
  KrefDist d;
  d.support.push_back(0);
  for (int p : prices)
    if (p > 0) d.support.push_back(p);
  std::sort(d.support.begin(), d.support.end());
  d.support.erase(std::unique(d.support.begin(), d.support.end()), d.support.end());
  d.weights.assign(d.support.size(), 1.0 / static_cast<double>(d.support.size()));
  return d;
}

void Population::validate() const {
  if (p_home < 0.0 || p_home > 1.0) throw ValidationError("population: p_home must be in [0,1]");
  if (horizon < 1) throw ValidationError("population: horizon must be >= 1");
  if (!(s_min >= 0.0) || !(s_max > s_min))
    throw ValidationError("population: need 0 <= s_min < s_max");
  if (kref.mode == KrefMode::Explicit) kref.explicit_dist.validate();
}

void validate_flows(const Network& net, const Vec& x) {
  if (static_cast<int>(x.size()) != net.n)
    throw ValidationError("flows: length mismatch with network");
  double sum = 0.0;
  for (double e : x) {
    if (e < -1e-12 || e > 1.0 + 1e-12)
      throw ValidationError("flows: entries must be in [0,1]");
    sum += e;
  }
  if (sum > 1.0 + 1e-9) throw ValidationError("flows: entries must sum to <= 1");
}

double discomfort_arc(const Network& net, int j, double x_j) {
  return net.d0[j] * (1.0 + net.alpha * std::pow(x_j / net.kappa[j], net.beta));
}

Vec discomfort(const Network& net, const Vec& x) {
  validate_flows(net, x);
  Vec d(net.n);
  for (int j = 0; j < net.n; ++j) d[j] = discomfort_arc(net, j, x[j]);
  return d;
}

Vec discomfort_derivative(const Network& net, const Vec& x) {
  validate_flows(net, x);
  Vec dd(net.n);
  for (int j = 0; j < net.n; ++j)
    dd[j] = net.d0[j] * net.alpha * net.beta *
            std::pow(x[j] / net.kappa[j], net.beta - 1) / net.kappa[j];
  return dd;
}

double societal_cost(const Network& net, const Vec& x) {
  const Vec d = discomfort(net, x);
  double c = 0.0;
  for (int j = 0; j < net.n; ++j) c += net.c0[j] * d[j] * x[j];
  return c;
}

}  // namespace karma
