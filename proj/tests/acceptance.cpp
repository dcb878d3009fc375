// Acceptance suite: one pass/fail line per criterion, exit 1 on any failure.
// Usage: acceptance <scenario.json> <karma-cli-binary>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "karma/aggregate.hpp"
#include "karma/best_response.hpp"
#include "karma/chain.hpp"
#include "karma/network.hpp"
#include "karma/optimum.hpp"
#include "karma/oracle.hpp"
#include "karma/pricing.hpp"
#include "karma/rng.hpp"
#include "karma/scenario.hpp"
#include "karma/sim.hpp"

using namespace karma;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  (%s)\n", criterion, ok ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

const PriceVector kPStar{79, 63, 39, 13, -45};
const Vec kXStarPub{0.0877, 0.1309, 0.0, 0.3053, 0.4261};
const Vec kDStarPub{0.5611, 0.5943, 0.7085, 0.7107, 0.9106};

struct Instance {
  UserContext ctx;
  PriceVector p;
  Vec d;
};

Instance random_instance(Rng& rng) {
  Instance inst;
  const int n = static_cast<int>(rng.uniform_int(2, 6));
  std::set<int> vals;
  while (static_cast<int>(vals.size()) < n)
    vals.insert(static_cast<int>(rng.uniform_int(-50, 50)));
  inst.p.assign(vals.rbegin(), vals.rend());
  inst.p.front() = std::max(inst.p.front(), 1);
  inst.p.back() = std::min(inst.p.back(), -1);
  inst.d.resize(n);
  for (double& v : inst.d) v = rng.uniform_real(0.1, 2.0);
  inst.ctx.k = rng.uniform_int(0, 300);
  inst.ctx.k_ref = rng.uniform_int(0, 50);
  inst.ctx.s = rng.uniform_real(0.0, 2.0);
  inst.ctx.horizon = static_cast<int>(rng.uniform_int(1, 5));
  return inst;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <scenario.json> <karma-cli>\n");
    return 2;
  }
  const std::string scenario_path = argv[1];
  const std::string cli = argv[2];

  const Scenario sc = load_scenario(scenario_path);
  const Network& net = sc.network;
  const Population& pop = sc.population;

  // ---- 1: system optimum --------------------------------------------------
  OptimumResult opt;
  {
    const auto t0 = std::chrono::steady_clock::now();
    opt = solve_system_optimum(net, pop.p_go(), 1e-9, 100000, nullptr,
                               sc.quant_decimals);
    const double dt = seconds_since(t0);
    const Vec d = discomfort(net, opt.x_star);
    double dev = 0.0;
    for (int j = 0; j < net.n; ++j) {
      dev = std::max(dev, std::abs(opt.x_star[j] - kXStarPub[j]));
      dev = std::max(dev, std::abs(d[j] - kDStarPub[j]));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max deviation %.2e vs reference flows/discomforts, %.3f s",
                  dev, dt);
    report(1, dev <= 1e-3 && dt < 1.0, buf);
  }

  // ---- 2: closed form vs brute-force oracle, 10^4 instances ---------------
  {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(202);
    int tested = 0, mismatches = 0;
    while (tested < 10000) {
      Instance inst = random_instance(rng);
      if (!is_feasible(inst.ctx, inst.p)) continue;
      ++tested;
      const auto a = best_response_d(inst.ctx, inst.p, inst.d, 0.0, 2.0, 1.0);
      const auto b = oracle_best_response_d(inst.ctx, inst.p, inst.d, 1.0);
      if (std::abs(a.objective - b.objective) >
          1e-9 * std::max(1.0, std::abs(b.objective)))
        ++mismatches;
    }
    const double dt = seconds_since(t0);
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%d/10000 objective mismatches, %.2f s",
                  mismatches, dt);
    report(2, mismatches == 0 && dt < 60.0, buf);
  }

  // ---- 3: (k, s) decision landscape vs oracle ------------------------------
  {
    const Vec d = discomfort(net, opt.x_star);
    const int grid = 200;
    const long long k_max = 600;
    int mismatches = 0;
    for (int i = 0; i < grid; ++i) {
      const long long k = std::llround(static_cast<double>(i) * k_max / (grid - 1));
      for (int t = 0; t < grid; ++t) {
        const double s =
            pop.s_min + (pop.s_max - pop.s_min) * t / static_cast<double>(grid - 1);
        UserContext ctx{k, 0, s, pop.horizon};
        if (!is_feasible(ctx, kPStar)) continue;
        const auto a = best_response_d(ctx, kPStar, d, pop.s_min, pop.s_max,
                                       pop.s_bar());
        const auto b = oracle_best_response_d(ctx, kPStar, d, pop.s_bar());
        // Arc choices agree up to exact ties.
        if (a.arc != b.arc &&
            std::abs(oracle_arc_objective(ctx, kPStar, d, pop.s_bar(), a.arc) -
                     b.objective) > 1e-12)
          ++mismatches;
      }
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%d/%d grid mismatches, k in [0,%lld]",
                  mismatches, grid * grid, k_max);
    report(3, mismatches == 0, buf);
  }

  // ---- 4: positive-scaling invariance --------------------------------------
  {
    Rng rng(404);
    int violations = 0;
    for (int t = 0; t < 1000; ++t) {
      Instance inst = random_instance(rng);
      if (!is_feasible(inst.ctx, inst.p)) continue;
      const auto base =
          best_response_d(inst.ctx, inst.p, inst.d, 0.0, 2.0, 1.0);
      for (int alpha : {2, 10}) {
        UserContext ctx = inst.ctx;
        ctx.k *= alpha;
        ctx.k_ref *= alpha;
        PriceVector p = inst.p;
        for (int& v : p) v *= alpha;
        if (best_response_d(ctx, p, inst.d, 0.0, 2.0, 1.0).optimal_set !=
            base.optimal_set)
          ++violations;
      }
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "%d optimal-set changes over 1000 instances x {2,10}",
                  violations);
    report(4, violations == 0, buf);
  }

  // ---- 5: chain structure ---------------------------------------------------
  {
    const KrefDist theta = pop.kref.materialize(kPStar);
    double col_err = 0.0, res = 0.0, outside = 0.0;
    for (std::size_t r = 0; r < theta.support.size(); ++r) {
      const long long kref = theta.support[r];
      const KarmaChain c = build_chain(kPStar[0], kref, kPStar,
                                       opt.x_star_quant, net, pop);
      for (int col = 0; col < c.A.size(); ++col) {
        double s = 0.0;
        for (const auto& [row, v] : c.A.cols[col]) s += v;
        col_err = std::max(col_err, std::abs(s - 1.0));
      }
      const Vec api = c.A.apply(c.pi_inf);
      for (std::size_t i = 0; i < c.pi_inf.size(); ++i)
        res = std::max(res, std::abs(api[i] - c.pi_inf[i]));
      const long long hi = kref + 5 * 79 + 45;
      double out_mass = 0.0;
      for (std::size_t i = 0; i < c.states.size(); ++i)
        if (c.states[i] > hi) out_mass += c.pi_inf[i];
      outside = std::max(outside, out_mass);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "column-sum err %.1e, residual %.1e, mass outside bound %.1e",
                  col_err, res, outside);
    report(5, col_err <= 1e-12 && res <= 1e-10 && outside <= 1e-10, buf);
  }

  // ---- 6: aggregate flows at the reference prices ----------------------------
  {
    const AggregateResult agg =
        steady_state_flows(kPStar, opt.x_star_quant, net, pop, sc.k0);
    const double gap = (agg.cost - opt.cost) / opt.cost;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "relative cost gap %.4f%% at p*", 100.0 * gap);
    report(6, std::abs(gap) <= 0.01, buf);
  }

  // ---- 7: genetic price design ---------------------------------------------
  {
    const auto t0 = std::chrono::steady_clock::now();
    const DesignResult des =
        design_prices(net, opt.x_star, opt.x_star_quant, pop, sc.design, sc.k0);
    const double dt = seconds_since(t0);
    bool constraints = des.p_star.front() >= 1 && des.p_star.back() <= -1;
    long long balance = 0;
    for (int j = 0; j < net.n; ++j) {
      if (j > 0 && des.p_star[j] >= des.p_star[j - 1]) constraints = false;
      if (std::abs(des.p_star[j]) > sc.design.price_bound) constraints = false;
      balance += std::llround(opt.x_star_quant[j] * 1000.0) * des.p_star[j];
    }
    constraints = constraints && balance == 0;
    std::string pstr;
    for (int v : des.p_star) pstr += (pstr.empty() ? "" : ",") + std::to_string(v);
    char buf[200];
    std::snprintf(buf, sizeof(buf), "p = [%s], subopt %.3f%%, %.0f s",
                  pstr.c_str(), 100.0 * des.relative_subopt, dt);
    report(7, constraints && des.relative_subopt <= 0.01 && dt < 500.0, buf);
  }

  // ---- 8 & 9: simulation reproduction and conservation ----------------------
  {
    const auto t0 = std::chrono::steady_clock::now();
    const KrefDist kref = pop.kref.materialize(kPStar);
    std::vector<Agent> agents = init_population(
        sc.sim.num_agents, sc.sim.karma_init, kref, kPStar[0], sc.sim.seed);
    long long total_karma = 0;
    for (const Agent& a : agents) total_karma += a.karma;

    SimTrace trace;
    trace.num_agents = sc.sim.num_agents;
    bool conservation = true;
    std::vector<long long> prev(net.n, 0);
    for (int day = 1; day <= sc.sim.days; ++day) {
      const DayRecord rec =
          step_day(agents, kPStar, net, pop, opt.x_star, day, sc.sim.seed, prev);
      // Karma drift == -M p^T x(t) == -sum_j p_j counts_j, exactly.
      long long collected = 0, travelers = 0;
      for (int j = 0; j < net.n; ++j) {
        collected += static_cast<long long>(kPStar[j]) * rec.counts[j];
        travelers += rec.counts[j];
      }
      long long now = 0;
      for (const Agent& a : agents) now += a.karma;
      if (now != total_karma - collected) conservation = false;
      if (travelers != rec.travelers) conservation = false;
      total_karma = now;
      prev = rec.counts;
      trace.days.push_back(rec);
    }
    const double dt = seconds_since(t0);

    const int m = sc.sim.num_agents;
    const auto& days = trace.days;
    const std::size_t tail = 50;
    double gap50 = 0.0, gap10 = 0.0, reduction = 0.0;
    Vec flows50(net.n, 0.0);
    int nonconv_tail = 0;
    for (std::size_t i = days.size() - tail; i < days.size(); ++i) {
      gap50 += days[i].rel_cost / tail;
      reduction += -days[i].dbar_interpreted / tail;
      if (!days[i].converged) ++nonconv_tail;
      const Vec x = days[i].flows(net.n, m);
      for (int j = 0; j < net.n; ++j) flows50[j] += x[j] / tail;
    }
    for (int i = 0; i < 10; ++i) gap10 += days[i].rel_cost / 10.0;
    double flow_dev = 0.0;
    for (int j = 0; j < net.n; ++j)
      flow_dev = std::max(flow_dev, std::abs(flows50[j] - kXStarPub[j]));
    int nonconv = 0;
    for (const DayRecord& r : days)
      if (!r.converged) ++nonconv;

    const bool ok8 = days.size() == static_cast<std::size_t>(sc.sim.days) &&
                     gap50 <= 0.01 && flow_dev <= 0.02 && reduction >= 0.05 &&
                     reduction <= 0.11 && gap10 > gap50 &&
                     nonconv_tail * 100 < static_cast<int>(tail) && dt < 600.0;
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "gap50 %.3f%%, flow dev %.4f, discomfort reduction %.2f%%, "
                  "gap10 %.1f%%, nonconverged %d/%d days, %.0f s",
                  100.0 * gap50, flow_dev, 100.0 * reduction, 100.0 * gap10,
                  nonconv, static_cast<int>(days.size()), dt);
    report(8, ok8, buf);

    // 9: drift identity checked above; selection columns and flow accounting.
    bool cols_ok = true;
    const Vec d_quant = discomfort(net, opt.x_star_quant);
    for (long long k : {0LL, 13LL, 45LL, 79LL, 200LL}) {
      const Vec cp = choice_probability_d(k, 0, kPStar, d_quant, pop);
      const double s = std::accumulate(cp.begin(), cp.end(), 0.0);
      if (std::abs(s - 1.0) > 1e-12) cols_ok = false;
    }
    const KarmaChain c =
        build_chain(kPStar[0], 0, kPStar, opt.x_star_quant, net, pop);
    for (const Vec& col : c.P_sel) {
      const double s = std::accumulate(col.begin(), col.end(), 0.0);
      if (std::abs(s - 1.0) > 1e-12) cols_ok = false;
    }
    report(9, conservation && cols_ok,
           conservation ? (cols_ok ? "karma drift exact, selection columns sum to 1"
                                   : "selection column sum off")
                        : "karma drift mismatch");
  }

  // ---- 10: run-all determinism ----------------------------------------------
  {
    const std::string base = "/tmp/karma_accept";
    bool ok = true;
    std::string detail;
    for (const char* d : {"a", "b"}) {
      const std::string dir = base + "_" + d;
      if (std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str()) != 0) {
        ok = false;
        detail = "cannot prepare output directory";
        continue;
      }
      const std::string cmd = cli + " run-all --scenario " + scenario_path +
                              " --seed 42 --generations 5 --days 30 --out " +
                              dir + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        ok = false;
        detail = "run-all invocation failed";
      }
    }
    if (ok) {
      for (const char* f :
           {"optimum.json", "design.json", "trace.csv", "manifest.json"}) {
        const std::string a = read_file(base + "_a/" + std::string(f));
        const std::string b = read_file(base + "_b/" + std::string(f));
        if (a.empty() || a != b) {
          ok = false;
          detail = std::string(f) + " differs or is empty";
          break;
        }
      }
      if (ok) detail = "two seeded runs byte-identical across all outputs";
    }
    report(10, ok, detail);
  }

  std::printf("%s\n", g_failures == 0 ? "ALL CRITERIA PASSED"
                                      : "SOME CRITERIA FAILED");
  return g_failures == 0 ? 0 : 1;
}
