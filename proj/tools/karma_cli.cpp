// Command-line driver: optimum / design / simulate / aggregate / chain /
// landscape / run-all over a scenario file.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "karma/aggregate.hpp"
#include "karma/best_response.hpp"
#include "karma/chain.hpp"
#include "karma/errors.hpp"
#include "karma/network.hpp"
#include "karma/optimum.hpp"
#include "karma/oracle.hpp"
#include "karma/pricing.hpp"
#include "karma/scenario.hpp"
#include "karma/sim.hpp"

namespace {

using karma::PriceVector;
using karma::Vec;
using nlohmann::json;

struct CommonOpts {
  std::string scenario_path;
  std::string out;  // file or directory depending on subcommand; "" = stdout
  std::string prices_csv;
  std::optional<std::uint64_t> seed;
};

PriceVector parse_prices(const std::string& csv, int n) {
  PriceVector p;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      p.push_back(v);
    } catch (const std::exception&) {
      throw karma::ValidationError("--prices: cannot parse integer '" + tok + "'");
    }
  }
  if (static_cast<int>(p.size()) != n)
    throw karma::ValidationError("--prices: expected " + std::to_string(n) +
                                 " comma-separated integers, got " +
                                 std::to_string(p.size()));
  return p;
}

void write_text(const std::string& path, const std::string& body) {
  if (path.empty()) {
    std::fputs(body.c_str(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw karma::IoError("cannot open output file: " + path);
  out << body;
  if (!out) throw karma::IoError("write failed: " + path);
}

json optimum_to_json(const karma::OptimumResult& r, const karma::Network& net) {
  return json{{"x_star", r.x_star},
              {"x_star_quant", r.x_star_quant},
              {"discomfort", karma::discomfort(net, r.x_star)},
              {"cost", r.cost},
              {"kkt_residual", r.kkt_residual},
              {"iterations", r.iterations}};
}

json design_to_json(const karma::DesignResult& r) {
  return json{{"p_star", r.p_star},
              {"achieved_cost", r.achieved_cost},
              {"relative_subopt", r.relative_subopt},
              {"evaluations", r.evaluations},
              {"target_met", r.target_met},
              {"history", r.history}};
}

std::string trace_to_csv(const karma::SimTrace& trace, int n) {
  std::ostringstream out;
  const auto header = karma::trace_header(n);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\r\n";
  for (const auto& row : karma::trace_rows(trace, n)) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\r\n";
  }
  return out.str();
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

int run(int argc, char** argv) {
  CLI::App app{"Artificial-currency routing toolkit: system optimum, price "
               "design, Karma-chain analysis and repeated-game simulation"};
  app.require_subcommand(1);

  CommonOpts opt;
  int days_override = -1;
  int generations_override = -1;
  bool fixed_point = false;
  long long chain_k0 = -1;  // -1 = scenario default
  long long chain_kref = 0;
  long long land_kref = 0;
  long long land_kmax = 400;
  int land_grid = 200;

  auto add_common = [&](CLI::App* sub, bool with_prices) {
    sub->add_option("--scenario", opt.scenario_path, "Scenario file (JSON)")
        ->required();
    sub->add_option("--out", opt.out, "Output path (default: stdout)");
    sub->add_option("--seed", opt.seed, "Master seed override");
    if (with_prices)
      sub->add_option("--prices", opt.prices_csv,
                      "Comma-separated integer arc prices");
  };

  CLI::App* c_opt = app.add_subcommand("optimum", "Solve the system optimum");
  add_common(c_opt, false);

  CLI::App* c_des = app.add_subcommand("design", "Genetic integer price design");
  add_common(c_des, false);
  c_des->add_option("--generations", generations_override, "Generation budget");

  CLI::App* c_sim = app.add_subcommand("simulate", "Agent-based repeated game");
  add_common(c_sim, true);
  c_sim->add_option("--days", days_override, "Number of simulated days");

  CLI::App* c_agg = app.add_subcommand("aggregate", "Steady-state aggregate flows");
  add_common(c_agg, true);
  c_agg->add_flag("--fixed-point", fixed_point,
                  "Iterate to the stationary-flow fixed point instead of "
                  "evaluating at the system optimum");

  CLI::App* c_chn = app.add_subcommand("chain", "Karma Markov-chain analysis");
  add_common(c_chn, true);
  c_chn->add_option("--k0", chain_k0, "Initial Karma level (default: scenario)");
  c_chn->add_option("--kref", chain_kref, "Reference Karma level");

  CLI::App* c_lnd = app.add_subcommand("landscape", "(k, s) decision-grid CSV");
  add_common(c_lnd, true);
  c_lnd->add_option("--kref", land_kref, "Reference Karma level");
  c_lnd->add_option("--k-max", land_kmax, "Largest Karma level in the grid");
  c_lnd->add_option("--grid", land_grid, "Grid resolution per axis");

  CLI::App* c_all = app.add_subcommand(
      "run-all", "optimum -> design -> simulate, with an output manifest");
  add_common(c_all, false);
  c_all->add_option("--days", days_override, "Simulated-day override");
  c_all->add_option("--generations", generations_override, "Generation override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  karma::Scenario sc = karma::load_scenario(opt.scenario_path);
  sc.validate();
  if (opt.seed) {
    sc.design.seed = *opt.seed;
    sc.sim.seed = *opt.seed;
  }
  if (days_override >= 0) sc.sim.days = days_override;
  if (generations_override >= 0) sc.design.generations = generations_override;

  const karma::Network& net = sc.network;
  const karma::Population& pop = sc.population;
  auto solve_opt = [&] {
    return karma::solve_system_optimum(net, pop.p_go(), 1e-9, 100000, nullptr,
                                       sc.quant_decimals);
  };

  if (*c_opt) {
    const auto r = solve_opt();
    write_text(opt.out, optimum_to_json(r, net).dump(2) + "\n");
  } else if (*c_des) {
    const auto o = solve_opt();
    const auto r = karma::design_prices(net, o.x_star, o.x_star_quant, pop,
                                        sc.design, sc.k0);
    write_text(opt.out, design_to_json(r).dump(2) + "\n");
  } else if (*c_sim) {
    const PriceVector p = parse_prices(opt.prices_csv, net.n);
    const auto o = solve_opt();
    const auto trace = karma::run_simulation(net, pop, sc.sim, p, o.x_star);
    write_text(opt.out, trace_to_csv(trace, net.n));
  } else if (*c_agg) {
    const PriceVector p = parse_prices(opt.prices_csv, net.n);
    const auto o = solve_opt();
    // Evaluate on the quantized optimum: integer prices can balance the
    // Karma ledger exactly on this grid (p^T x*_quant = 0), not on the raw
    // optimizer output.
    Vec x_eval = o.x_star_quant;
    if (fixed_point)
      x_eval = karma::wardrop_fixed_point(p, net, pop, o.x_star, sc.k0);
    const auto r = karma::steady_state_flows(p, x_eval, net, pop, sc.k0);
    json per;
    for (const auto& [kref, flows] : r.per_kref)
      per.push_back(json{{"k_ref", kref}, {"flows", flows}});
    write_text(opt.out, json{{"x_eval", x_eval},
                             {"flows", r.flows},
                             {"cost", r.cost},
                             {"cost_optimum", o.cost},
                             {"per_kref", per}}
                                .dump(2) +
                            "\n");
  } else if (*c_chn) {
    const PriceVector p = parse_prices(opt.prices_csv, net.n);
    const auto o = solve_opt();
    const long long k0 =
        chain_k0 >= 0 ? chain_k0 : (sc.k0 ? *sc.k0 : static_cast<long long>(p[0]));
    const auto ch = karma::build_chain(k0, chain_kref, p, o.x_star, net, pop);
    std::ostringstream csv;
    csv << "k,pi";
    for (int j = 0; j < net.n; ++j) csv << ",P_sel_" << (j + 1);
    csv << "\r\n";
    for (std::size_t i = 0; i < ch.states.size(); ++i) {
      csv << ch.states[i] << "," << karma::format_double(ch.pi_inf[i]);
      for (int j = 0; j < net.n; ++j)
        csv << "," << karma::format_double(ch.P_sel[i][j]);
      csv << "\r\n";
    }
    write_text(opt.out, csv.str());
  } else if (*c_lnd) {
    const PriceVector p = parse_prices(opt.prices_csv, net.n);
    const auto o = solve_opt();
    const Vec d = karma::discomfort(net, o.x_star);
    std::ostringstream csv;
    csv << "k,s,arc\r\n";
    for (int i = 0; i < land_grid; ++i) {
      const long long k = land_grid == 1
                              ? land_kmax
                              : static_cast<long long>(std::llround(
                                    static_cast<double>(i) * land_kmax /
                                    (land_grid - 1)));
      for (int t = 0; t < land_grid; ++t) {
        const double s = pop.s_min + (pop.s_max - pop.s_min) *
                                         (land_grid == 1 ? 1.0
                                                         : static_cast<double>(t) /
                                                               (land_grid - 1));
        karma::UserContext ctx{k, land_kref, s, pop.horizon};
        int arc = 0;  // 0 = infeasible / stays home
        if (karma::is_feasible(ctx, p)) {
          const auto br = karma::best_response_d(ctx, p, d, pop.s_min,
                                                 pop.s_max, pop.s_bar());
          arc = br.arc + 1;
        }
        csv << k << "," << karma::format_double(s) << "," << arc << "\r\n";
      }
    }
    write_text(opt.out, csv.str());
  } else if (*c_all) {
    if (opt.out.empty())
      throw karma::ValidationError("run-all requires --out <directory>");
    const std::string dir = opt.out;
    auto path = [&](const char* name) { return dir + "/" + name; };

    const auto o = solve_opt();
    const std::string opt_json = optimum_to_json(o, net).dump(2) + "\n";
    write_text(path("optimum.json"), opt_json);

    const auto des = karma::design_prices(net, o.x_star, o.x_star_quant, pop,
                                          sc.design, sc.k0);
    const std::string des_json = design_to_json(des).dump(2) + "\n";
    write_text(path("design.json"), des_json);

    const auto trace = karma::run_simulation(net, pop, sc.sim, des.p_star, o.x_star);
    const std::string trace_csv = trace_to_csv(trace, net.n);
    write_text(path("trace.csv"), trace_csv);

    json manifest{
        {"scenario", opt.scenario_path},
        {"seeds", {{"design", sc.design.seed}, {"sim", sc.sim.seed}}},
        {"outputs",
         {{"optimum.json", hex64(fnv1a64(opt_json))},
          {"design.json", hex64(fnv1a64(des_json))},
          {"trace.csv", hex64(fnv1a64(trace_csv))}}}};
    write_text(path("manifest.json"), manifest.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const karma::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const karma::ConvergenceError& e) {
    std::fprintf(stderr, "convergence error: %s (residual %.3e)\n", e.what(),
                 e.residual);
    return 3;
  } catch (const karma::ResourceError& e) {
    std::fprintf(stderr, "resource error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
