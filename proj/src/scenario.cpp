#include "karma/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "karma/errors.hpp"

namespace karma {

using nlohmann::json;

void Scenario::validate() const {
  std::vector<std::string> problems;
  auto attempt = [&](auto&& fn, const std::string& where) {
    try {
      fn();
    } catch (const std::exception& e) {
      problems.push_back(where + ": " + e.what());
    }
  };
  attempt([&] { network.validate(); }, "network");
  attempt([&] { population.validate(); }, "population");
  attempt([&] { design.validate(network.n); }, "design");
  if (sim.num_agents < 1) problems.push_back("sim.num_agents: must be >= 1");
  if (sim.days < 0) problems.push_back("sim.days: must be >= 0");
  if (quant_decimals < 0) problems.push_back("quant_decimals: must be >= 0");
  if (k0 && *k0 < 0) problems.push_back("k0: must be nonnegative");
  if (!problems.empty()) {
    std::string msg = "scenario validation failed:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
}

namespace {

Vec get_vec(const json& j, const char* key) {
  if (!j.contains(key))
    throw ValidationError(std::string("missing field: ") + key);
  return j.at(key).get<Vec>();
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  json j;
  try {
    j = json::parse(in, /*cb=*/nullptr, /*allow_exceptions=*/true,
                    /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError("scenario parse error in " + path + ": " + e.what());
  }

  Scenario sc;
  try {
    const json& net = j.at("network");
    sc.network.n = net.at("n").get<int>();
    sc.network.d0 = get_vec(net, "d0");
    sc.network.kappa = get_vec(net, "kappa");
    sc.network.alpha = net.at("alpha").get<double>();
    sc.network.beta = net.at("beta").get<int>();
    sc.network.c0 = get_vec(net, "c0");

    const json& pop = j.at("population");
    sc.population.p_home = pop.at("p_home").get<double>();
    sc.population.horizon = pop.at("horizon").get<int>();
    const json& sens = pop.at("sensitivity");
    if (sens.at("type").get<std::string>() != "uniform")
      throw ValidationError("population.sensitivity.type: only 'uniform' supported");
    sc.population.s_min = sens.at("min").get<double>();
    sc.population.s_max = sens.at("max").get<double>();
    const json& kref = pop.at("kref");
    const std::string kt = kref.at("type").get<std::string>();
    if (kt == "price_support") {
      sc.population.kref.mode = KrefMode::PriceSupport;
    } else if (kt == "explicit") {
      sc.population.kref.mode = KrefMode::Explicit;
      sc.population.kref.explicit_dist.support =
          kref.at("support").get<std::vector<long long>>();
      sc.population.kref.explicit_dist.weights = get_vec(kref, "weights");
    } else {
      throw ValidationError("population.kref.type: 'price_support' or 'explicit'");
    }

    if (j.contains("design")) {
      const json& d = j.at("design");
      auto opt = [&](const char* key, auto& field) {
        if (d.contains(key)) field = d.at(key).get<std::decay_t<decltype(field)>>();
      };
      opt("price_bound", sc.design.price_bound);
      opt("population_size", sc.design.population_size);
      opt("generations", sc.design.generations);
      opt("mutation_rate", sc.design.mutation_rate);
      opt("crossover_rate", sc.design.crossover_rate);
      opt("elite_count", sc.design.elite_count);
      opt("subopt_stop", sc.design.subopt_stop);
      opt("seed", sc.design.seed);
    }

    if (j.contains("sim")) {
      const json& s = j.at("sim");
      if (s.contains("num_agents")) sc.sim.num_agents = s.at("num_agents").get<int>();
      if (s.contains("days")) sc.sim.days = s.at("days").get<int>();
      if (s.contains("seed")) sc.sim.seed = s.at("seed").get<std::uint64_t>();
      if (s.contains("karma_init")) {
        const json& ki = s.at("karma_init");
        const std::string t = ki.at("type").get<std::string>();
        if (t == "uniform_range_p1") {
          sc.sim.karma_init.kind = KarmaInitKind::UniformRange;
          sc.sim.karma_init.lo_mult = ki.value("lo_mult", 25.0);
          sc.sim.karma_init.hi_mult = ki.value("hi_mult", 50.0);
        } else if (t == "two_point_p1") {
          sc.sim.karma_init.kind = KarmaInitKind::TwoPoint;
          sc.sim.karma_init.lo_mult = ki.value("lo_mult", 25.0);
          sc.sim.karma_init.hi_mult = ki.value("hi_mult", 50.0);
        } else if (t == "delta") {
          sc.sim.karma_init.kind = KarmaInitKind::Delta;
          sc.sim.karma_init.delta_value = ki.at("value").get<long long>();
        } else {
          throw ValidationError(
              "sim.karma_init.type: 'uniform_range_p1', 'two_point_p1' or 'delta'");
        }
      }
    }

    if (j.contains("k0")) {
      const json& k0 = j.at("k0");
      if (k0.is_string()) {
        if (k0.get<std::string>() != "p1")
          throw ValidationError("k0: string value must be 'p1'");
      } else {
        sc.k0 = k0.get<long long>();
      }
    }
    if (j.contains("quant_decimals"))
      sc.quant_decimals = j.at("quant_decimals").get<int>();
  } catch (const json::exception& e) {
    throw ValidationError("scenario field error in " + path + ": " + e.what());
  }

  sc.validate();
  return sc;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void emit_csv(const std::string& path, const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << "\r\n";
  };
  write_row(header);
  for (const auto& r : rows) write_row(r);
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> trace_header(int n) {
  std::vector<std::string> h{"day"};
  for (int j = 1; j <= n; ++j) h.push_back("x_" + std::to_string(j));
  for (const char* c : {"k_mean", "k_std", "rel_cost", "dbar_literal",
                        "dbar_interpreted", "sbar_dev", "converged_flag"})
    h.push_back(c);
  return h;
}

std::vector<std::vector<std::string>> trace_rows(const SimTrace& trace, int n) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trace.days.size());
  for (const DayRecord& r : trace.days) {
    std::vector<std::string> row{std::to_string(r.day)};
    const Vec x = r.flows(n, trace.num_agents);
    for (int j = 0; j < n; ++j) row.push_back(format_double(x[j]));
    row.push_back(format_double(r.k_mean));
    row.push_back(format_double(r.k_std));
    row.push_back(format_double(r.rel_cost));
    row.push_back(format_double(r.dbar_literal));
    row.push_back(format_double(r.dbar_interpreted));
    row.push_back(format_double(r.sbar_dev));
    row.push_back(r.converged ? "1" : "0");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace karma
