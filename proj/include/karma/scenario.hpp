#pragma once

#include <optional>
#include <string>

#include "karma/network.hpp"
#include "karma/pricing.hpp"
#include "karma/sim.hpp"

namespace karma {

// Full experiment description loaded from a commented-JSON scenario file.
struct Scenario {
  Network network;
  Population population;
  DesignConfig design;
  SimConfig sim;
  std::optional<long long> k0;  // chain initialization; nullopt = "p1"
  int quant_decimals = 3;

  void validate() const;
};

// Parses and validates a scenario file. Parse problems raise IoError /
// ValidationError; validation reports every violation with its field path.
Scenario load_scenario(const std::string& path);

// CSV emission (RFC-4180-style, header row, 10 significant digits).
std::string format_double(double v);
void emit_csv(const std::string& path,
              const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows);

std::vector<std::vector<std::string>> trace_rows(const SimTrace& trace, int n);
std::vector<std::string> trace_header(int n);

}  // namespace karma
