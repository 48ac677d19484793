// Shared fixtures: shipped scenarios and small hand-built models/windows.
#pragma once

#include "fosl/io.hpp"
#include "fosl/simulator.hpp"
#include "fosl/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fixture {

std::string data_path(const std::string& relative);

// data/scenarios/<name>.json
fosl::Scenario scenario(const std::string& name);
fosl::MeasurementWindow simulate(const std::string& name, std::uint64_t seed);

// Window with timestamps k / rate and labels M1..Mr.
fosl::MeasurementWindow window(const fosl::Matrix& angles, const fosl::Matrix& speeds,
                               double rate = 30.0);

// Two machines joined by a lossless line (phi = pi/2) with self conductances.
struct TwoMachine {
  double m1 = 0.03, m2 = 0.02;
  double d_per_m = 0.5;
  double e1 = 1.05, e2 = 1.0;
  double y12 = 1.2;
  double g1 = 0.4, g2 = 0.5;
  double pm2 = 0.9;  // Pm1 follows from power balance
  double sigma = 0.0;
};
fosl::GridModel two_machine(const TwoMachine& p);
// delta_2 of the closed-form operating point (delta_1 = 0).
double two_machine_angle(const TwoMachine& p);

std::vector<std::string> labels(int r);

}  // namespace fixture
