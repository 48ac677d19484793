#include "support/fixtures.hpp"

#include <cmath>
#include <numbers>

namespace fixture {

std::string data_path(const std::string& relative) {
  return std::string(FOSL_DATA_DIR) + "/" + relative;
}

fosl::Scenario scenario(const std::string& name) {
  return fosl::load_scenario(data_path("scenarios/" + name + ".json"));
}

fosl::MeasurementWindow simulate(const std::string& name, std::uint64_t seed) {
  fosl::Scenario s = scenario(name);
  s.options.seed = seed;
  return fosl::simulate(s.model, s.forcings, s.options);
}

std::vector<std::string> labels(int r) {
  std::vector<std::string> out;
  for (int j = 0; j < r; ++j) out.push_back("M" + std::to_string(j + 1));
  return out;
}

fosl::MeasurementWindow window(const fosl::Matrix& angles, const fosl::Matrix& speeds,
                               double rate) {
  fosl::RawSamples raw;
  for (Eigen::Index k = 0; k < angles.rows(); ++k) raw.timestamps.push_back(static_cast<double>(k) / rate);
  raw.labels = labels(static_cast<int>(angles.cols()));
  raw.angles = angles;
  raw.speeds = speeds;
  return fosl::validate_window(std::move(raw), rate);
}

double two_machine_angle(const TwoMachine& p) {
  // Pe2 = E2^2 G2 + E1 E2 Y cos(pi/2 - delta_2) = E2^2 G2 + E1 E2 Y sin(delta_2).
  return std::asin((p.pm2 - p.e2 * p.e2 * p.g2) / (p.e1 * p.e2 * p.y12));
}

fosl::GridModel two_machine(const TwoMachine& p) {
  fosl::GridModelParams q;
  q.labels = {"A", "B"};
  q.inertia = {p.m1, p.m2};
  q.damping = {p.d_per_m * p.m1, p.d_per_m * p.m2};
  q.emf = {p.e1, p.e2};
  q.admittance_magnitude = fosl::Matrix(2, 2);
  q.admittance_magnitude << p.g1, p.y12, p.y12, p.g2;
  q.admittance_angle = fosl::Matrix(2, 2);
  q.admittance_angle << 0.0, std::numbers::pi / 2, std::numbers::pi / 2, 0.0;
  q.sigma_load = {p.sigma, p.sigma};
  const double d2 = std::abs(p.pm2 - p.e2 * p.e2 * p.g2) <= p.e1 * p.e2 * p.y12
                        ? two_machine_angle(p)
                        : 0.0;
  // Pe1 = E1^2 G1 + E1 E2 Y sin(delta_1 - delta_2).
  const double pm1 = p.e1 * p.e1 * p.g1 - p.e1 * p.e2 * p.y12 * std::sin(d2);
  q.mech_power = {pm1, p.pm2};
  return fosl::GridModel(std::move(q));
}

}  // namespace fixture
