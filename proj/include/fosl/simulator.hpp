// Stochastic classical-model swing-equation simulator.
//
//   d(delta)/dt = omega
//   M d(omega)/dt = Pm - Pe(delta) - D omega - E^2 G Sigma eta + u(t)
//
// with Pe_i = E_i^2 G_ii + sum_{j != i} E_i E_j Y_ij cos(phi_ij - delta_i + delta_j).
// Forcing u enters the speed equation of its target machine, which is how
// exciter- and governor-side periodic disturbances show up in rotor dynamics.
#pragma once

#include "fosl/types.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fosl {

// Slow multiplicative drift of each G_ii, an Ornstein-Uhlenbeck process with
// the given stationary standard deviation. Stands in for load power-factor
// variation; disabled when std_dev is zero.
struct ConductanceDrift {
  double std_dev = 0.0;
  double time_constant_s = 10.0;
};

struct GridModelParams {
  std::vector<std::string> labels;
  std::vector<double> inertia;     // M_i > 0
  std::vector<double> damping;     // D_i >= 0
  std::vector<double> emf;         // E_i > 0
  std::vector<double> mech_power;  // Pm_i
  Matrix admittance_magnitude;     // Y_ij, r x r, symmetric
  Matrix admittance_angle;         // phi_ij, rad
  std::vector<double> sigma_load;  // per-machine load-noise multiplier
  ConductanceDrift drift;
};

class GridModel {
 public:
  // Throws InvalidArgument / ShapeMismatch on invalid parameters.
  explicit GridModel(GridModelParams params);

  int machines() const noexcept { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Vector& inertia() const noexcept { return inertia_; }
  const Vector& damping() const noexcept { return damping_; }
  const Vector& emf() const noexcept { return emf_; }
  const Vector& mech_power() const noexcept { return mech_power_; }
  const Matrix& admittance_magnitude() const noexcept { return y_mag_; }
  const Matrix& admittance_angle() const noexcept { return y_angle_; }
  const Vector& sigma_load() const noexcept { return sigma_load_; }
  const ConductanceDrift& drift() const noexcept { return drift_; }
  // G_ii = Y_ii cos(phi_ii).
  Vector self_conductance() const;

  int index_of(const std::string& label) const;

  GridModel with_mech_power(const Vector& pm) const;
  // Pm := Pe(angles), so the given angles become an exact operating point.
  GridModel balanced_at(const Vector& angles) const;
  GridModel with_sigma_load(const Vector& sigma) const;
  GridModel with_damping(const Vector& damping) const;

 private:
  std::vector<std::string> labels_;
  Vector inertia_, damping_, emf_, mech_power_, sigma_load_;
  Matrix y_mag_, y_angle_;
  ConductanceDrift drift_;
};

enum class Waveform { Sine, Rectangular };

struct FrequencySwitch {
  double time_s = 0.0;
  double frequency_hz = 0.0;
  double amplitude = 0.0;
};

struct ForcingSpec {
  std::string target;
  Waveform waveform = Waveform::Sine;
  double amplitude = 0.0;     // pu power, peak
  double frequency_hz = 0.0;  // fundamental
  double phase_rad = 0.0;
  double start_s = -std::numeric_limits<double>::infinity();
  double end_s = std::numeric_limits<double>::infinity();
  std::optional<FrequencySwitch> change;
};

// Throws InvalidArgument unless 0 < frequency < nyquist_hz and amplitude > 0.
void validate_forcing(const ForcingSpec& spec, double nyquist_hz);

// u(t) of a single forcing. After a switch the phase stays continuous.
double forcing_value(const ForcingSpec& spec, double t);

struct SimState {
  double t = 0.0;
  Vector delta;
  Vector omega;
};

Vector electrical_power(const Vector& delta, const GridModel& model);
// dPe/ddelta, r x r.
Matrix electrical_power_jacobian(const Vector& delta, const GridModel& model);
// The 2r x 2r small-signal state matrix [[0, I], [-M^-1 dPe/ddelta, -M^-1 D]].
Matrix state_matrix(const GridModel& model, const Vector& delta);

// Speed increment contributed by the load noise over one step:
// -M^-1 E^2 G Sigma eta sqrt(dt).
Vector noise_increment(const GridModel& model, const Vector& noise_draw, double dt);

// One Euler-Maruyama step. Forcings refer to machines by label.
// Throws InvalidArgument for dt outside (0, 1e-2], Diverged past 1e6.
SimState step(const SimState& state, double dt, const GridModel& model,
              const std::vector<ForcingSpec>& forcings, const Vector& noise_draw);

// Newton solve of Pm = Pe(delta) with delta_1 fixed at zero.
// Throws NoEquilibrium.
Vector solve_equilibrium(const GridModel& model);

struct NaturalMode {
  double frequency_hz = 0.0;
  double damping_ratio = 0.0;
};

// Oscillatory eigenpairs of the linearization, ascending in frequency.
// Throws NotAnEquilibrium when the power balance residual exceeds 1e-8.
std::vector<NaturalMode> natural_modes(const GridModel& model, const Vector& equilibrium);

struct SimulationOptions {
  double duration_s = 40.0;
  // Zero selects the largest step <= 1 ms that divides the output period.
  double internal_dt_s = 0.0;
  double output_rate_hz = 30.0;
  double warmup_s = 5.0;
  std::uint64_t seed = 0;
  // Starting angles; solved from the model when absent.
  std::optional<Vector> initial_angles;
};

double default_internal_dt(double output_rate_hz);

// Integrates from equilibrium, drops the warm-up, decimates to the output
// rate and mean-centers each channel. Output timestamps start at 0 and
// forcing times are on the same clock (warm-up runs over negative time).
MeasurementWindow simulate(const GridModel& model, const std::vector<ForcingSpec>& forcings,
                           const SimulationOptions& options);

}  // namespace fosl
