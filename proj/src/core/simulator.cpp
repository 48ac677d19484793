#include "fosl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fosl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDivergenceLimit = 1e6;
constexpr double kMaxStep = 1e-2;

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) throw Error(code, message);
}

// Precomputed coupling terms shared by every step of one integration.
class Dynamics {
 public:
  Dynamics(const GridModel& model, const std::vector<ForcingSpec>& forcings)
      : model_(model),
        r_(model.machines()),
        conductance_(model.self_conductance()),
        coupling_(Matrix::Zero(r_, r_)) {
    const Vector& e = model.emf();
    for (int i = 0; i < r_; ++i) {
      for (int j = 0; j < r_; ++j) {
        if (i != j) coupling_(i, j) = e(i) * e(j) * model.admittance_magnitude()(i, j);
      }
    }
    for (const auto& f : forcings) targets_.emplace_back(model.index_of(f.target), &f);
  }

  // Conductance scale factors default to one (no drift).
  Vector power(const Vector& delta, const Vector* g_scale = nullptr) const {
    const Vector& e = model_.emf();
    const Matrix& phi = model_.admittance_angle();
    Vector pe(r_);
    for (int i = 0; i < r_; ++i) {
      double g = conductance_(i);
      if (g_scale) g *= (*g_scale)(i);
      double sum = e(i) * e(i) * g;
      for (int j = 0; j < r_; ++j) {
        if (j != i) sum += coupling_(i, j) * std::cos(phi(i, j) - delta(i) + delta(j));
      }
      pe(i) = sum;
    }
    return pe;
  }

  Vector forcing(double t) const {
    Vector u = Vector::Zero(r_);
    for (const auto& [index, spec] : targets_) u(index) += forcing_value(*spec, t);
    return u;
  }

  Vector noise(const Vector& draw, double dt, const Vector* g_scale = nullptr) const {
    const Vector& e = model_.emf();
    Vector out(r_);
    const double root_dt = std::sqrt(dt);
    for (int i = 0; i < r_; ++i) {
      double g = conductance_(i);
      if (g_scale) g *= (*g_scale)(i);
      out(i) = -((e(i) * e(i) * g) * model_.sigma_load()(i) * draw(i)) * root_dt /
               model_.inertia()(i);
    }
    return out;
  }

  SimState advance(const SimState& s, double dt, const Vector& draw,
                   const Vector* g_scale = nullptr) const {
    const Vector& m = model_.inertia();
    const Vector accel = (model_.mech_power() - power(s.delta, g_scale) -
                          model_.damping().cwiseProduct(s.omega) + forcing(s.t))
                             .cwiseQuotient(m);
    SimState next;
    next.t = s.t + dt;
    next.delta = s.delta + s.omega * dt;
    next.omega = s.omega + accel * dt + noise(draw, dt, g_scale);
    check(next);
    return next;
  }

 private:
  static void check(const SimState& s) {
    const bool finite = s.delta.allFinite() && s.omega.allFinite();
    if (!finite || s.delta.cwiseAbs().maxCoeff() > kDivergenceLimit ||
        s.omega.cwiseAbs().maxCoeff() > kDivergenceLimit) {
      std::ostringstream msg;
      msg << "integration diverged at t = " << s.t << " s";
      throw Error(ErrorCode::Diverged, msg.str());
    }
  }

  const GridModel& model_;
  int r_;
  Vector conductance_;
  Matrix coupling_;
  std::vector<std::pair<int, const ForcingSpec*>> targets_;
};

double balance_residual(const GridModel& model, const Vector& delta) {
  return (model.mech_power() - electrical_power(delta, model)).cwiseAbs().maxCoeff();
}

}  // namespace

GridModel::GridModel(GridModelParams p) {
  const auto r = p.labels.size();
  require(r >= 1, ErrorCode::InvalidArgument, "grid model needs at least one machine");
  require(p.inertia.size() == r && p.damping.size() == r && p.emf.size() == r &&
              p.mech_power.size() == r && p.sigma_load.size() == r,
          ErrorCode::ShapeMismatch, "per-machine parameter vectors differ in length");
  const auto rr = static_cast<Eigen::Index>(r);
  require(p.admittance_magnitude.rows() == rr && p.admittance_magnitude.cols() == rr &&
              p.admittance_angle.rows() == rr && p.admittance_angle.cols() == rr,
          ErrorCode::ShapeMismatch, "admittance matrices must be r x r");
  for (std::size_t i = 0; i < r; ++i) {
    require(p.inertia[i] > 0.0, ErrorCode::InvalidArgument,
            "inertia of machine '" + p.labels[i] + "' must be positive");
    require(p.damping[i] >= 0.0, ErrorCode::InvalidArgument,
            "damping of machine '" + p.labels[i] + "' must be non-negative");
    require(p.emf[i] > 0.0, ErrorCode::InvalidArgument,
            "emf of machine '" + p.labels[i] + "' must be positive");
    require(p.sigma_load[i] >= 0.0, ErrorCode::InvalidArgument,
            "sigma_load must be non-negative");
    require(std::isfinite(p.mech_power[i]), ErrorCode::InvalidArgument,
            "mechanical power must be finite");
  }
  require(p.admittance_magnitude.allFinite() && p.admittance_angle.allFinite(),
          ErrorCode::InvalidArgument, "admittance entries must be finite");
  for (Eigen::Index i = 0; i < rr; ++i) {
    for (Eigen::Index j = 0; j < rr; ++j) {
      require(std::abs(p.admittance_magnitude(i, j) - p.admittance_magnitude(j, i)) <= 1e-9,
              ErrorCode::InvalidArgument, "admittance magnitude must be symmetric");
    }
  }
  require(p.drift.std_dev >= 0.0 && p.drift.time_constant_s > 0.0,
          ErrorCode::InvalidArgument, "invalid conductance drift settings");
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      require(p.labels[i] != p.labels[j], ErrorCode::InvalidArgument,
              "duplicate machine label '" + p.labels[i] + "'");
    }
  }

  labels_ = std::move(p.labels);
  inertia_ = to_vector(p.inertia);
  damping_ = to_vector(p.damping);
  emf_ = to_vector(p.emf);
  mech_power_ = to_vector(p.mech_power);
  sigma_load_ = to_vector(p.sigma_load);
  y_mag_ = std::move(p.admittance_magnitude);
  y_angle_ = std::move(p.admittance_angle);
  drift_ = p.drift;
}

Vector GridModel::self_conductance() const {
  return (y_mag_.diagonal().array() * y_angle_.diagonal().array().cos()).matrix();
}

int GridModel::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown machine label '" + label + "'");
  }
  return static_cast<int>(it - labels_.begin());
}

GridModel GridModel::with_mech_power(const Vector& pm) const {
  require(pm.size() == machines(), ErrorCode::ShapeMismatch, "Pm length differs from r");
  GridModel copy = *this;
  copy.mech_power_ = pm;
  return copy;
}

GridModel GridModel::balanced_at(const Vector& angles) const {
  require(angles.size() == machines(), ErrorCode::ShapeMismatch,
          "angle vector length differs from r");
  return with_mech_power(electrical_power(angles, *this));
}

GridModel GridModel::with_sigma_load(const Vector& sigma) const {
  require(sigma.size() == machines(), ErrorCode::ShapeMismatch, "sigma length differs from r");
  require((sigma.array() >= 0.0).all(), ErrorCode::InvalidArgument,
          "sigma_load must be non-negative");
  GridModel copy = *this;
  copy.sigma_load_ = sigma;
  return copy;
}

GridModel GridModel::with_damping(const Vector& damping) const {
  require(damping.size() == machines(), ErrorCode::ShapeMismatch,
          "damping length differs from r");
  require((damping.array() >= 0.0).all(), ErrorCode::InvalidArgument,
          "damping must be non-negative");
  GridModel copy = *this;
  copy.damping_ = damping;
  return copy;
}

void validate_forcing(const ForcingSpec& spec, double nyquist_hz) {
  auto check_pair = [&](double f, double a, const char* what) {
    if (!(f > 0.0 && f < nyquist_hz)) {
      std::ostringstream msg;
      msg << what << " frequency " << f << " Hz outside (0, " << nyquist_hz << ")";
      throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " amplitude must be positive");
    }
  };
  check_pair(spec.frequency_hz, spec.amplitude, "forcing");
  if (spec.change) check_pair(spec.change->frequency_hz, spec.change->amplitude, "switched");
  if (!(spec.start_s <= spec.end_s)) {
    throw Error(ErrorCode::InvalidArgument, "forcing active interval is empty");
  }
}

double forcing_value(const ForcingSpec& spec, double t) {
  if (t < spec.start_s || t > spec.end_s) return 0.0;
  double amplitude = spec.amplitude;
  double angle = kTwoPi * spec.frequency_hz * t + spec.phase_rad;
  if (spec.change && t >= spec.change->time_s) {
    const double ts = spec.change->time_s;
    amplitude = spec.change->amplitude;
    angle = kTwoPi * spec.frequency_hz * ts + spec.phase_rad +
            kTwoPi * spec.change->frequency_hz * (t - ts);
  }
  const double s = std::sin(angle);
  switch (spec.waveform) {
    case Waveform::Sine: return amplitude * s;
    case Waveform::Rectangular: return s > 0.0 ? amplitude : (s < 0.0 ? -amplitude : 0.0);
  }
  return 0.0;
}

Vector electrical_power(const Vector& delta, const GridModel& model) {
  require(delta.size() == model.machines(), ErrorCode::ShapeMismatch,
          "angle vector length differs from r");
  return Dynamics(model, {}).power(delta);
}

Matrix electrical_power_jacobian(const Vector& delta, const GridModel& model) {
  const int r = model.machines();
  require(delta.size() == r, ErrorCode::ShapeMismatch, "angle vector length differs from r");
  const Vector& e = model.emf();
  Matrix jac = Matrix::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      if (i == j) continue;
      const double k = e(i) * e(j) * model.admittance_magnitude()(i, j) *
                       std::sin(model.admittance_angle()(i, j) - delta(i) + delta(j));
      jac(i, i) += k;
      jac(i, j) -= k;
    }
  }
  return jac;
}

Matrix state_matrix(const GridModel& model, const Vector& delta) {
  const int r = model.machines();
  const Vector inv_m = model.inertia().cwiseInverse();
  Matrix a = Matrix::Zero(2 * r, 2 * r);
  a.topRightCorner(r, r).setIdentity();
  a.bottomLeftCorner(r, r) = -(inv_m.asDiagonal() * electrical_power_jacobian(delta, model));
  a.bottomRightCorner(r, r) = Vector(-inv_m.cwiseProduct(model.damping())).asDiagonal();
  return a;
}

Vector noise_increment(const GridModel& model, const Vector& noise_draw, double dt) {
  require(noise_draw.size() == model.machines(), ErrorCode::ShapeMismatch,
          "noise draw length differs from r");
  return Dynamics(model, {}).noise(noise_draw, dt);
}

SimState step(const SimState& state, double dt, const GridModel& model,
              const std::vector<ForcingSpec>& forcings, const Vector& noise_draw) {
  require(dt > 0.0 && dt <= kMaxStep, ErrorCode::InvalidArgument,
          "step size must lie in (0, 1e-2] s");
  const int r = model.machines();
  require(state.delta.size() == r && state.omega.size() == r && noise_draw.size() == r,
          ErrorCode::ShapeMismatch, "state or noise length differs from r");
  return Dynamics(model, forcings).advance(state, dt, noise_draw);
}

Vector solve_equilibrium(const GridModel& model) {
  const int r = model.machines();
  Vector delta = Vector::Zero(r);
  if (r == 1) {
    if (balance_residual(model, delta) < 1e-10) return delta;
    throw Error(ErrorCode::NoEquilibrium, "single machine is not in power balance");
  }
  const int n = r - 1;
  auto mismatch = [&](const Vector& d) -> Vector {
    return (model.mech_power() - electrical_power(d, model)).tail(n);
  };

  Vector f = mismatch(delta);
  for (int iter = 0; iter < 50; ++iter) {
    if (f.cwiseAbs().maxCoeff() < 1e-14) break;
    // d(mismatch)/d(delta_2..r) = -dPe/ddelta restricted to the free block.
    const Matrix jac = -electrical_power_jacobian(delta, model).bottomRightCorner(n, n);
    Eigen::ColPivHouseholderQR<Matrix> qr(jac);
    if (qr.rank() < n) break;
    const Vector newton = qr.solve(-f);
    // Backtracking on the residual norm keeps infeasible cases from wandering.
    double step_len = 1.0;
    Vector trial = delta;
    Vector f_trial;
    bool improved = false;
    for (int k = 0; k < 30; ++k) {
      trial.tail(n) = delta.tail(n) + step_len * newton;
      f_trial = mismatch(trial);
      if (f_trial.allFinite() && f_trial.norm() < f.norm()) {
        improved = true;
        break;
      }
      step_len *= 0.5;
    }
    if (!improved) break;
    delta = trial;
    f = f_trial;
  }

  const double residual = balance_residual(model, delta);
  if (!(residual < 1e-10)) {
    std::ostringstream msg;
    msg << "no operating point found: power balance residual " << residual << " pu";
    throw Error(ErrorCode::NoEquilibrium, msg.str());
  }
  return delta;
}

std::vector<NaturalMode> natural_modes(const GridModel& model, const Vector& equilibrium) {
  require(equilibrium.size() == model.machines(), ErrorCode::ShapeMismatch,
          "angle vector length differs from r");
  const double residual = balance_residual(model, equilibrium);
  if (!(residual <= 1e-8)) {
    std::ostringstream msg;
    msg << "angles are not an operating point (residual " << residual << " pu)";
    throw Error(ErrorCode::NotAnEquilibrium, msg.str());
  }
  const Matrix a = state_matrix(model, equilibrium);
  Eigen::EigenSolver<Matrix> solver(a, false);
  const auto& ev = solver.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<NaturalMode> modes;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const double re = ev(k).real();
    const double im = ev(k).imag();
    // An undamped system's rigid-rotation pair is a defective zero eigenvalue,
    // which rounding splits by about sqrt(eps).
    if (im > 1e-6 * scale) {
      modes.push_back({im / kTwoPi, -re / std::hypot(re, im)});
    }
  }
  std::sort(modes.begin(), modes.end(),
            [](const NaturalMode& x, const NaturalMode& y) { return x.frequency_hz < y.frequency_hz; });
  return modes;
}

double default_internal_dt(double output_rate_hz) {
  require(output_rate_hz > 0.0, ErrorCode::InvalidArgument, "output rate must be positive");
  const double per_sample = std::ceil(1000.0 / output_rate_hz - 1e-9);
  return 1.0 / (output_rate_hz * per_sample);
}

MeasurementWindow simulate(const GridModel& model, const std::vector<ForcingSpec>& forcings,
                           const SimulationOptions& options) {
  const double rate = options.output_rate_hz;
  require(rate > 0.0 && std::isfinite(rate), ErrorCode::InvalidArgument,
          "output rate must be positive");
  require(options.duration_s > 0.0 && options.warmup_s >= 0.0, ErrorCode::InvalidArgument,
          "duration must be positive and warm-up non-negative");
  const double dt =
      options.internal_dt_s > 0.0 ? options.internal_dt_s : default_internal_dt(rate);
  require(dt <= kMaxStep, ErrorCode::InvalidArgument, "internal step must not exceed 1e-2 s");
  const long long per_sample = std::llround(1.0 / (dt * rate));
  require(per_sample >= 1 && std::abs(static_cast<double>(per_sample) * dt * rate - 1.0) < 1e-9,
          ErrorCode::InvalidArgument, "output period is not a whole number of internal steps");
  const long long m = std::llround(options.duration_s * rate);
  require(m >= 4, ErrorCode::TooShort, "simulation yields fewer than 4 output samples");
  for (const auto& f : forcings) {
    validate_forcing(f, rate / 2.0);
    (void)model.index_of(f.target);
  }

  Vector delta0;
  if (options.initial_angles) {
    delta0 = *options.initial_angles;
    require(delta0.size() == model.machines(), ErrorCode::ShapeMismatch,
            "initial angle vector length differs from r");
    const double residual = balance_residual(model, delta0);
    if (!(residual <= 1e-8)) {
      std::ostringstream msg;
      msg << "initial angles leave a power balance residual of " << residual << " pu";
      throw Error(ErrorCode::NoEquilibrium, msg.str());
    }
  } else {
    delta0 = solve_equilibrium(model);
  }

  const int r = model.machines();
  const Dynamics dynamics(model, forcings);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const long long warm_steps = std::llround(options.warmup_s * rate) * per_sample;
  const long long total_steps = warm_steps + (m - 1) * per_sample;

  const bool drifting = model.drift().std_dev > 0.0;
  Vector g_scale = Vector::Ones(r);
  Vector drift_state = Vector::Zero(r);
  const double tau = model.drift().time_constant_s;
  const double drift_kick = model.drift().std_dev * std::sqrt(2.0 / tau);

  Matrix angles(m, r), speeds(m, r);
  SimState s{-static_cast<double>(warm_steps) * dt, delta0, Vector::Zero(r)};
  Vector draw(r);
  for (long long k = 0;; ++k) {
    const long long since = k - warm_steps;
    if (since >= 0 && since % per_sample == 0) {
      const auto row = static_cast<Eigen::Index>(since / per_sample);
      angles.row(row) = s.delta.transpose();
      speeds.row(row) = s.omega.transpose();
    }
    if (k == total_steps) break;
    for (int i = 0; i < r; ++i) draw(i) = normal(rng);
    s = dynamics.advance(s, dt, draw, drifting ? &g_scale : nullptr);
    s.t = static_cast<double>(k + 1 - warm_steps) * dt;
    if (drifting) {
      for (int i = 0; i < r; ++i) {
        drift_state(i) += -drift_state(i) / tau * dt + drift_kick * std::sqrt(dt) * normal(rng);
        g_scale(i) = 1.0 + drift_state(i);
      }
    }
  }

  angles.rowwise() -= angles.colwise().mean();
  speeds.rowwise() -= speeds.colwise().mean();

  RawSamples raw;
  raw.timestamps.resize(static_cast<std::size_t>(m));
  for (long long k = 0; k < m; ++k) raw.timestamps[static_cast<std::size_t>(k)] = static_cast<double>(k) / rate;
  raw.labels = model.labels();
  raw.angles = std::move(angles);
  raw.speeds = std::move(speeds);
  return validate_window(std::move(raw), rate);
}

}  // namespace fosl
