// Shared domain types for forced-oscillation source location.
//
// Every type here is immutable once constructed; the factory functions
// validate their invariants and throw fosl::Error on violation.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fosl {

enum class ErrorCode {
  InvalidArgument = 1,
  NonUniformSampling,
  ShapeMismatch,
  TooShort,
  ParseError,
  UnitError,
  IoError,
  NoCandidates,
  RankDeficient,
  Unlocatable,
  Diverged,
  NoEquilibrium,
  NotAnEquilibrium,
  SpectrumTooShort,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Maximum relative deviation of any sampling interval from 1/sample_rate.
inline constexpr double kSamplingJitterTolerance = 1e-6;

// Unvalidated column data as read from a file or produced by a simulator.
// Rows are samples, columns are machines.
struct RawSamples {
  std::vector<double> timestamps;
  std::vector<std::string> labels;
  Matrix angles;  // rad
  Matrix speeds;  // rad/s
};

// Synchronized angle/speed deviations of r machines over m samples.
class MeasurementWindow {
 public:
  double sample_rate() const noexcept { return sample_rate_; }
  const Vector& timestamps() const noexcept { return timestamps_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Matrix& angles() const noexcept { return angles_; }
  const Matrix& speeds() const noexcept { return speeds_; }
  Eigen::Index samples() const noexcept { return angles_.rows(); }
  Eigen::Index machines() const noexcept { return angles_.cols(); }
  // True when every channel already had (numerically) zero mean on input.
  bool mean_centered() const noexcept { return mean_centered_; }

  // [angles | speeds], m x 2r, the state ordering used by the library.
  Matrix states() const;

  // Copy holding only rows [first, first + count).
  MeasurementWindow rows(Eigen::Index first, Eigen::Index count) const;
  // Copy with the machine columns reordered; order[k] is the source column.
  MeasurementWindow permuted(const std::vector<Eigen::Index>& order) const;
  // Copy with every angle and speed sample multiplied by factor.
  MeasurementWindow scaled(double factor) const;

 private:
  friend MeasurementWindow validate_window(RawSamples raw, double sample_rate);
  friend MeasurementWindow replace_channels(const MeasurementWindow& base,
                                            Matrix angles, Matrix speeds);
  MeasurementWindow() = default;

  double sample_rate_ = 0.0;
  Vector timestamps_;
  std::vector<std::string> labels_;
  Matrix angles_;
  Matrix speeds_;
  bool mean_centered_ = false;
};

// Throws NonUniformSampling, ShapeMismatch, TooShort or InvalidArgument.
MeasurementWindow validate_window(RawSamples raw, double sample_rate);

// Same timestamps and labels as base, new channel data of identical shape.
MeasurementWindow replace_channels(const MeasurementWindow& base, Matrix angles,
                                   Matrix speeds);

// Estimated [d(angle)/dt, d(speed)/dt]; (m-1) x 2r.
struct DerivativeMatrix {
  Matrix values;
};

// Candidate forcing frequencies, ascending, pairwise spacing > bin_width/2.
class FrequencyCandidateSet {
 public:
  FrequencyCandidateSet() = default;
  FrequencyCandidateSet(std::vector<double> frequencies, double bin_width,
                        double sample_rate);

  const std::vector<double>& frequencies() const noexcept { return frequencies_; }
  double bin_width() const noexcept { return bin_width_; }
  std::size_t size() const noexcept { return frequencies_.size(); }
  bool empty() const noexcept { return frequencies_.empty(); }

 private:
  std::vector<double> frequencies_;
  double bin_width_ = 0.0;
};

enum class FeatureKind { Bias, AngleState, SpeedState, SinWave, CosWave };

struct FeatureTag {
  FeatureKind kind;
  int machine = -1;        // AngleState / SpeedState
  double frequency = 0.0;  // SinWave / CosWave, Hz

  bool operator==(const FeatureTag&) const = default;
};

std::string describe(const FeatureTag& tag);

// Theta(X): one bias column, r angle columns, r speed columns, then a
// (sin, cos) pair per candidate frequency.
struct FeatureLibrary {
  Matrix matrix;
  std::vector<FeatureTag> descriptors;
  int machines = 0;
  std::vector<double> frequencies;
};

// Xi, stored feature-major: (1 + 2r + 2n) x 2r so that Xdot ~= Theta * Xi.
// Column j < r is the angle equation of machine j, column r + j its speed
// equation.
class CoefficientMatrix {
 public:
  CoefficientMatrix(Matrix values, int machines, std::vector<double> frequencies);

  const Matrix& values() const noexcept { return values_; }
  int machines() const noexcept { return machines_; }
  int candidates() const noexcept { return static_cast<int>(frequencies_.size()); }
  const std::vector<double>& frequencies() const noexcept { return frequencies_; }

  // Xi_eta: 1 x 2r.
  Matrix bias_block() const;
  // Xi_Jacobian rows: 2r x 2r, rows are features, columns are targets.
  Matrix jacobian_block() const;
  // Xi_ab rows: 2n x 2r.
  Matrix forcing_block() const;

  // a_ij and b_ij: forcing coefficient of candidate i on machine j's speed equation.
  double sin_coefficient(int candidate, int machine) const;
  double cos_coefficient(int candidate, int machine) const;

  // Equation-major view, 2r x (1 + 2r + 2n).
  Matrix equation_major() const { return values_.transpose(); }

  static int sin_row(int machines, int candidate) { return 1 + 2 * machines + 2 * candidate; }

 private:
  Matrix values_;
  int machines_;
  std::vector<double> frequencies_;
};

// zeta_ij = a_ij^2 + b_ij^2, n x r.
class ZetaIndex {
 public:
  ZetaIndex(Matrix values, std::vector<double> frequencies,
            std::vector<std::string> labels);

  static ZetaIndex from_coefficients(const CoefficientMatrix& xi,
                                     std::vector<std::string> labels);

  const Matrix& values() const noexcept { return values_; }
  const std::vector<double>& frequencies() const noexcept { return frequencies_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }

 private:
  Matrix values_;
  std::vector<double> frequencies_;
  std::vector<std::string> labels_;
};

struct Detection {
  std::string machine;
  double frequency_hz = 0.0;
  double zeta = 0.0;
  int rank = 0;

  bool operator==(const Detection&) const = default;
};

enum class Verdict { Located, NoSourceLocated, NoCandidates, Unlocatable };

const char* to_string(Verdict verdict) noexcept;
std::optional<Verdict> verdict_from_string(const std::string& text);

struct RegressionDiagnostics {
  int iterations = 0;
  std::vector<int> support_history;
  double residual_fro = 0.0;
  double objective = 0.0;
  double lambda = 0.0;
  int initial_support = 0;
  // Final-refit entries that ended below lambda (kept, not zeroed).
  int sub_lambda_survivors = 0;

  bool operator==(const RegressionDiagnostics&) const = default;
};

struct LocationReport {
  Verdict verdict = Verdict::NoSourceLocated;
  std::vector<Detection> detections;
  std::vector<double> candidates_hz;
  double bin_width_hz = 0.0;
  double elapsed_s = 0.0;
  RegressionDiagnostics diagnostics;
  // Full zeta matrix (n x r) when the regression ran.
  Matrix zeta;
  std::vector<std::string> labels;
};

}  // namespace fosl
