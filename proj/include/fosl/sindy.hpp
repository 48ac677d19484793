// Feature library and sequential thresholded least squares (STLSQ).
#pragma once

#include "fosl/types.hpp"

#include <string>
#include <vector>

namespace fosl {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Columns [1, angles, speeds, sin(2 pi f_1 t), cos(2 pi f_1 t), ...] at the
// window timestamps.
FeatureLibrary build_library(const MeasurementWindow& window,
                             const FrequencyCandidateSet& candidates);
FeatureLibrary build_library(const MeasurementWindow& window,
                             const std::vector<double>& frequencies);

// true = coefficient may be nonzero. Same shape as the coefficient matrix.
struct StructuralMask {
  BoolMatrix allowed;

  // Angle equations keep only their own speed term; speed equations keep
  // every feature.
  static StructuralMask swing(int machines, int candidates);
  static StructuralMask unrestricted(Eigen::Index features, Eigen::Index targets);
};

struct SparseFit {
  Matrix xi;
  RegressionDiagnostics diagnostics;
};

// Per-column least squares restricted to the mask. Throws RankDeficient.
Matrix masked_least_squares(const Matrix& theta, const Matrix& xdot, const BoolMatrix& mask);

// Threshold at |xi| >= lambda, refit on the surviving support, repeat until
// the support repeats or card(Xi^0) passes have run. Throws RankDeficient
// and InvalidArgument (lambda <= 0, shape mismatch).
SparseFit stlsq(const Matrix& theta, const Matrix& xdot, double lambda, const BoolMatrix& mask);

CoefficientMatrix initial_fit(const FeatureLibrary& library, const DerivativeMatrix& derivatives,
                              const StructuralMask& mask);

struct StlsqResult {
  CoefficientMatrix xi;
  RegressionDiagnostics diagnostics;
};

StlsqResult stlsq(const FeatureLibrary& library, const DerivativeMatrix& derivatives,
                  double lambda, const StructuralMask& mask);

// zeta from the speed-equation sin/cos rows.
ZetaIndex extract_forcing_block(const CoefficientMatrix& xi, std::vector<std::string> labels);

// Threshold that zeroes more than `target` of the (a, b) forcing pairs of
// an initial fit: just above the floor(target * pairs)-th smallest
// max(|a|, |b|). Returns fallback when there are no pairs.
double sparsity_lambda(const CoefficientMatrix& xi0, double target, double fallback);

}  // namespace fosl
