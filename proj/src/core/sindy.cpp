#include "fosl/sindy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace fosl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Support = std::vector<bool>;

class LeastSquares {
 public:
  explicit LeastSquares(const Matrix& theta) : theta_(theta) {}

  // Solves column `target` of xdot over the features selected by support.
  Vector solve(const Support& support, const Vector& rhs) {
    std::vector<Eigen::Index> cols;
    for (std::size_t k = 0; k < support.size(); ++k) {
      if (support[k]) cols.push_back(static_cast<Eigen::Index>(k));
    }
    Vector full = Vector::Zero(theta_.cols());
    if (cols.empty()) return full;
    auto it = cache_.find(support);
    if (it == cache_.end()) it = cache_.emplace(support, factor(cols)).first;
    const Vector coef = it->second.solve(rhs);
    for (std::size_t k = 0; k < cols.size(); ++k) full(cols[k]) = coef(static_cast<Eigen::Index>(k));
    return full;
  }

 private:
  Eigen::ColPivHouseholderQR<Matrix> factor(const std::vector<Eigen::Index>& cols) const {
    const auto p = static_cast<Eigen::Index>(cols.size());
    if (theta_.rows() < p) {
      throw Error(ErrorCode::RankDeficient,
                  "fewer samples (" + std::to_string(theta_.rows()) + ") than features (" +
                      std::to_string(p) + ")");
    }
    Matrix sub(theta_.rows(), p);
    for (Eigen::Index k = 0; k < p; ++k) sub.col(k) = theta_.col(cols[static_cast<std::size_t>(k)]);
    Eigen::ColPivHouseholderQR<Matrix> qr(sub);
    if (qr.rank() < p) {
      const auto diag = qr.matrixR().diagonal().cwiseAbs();
      const double smallest = diag(p - 1);
      const double cond = smallest > 0.0 ? diag(0) / smallest
                                         : std::numeric_limits<double>::infinity();
      const Eigen::Index worst = qr.colsPermutation().indices()(p - 1);
      std::ostringstream msg;
      msg << "feature submatrix has rank " << qr.rank() << " < " << p << "; column "
          << cols[static_cast<std::size_t>(worst)] << " is dependent (condition estimate "
          << cond << ")";
      throw Error(ErrorCode::RankDeficient, msg.str());
    }
    return qr;
  }

  const Matrix& theta_;
  std::map<Support, Eigen::ColPivHouseholderQR<Matrix>> cache_;
};

Support column_support(const BoolMatrix& s, Eigen::Index col) {
  Support out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index k = 0; k < s.rows(); ++k) out[static_cast<std::size_t>(k)] = s(k, col);
  return out;
}

Matrix refit(LeastSquares& ls, const Matrix& xdot, const BoolMatrix& support) {
  Matrix xi(support.rows(), support.cols());
  for (Eigen::Index j = 0; j < support.cols(); ++j) {
    xi.col(j) = ls.solve(column_support(support, j), xdot.col(j));
  }
  return xi;
}

void check_shapes(const Matrix& theta, const Matrix& xdot, const BoolMatrix& mask) {
  if (theta.rows() != xdot.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "library and derivative row counts differ");
  }
  if (mask.rows() != theta.cols() || mask.cols() != xdot.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "mask shape differs from the coefficient matrix");
  }
}

}  // namespace

FeatureLibrary build_library(const MeasurementWindow& window,
                             const FrequencyCandidateSet& candidates) {
  return build_library(window, candidates.frequencies());
}

FeatureLibrary build_library(const MeasurementWindow& window,
                             const std::vector<double>& frequencies) {
  const Eigen::Index m = window.samples();
  const auto r = static_cast<int>(window.machines());
  const auto n = static_cast<Eigen::Index>(frequencies.size());
  FeatureLibrary lib;
  lib.machines = r;
  lib.frequencies = frequencies;
  lib.matrix.resize(m, 1 + 2 * r + 2 * n);
  lib.matrix.col(0).setOnes();
  lib.matrix.middleCols(1, r) = window.angles();
  lib.matrix.middleCols(1 + r, r) = window.speeds();
  lib.descriptors.push_back({FeatureKind::Bias});
  for (int j = 0; j < r; ++j) lib.descriptors.push_back({FeatureKind::AngleState, j});
  for (int j = 0; j < r; ++j) lib.descriptors.push_back({FeatureKind::SpeedState, j});
  const Vector& t = window.timestamps();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = frequencies[static_cast<std::size_t>(i)];
    const Vector phase = kTwoPi * f * t;
    lib.matrix.col(1 + 2 * r + 2 * i) = phase.array().sin().matrix();
    lib.matrix.col(2 + 2 * r + 2 * i) = phase.array().cos().matrix();
    lib.descriptors.push_back({FeatureKind::SinWave, -1, f});
    lib.descriptors.push_back({FeatureKind::CosWave, -1, f});
  }
  return lib;
}

StructuralMask StructuralMask::swing(int machines, int candidates) {
  const int rows = 1 + 2 * machines + 2 * candidates;
  StructuralMask mask{BoolMatrix::Constant(rows, 2 * machines, true)};
  for (int j = 0; j < machines; ++j) {
    mask.allowed.col(j).setConstant(false);
    mask.allowed(1 + machines + j, j) = true;
  }
  return mask;
}

StructuralMask StructuralMask::unrestricted(Eigen::Index features, Eigen::Index targets) {
  return {BoolMatrix::Constant(features, targets, true)};
}

Matrix masked_least_squares(const Matrix& theta, const Matrix& xdot, const BoolMatrix& mask) {
  check_shapes(theta, xdot, mask);
  LeastSquares ls(theta);
  return refit(ls, xdot, mask);
}

SparseFit stlsq(const Matrix& theta, const Matrix& xdot, double lambda, const BoolMatrix& mask) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  check_shapes(theta, xdot, mask);
  LeastSquares ls(theta);
  Matrix xi = refit(ls, xdot, mask);

  SparseFit fit;
  fit.diagnostics.lambda = lambda;
  const auto card = static_cast<int>((xi.array() != 0.0).count());
  fit.diagnostics.initial_support = card;

  if (card > 0) {
    BoolMatrix previous = BoolMatrix::Constant(mask.rows(), mask.cols(), false);
    int passes = 0;
    while (true) {
      const BoolMatrix support = ((xi.array().abs() >= lambda) && mask.array()).matrix();
      xi = refit(ls, xdot, support);
      ++passes;
      fit.diagnostics.support_history.push_back(static_cast<int>(support.count()));
      if (support == previous || passes >= card) break;
      previous = support;
    }
    fit.diagnostics.iterations = passes;
  } else {
    xi.setZero();
  }

  const double residual = (theta * xi - xdot).norm();
  const auto nonzero = static_cast<double>((xi.array() != 0.0).count());
  fit.diagnostics.residual_fro = residual;
  fit.diagnostics.objective = residual * residual + lambda * lambda * nonzero;
  fit.diagnostics.sub_lambda_survivors =
      static_cast<int>(((xi.array() != 0.0) && (xi.array().abs() < lambda)).count());
  fit.xi = std::move(xi);
  return fit;
}

CoefficientMatrix initial_fit(const FeatureLibrary& library, const DerivativeMatrix& derivatives,
                              const StructuralMask& mask) {
  return CoefficientMatrix(masked_least_squares(library.matrix, derivatives.values, mask.allowed),
                           library.machines, library.frequencies);
}

StlsqResult stlsq(const FeatureLibrary& library, const DerivativeMatrix& derivatives,
                  double lambda, const StructuralMask& mask) {
  SparseFit fit = stlsq(library.matrix, derivatives.values, lambda, mask.allowed);
  return {CoefficientMatrix(std::move(fit.xi), library.machines, library.frequencies),
          std::move(fit.diagnostics)};
}

ZetaIndex extract_forcing_block(const CoefficientMatrix& xi, std::vector<std::string> labels) {
  return ZetaIndex::from_coefficients(xi, std::move(labels));
}

double sparsity_lambda(const CoefficientMatrix& xi0, double target, double fallback) {
  if (!(target >= 0.0 && target < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "sparsity target must lie in [0, 1)");
  }
  std::vector<double> pairs;
  for (int i = 0; i < xi0.candidates(); ++i) {
    for (int j = 0; j < xi0.machines(); ++j) {
      pairs.push_back(std::max(std::abs(xi0.sin_coefficient(i, j)),
                               std::abs(xi0.cos_coefficient(i, j))));
    }
  }
  if (pairs.empty()) return fallback;
  std::sort(pairs.begin(), pairs.end());
  const auto k = std::min(pairs.size() - 1,
                          static_cast<std::size_t>(std::floor(target * static_cast<double>(pairs.size()))));
  const double lambda = pairs[k] * (1.0 + 1e-9);
  return lambda > 0.0 ? lambda : fallback;
}

}  // namespace fosl
