#include "fosl/signal_prep.hpp"

#include <algorithm>

namespace fosl {

DetrendResult detrend(const MeasurementWindow& window) {
  Vector angle_means = window.angles().colwise().mean().transpose();
  Vector speed_means = window.speeds().colwise().mean().transpose();
  Matrix angles = window.angles().rowwise() - angle_means.transpose();
  Matrix speeds = window.speeds().rowwise() - speed_means.transpose();
  return {replace_channels(window, std::move(angles), std::move(speeds)),
          std::move(angle_means), std::move(speed_means)};
}

Matrix moving_average(const Matrix& channels, int width) {
  if (width < 1) throw Error(ErrorCode::InvalidArgument, "prefilter width must be >= 1");
  if (width == 1) return channels;
  const Eigen::Index m = channels.rows();
  const Eigen::Index half_lo = (width - 1) / 2;
  const Eigen::Index half_hi = width / 2;
  Matrix out(m, channels.cols());
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, k - half_lo);
    const Eigen::Index hi = std::min<Eigen::Index>(m - 1, k + half_hi);
    out.row(k) = channels.middleRows(lo, hi - lo + 1).colwise().mean();
  }
  return out;
}

RegressionInputs estimate_derivatives(const MeasurementWindow& window, int prefilter_width) {
  const MeasurementWindow source =
      prefilter_width == 1
          ? window
          : replace_channels(window, moving_average(window.angles(), prefilter_width),
                             moving_average(window.speeds(), prefilter_width));
  const Eigen::Index m = source.samples();
  const Matrix x = source.states();
  DerivativeMatrix d{(x.bottomRows(m - 1) - x.topRows(m - 1)) * source.sample_rate()};
  return {source.rows(0, m - 1), std::move(d)};
}

DerivativeMatrix ingest_rocof(const MeasurementWindow& window, const Matrix& rocof) {
  const Eigen::Index m = window.samples();
  const Eigen::Index r = window.machines();
  if (rocof.rows() != m || rocof.cols() != r) {
    throw Error(ErrorCode::ShapeMismatch, "ROCOF block must be " + std::to_string(m) + " x " +
                                              std::to_string(r));
  }
  DerivativeMatrix d{Matrix(m - 1, 2 * r)};
  d.values << window.speeds().topRows(m - 1), rocof.topRows(m - 1);
  return d;
}

}  // namespace fosl
