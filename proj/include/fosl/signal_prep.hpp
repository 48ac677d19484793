// Regression inputs: deviations X and their time derivatives Xdot.
#pragma once

#include "fosl/types.hpp"

namespace fosl {

struct DetrendResult {
  MeasurementWindow window;
  Vector angle_means;
  Vector speed_means;
};

// Subtracts each channel's sample mean.
DetrendResult detrend(const MeasurementWindow& window);

struct RegressionInputs {
  MeasurementWindow states;  // final row dropped, m - 1 rows
  DerivativeMatrix derivatives;
};

// Centered moving average with edge windows shrunk to fit. Width 1 is identity.
Matrix moving_average(const Matrix& channels, int width);

// Two-point forward difference of every angle and speed channel:
// Xdot[k] = (X[k+1] - X[k]) * sample_rate. A prefilter width above 1 smooths
// the channels first (the returned states are the smoothed ones).
RegressionInputs estimate_derivatives(const MeasurementWindow& window, int prefilter_width = 1);

// Measured ROCOF (rad/s^2, m x r) as the speed derivative; the angle
// derivative is the measured speed. Rows are cut to m - 1 to match the
// finite-difference path. Throws ShapeMismatch.
DerivativeMatrix ingest_rocof(const MeasurementWindow& window, const Matrix& rocof);

}  // namespace fosl
