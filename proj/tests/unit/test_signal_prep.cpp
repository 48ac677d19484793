#include "expect.hpp"
#include "fosl/signal_prep.hpp"
#include "fosl/simulator.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fosl;
using std::numbers::pi;

namespace {

Matrix column_of(int m, double rate, double (*f)(double)) {
  Matrix out(m, 1);
  for (int k = 0; k < m; ++k) out(k, 0) = f(k / rate);
  return out;
}

Matrix pair(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), 2);
  out << a, b;
  return out;
}

}  // namespace

TEST_CASE("detrend") {
  const int m = 90;
  Matrix c = Matrix::Constant(m, 2, 3.5);
  Matrix t(m, 2);
  for (int k = 0; k < m; ++k) {
    t(k, 0) = 0.7 * (k / 30.0) + 2.0;
    t(k, 1) = std::sin(2 * pi * k / 30.0);
  }
  const auto out = detrend(fixture::window(c, t));
  CHECK(out.window.angles().cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.angle_means[0] == 3.5);

  double mean = 0.0;
  for (int k = 0; k < m; ++k) mean += t(k, 0);
  mean /= m;
  for (int k = 0; k < m; ++k) {
    CHECK(out.window.speeds()(k, 0) == doctest::Approx(t(k, 0) - mean).epsilon(1e-12));
  }
  CHECK(out.speed_means[0] == doctest::Approx(mean));
  CHECK(out.window.mean_centered());

  // Already zero-mean (whole periods of a sine) is left alone.
  for (int k = 0; k < m; ++k) {
    CHECK(std::abs(out.window.speeds()(k, 1) - t(k, 1)) < 1e-15);
  }
}

TEST_CASE("forward differences") {
  const double rate = 30.0;
  const int m = 120;
  const Matrix ramp = column_of(m, rate, [](double t) { return 3.0 * t; });
  const Matrix wave = column_of(m, rate, [](double t) { return std::sin(2 * pi * 0.5 * t); });
  const Matrix flat = Matrix::Constant(m, 1, 2.0);
  const auto w = fixture::window(pair(ramp, flat), pair(wave, ramp), rate);
  const auto in = estimate_derivatives(w);

  REQUIRE(in.states.samples() == m - 1);
  REQUIRE(in.derivatives.values.rows() == m - 1);
  REQUIRE(in.derivatives.values.cols() == 4);
  CHECK(in.states.angles() == w.angles().topRows(m - 1));
  CHECK(in.states.timestamps() == w.timestamps().head(m - 1));

  const auto& d = in.derivatives.values;
  CHECK((d.col(0).array() - 3.0).abs().maxCoeff() < 1e-9);
  CHECK(d.col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d.col(3).array() - 3.0).abs().maxCoeff() < 1e-9);

  // (sin(w(t+h)) - sin(wt)) / h = w cos(wt + wh/2) * sinc-like factor; the
  // residual after the half-step phase shift is bounded by 2 pi^2 f^2 / fs.
  const double f = 0.5;
  const double bound = 2 * pi * pi * f * f / rate;
  for (int k = 0; k < m - 1; ++k) {
    const double t = k / rate;
    const double want = 2 * pi * f * std::cos(2 * pi * f * t + pi * f / rate);
    CHECK(std::abs(d(k, 2) - want) <= bound);
  }
}

TEST_CASE("prefilter") {
  Matrix x(5, 1);
  x << 1, 2, 3, 10, 5;
  CHECK(moving_average(x, 1) == x);
  const Matrix y = moving_average(x, 3);
  CHECK(y(0, 0) == doctest::Approx(1.5));
  CHECK(y(1, 0) == doctest::Approx(2.0));
  CHECK(y(2, 0) == doctest::Approx(5.0));
  CHECK(y(4, 0) == doctest::Approx(7.5));
  CHECK(error_of([&] { moving_average(x, 0); }) == ErrorCode::InvalidArgument);

  const auto w = fixture::window(Matrix::Random(40, 2), Matrix::Random(40, 2));
  const auto smooth = estimate_derivatives(w, 5);
  CHECK(smooth.states.samples() == 39);
  const Matrix a = moving_average(w.angles(), 5);
  CHECK(smooth.states.angles() == a.topRows(39));
  CHECK(smooth.derivatives.values(3, 0) ==
        doctest::Approx((a(4, 0) - a(3, 0)) * 30.0));
}

TEST_CASE("measured ROCOF") {
  const int m = 60, r = 2;
  const double rate = 30.0, h = 1.0 / rate;
  Matrix speeds(m, r), angles(m, r);
  for (int k = 0; k < m; ++k) {
    speeds(k, 0) = std::sin(0.3 * k);
    speeds(k, 1) = std::cos(0.11 * k) * 0.5;
  }
  // Angles integrate the speeds exactly under the forward difference.
  angles.row(0).setZero();
  for (int k = 0; k + 1 < m; ++k) angles.row(k + 1) = angles.row(k) + speeds.row(k) * h;
  const auto w = fixture::window(angles, speeds, rate);

  SUBCASE("zeros") {
    const auto d = ingest_rocof(w, Matrix::Zero(m, r));
    CHECK(d.values.rows() == m - 1);
    CHECK(d.values.rightCols(r).cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.values.leftCols(r) == speeds.topRows(m - 1));
  }

  SUBCASE("same as finite differences when the ROCOF is the speed difference") {
    Matrix rocof = Matrix::Zero(m, r);
    for (int k = 0; k + 1 < m; ++k) rocof.row(k) = (speeds.row(k + 1) - speeds.row(k)) * rate;
    const auto fd = estimate_derivatives(w).derivatives.values;
    const auto measured = ingest_rocof(w, rocof).values;
    CHECK((fd - measured).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("shape mismatch") {
    CHECK(error_of([&] { ingest_rocof(w, Matrix::Zero(m, r + 1)); }) == ErrorCode::ShapeMismatch);
    CHECK(error_of([&] { ingest_rocof(w, Matrix::Zero(m - 1, r)); }) == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("angle differences converge to the measured speed") {
  // Noise-free forced pair; the forward-difference error halves with the rate.
  fixture::TwoMachine p;
  p.d_per_m = 2.0;
  const auto model = fixture::two_machine(p);
  ForcingSpec u;
  u.target = "B";
  u.amplitude = 0.05;
  u.frequency_hz = 0.5;
  std::vector<double> errs;
  for (double rate : {30.0, 60.0, 120.0}) {
    SimulationOptions opt;
    opt.duration_s = 20.0;
    opt.warmup_s = 10.0;
    opt.output_rate_hz = rate;
    opt.internal_dt_s = 1.0 / 1080.0;
    const auto w = simulate(model, {u}, opt);
    const auto in = estimate_derivatives(w);
    const int m = static_cast<int>(in.states.samples());
    // Mean-centering shifts the speed by a constant; compare the fluctuations.
    Vector e = in.derivatives.values.col(1) - in.states.speeds().col(1);
    e.array() -= e.mean();
    errs.push_back(e.cwiseAbs().maxCoeff());
    CHECK(m == static_cast<int>(20 * rate) - 1);
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double ratio = errs[i - 1] / errs[i];
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.2);
  }
}

TEST_CASE("shape contract holds for every path") {
  for (int r : {2, 3, 7}) {
    const auto w = fixture::window(Matrix::Random(25, r), Matrix::Random(25, r));
    for (int width : {1, 3}) {
      const auto in = estimate_derivatives(w, width);
      CHECK(in.states.samples() == in.derivatives.values.rows());
      CHECK(in.derivatives.values.cols() == 2 * r);
    }
    const auto d = ingest_rocof(w, Matrix::Random(25, r));
    CHECK(d.values.rows() == 24);
    CHECK(d.values.cols() == 2 * r);
  }
}
