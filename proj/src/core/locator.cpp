#include "fosl/locator.hpp"

#include "fosl/signal_prep.hpp"
#include "fosl/sindy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace fosl {

namespace {

constexpr double kMadScale = 1.4826;

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), mid));
}

void check(bool ok, const char* message) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, message);
}

}  // namespace

void validate_config(const PipelineConfig& c) {
  check(c.lambda > 0.0 && std::isfinite(c.lambda), "lambda must be positive");
  check(c.sparsity_target >= 0.0 && c.sparsity_target < 1.0, "sparsity_target must lie in [0, 1)");
  check(c.candidates.zscore.lag >= 2, "zscore lag must be >= 2");
  check(c.candidates.zscore.threshold > 0.0, "zscore threshold must be > 0");
  check(c.candidates.zscore.influence >= 0.0 && c.candidates.zscore.influence <= 1.0,
        "zscore influence must lie in [0, 1]");
  check(c.candidates.quorum > 0.0 && c.candidates.quorum <= 1.0, "quorum must lie in (0, 1]");
  check(c.window_seconds > 0.0, "window_seconds must be positive");
  check(c.prefilter_width >= 1, "prefilter_width must be >= 1");
  check(c.unlocatable_spread >= 0.0 && c.unlocatable_spread < 1.0,
        "unlocatable_spread must lie in [0, 1)");
}

MadRule mad_rule(const Vector& values) {
  MadRule rule;
  if (values.size() == 0) return rule;
  std::vector<double> v(values.data(), values.data() + values.size());
  rule.median = median(v);
  std::vector<double> dev(v.size());
  std::transform(v.begin(), v.end(), dev.begin(),
                 [&](double x) { return std::abs(x - rule.median); });
  rule.smad = kMadScale * median(dev);
  rule.spread = rule.smad;
  if (rule.smad == 0.0) {
    rule.fallback = true;
    rule.spread = kMadScale * std::accumulate(dev.begin(), dev.end(), 0.0) /
                  static_cast<double>(dev.size());
  }
  rule.active = rule.spread > 0.0;
  rule.threshold = rule.median + 3.0 * rule.spread;
  return rule;
}

std::vector<Eigen::Index> mad_outlier_indices(const Vector& values) {
  const MadRule rule = mad_rule(values);
  std::vector<Eigen::Index> out;
  if (!rule.active) return out;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) > rule.threshold) out.push_back(k);
  }
  return out;
}

std::vector<ZetaCell> mad_outliers(const ZetaIndex& zeta, OutlierAxis axis) {
  const Matrix& z = zeta.values();
  const auto r = z.cols();
  std::vector<ZetaCell> out;
  if (axis == OutlierAxis::Flat) {
    Vector flat(z.size());
    for (Eigen::Index i = 0; i < z.rows(); ++i) flat.segment(i * r, r) = z.row(i).transpose();
    for (Eigen::Index k : mad_outlier_indices(flat)) {
      out.push_back({static_cast<int>(k / r), static_cast<int>(k % r)});
    }
  } else {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      for (Eigen::Index j : mad_outlier_indices(z.row(i).transpose())) {
        out.push_back({static_cast<int>(i), static_cast<int>(j)});
      }
    }
  }
  return out;
}

namespace {

std::vector<Detection> ranked(const ZetaIndex& zeta, std::vector<ZetaCell> cells) {
  const Matrix& z = zeta.values();
  std::stable_sort(cells.begin(), cells.end(), [&](const ZetaCell& a, const ZetaCell& b) {
    const double za = z(a.candidate, a.machine);
    const double zb = z(b.candidate, b.machine);
    if (za != zb) return za > zb;
    if (a.candidate != b.candidate) return a.candidate < b.candidate;
    return a.machine < b.machine;
  });
  std::vector<Detection> out;
  int rank = 0;
  for (const auto& c : cells) {
    out.push_back({zeta.labels()[static_cast<std::size_t>(c.machine)],
                   zeta.frequencies()[static_cast<std::size_t>(c.candidate)],
                   z(c.candidate, c.machine), ++rank});
  }
  return out;
}

bool dense_and_uniform(const Matrix& z, double spread) {
  if (z.size() == 0) return false;
  const double lo = z.minCoeff();
  const double hi = z.maxCoeff();
  return lo > 0.0 && hi - lo <= spread * hi;
}

}  // namespace

std::vector<Detection> rank_sources(const ZetaIndex& zeta, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  std::vector<ZetaCell> all;
  for (int i = 0; i < zeta.rows(); ++i) {
    for (int j = 0; j < zeta.cols(); ++j) all.push_back({i, j});
  }
  auto out = ranked(zeta, std::move(all));
  if (out.size() > static_cast<std::size_t>(k)) out.resize(static_cast<std::size_t>(k));
  return out;
}

LocationReport run_pipeline(const MeasurementWindow& input, const PipelineConfig& config,
                            const std::optional<Matrix>& rocof) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&](LocationReport& report) {
    report.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const auto wanted = static_cast<Eigen::Index>(
      std::llround(config.window_seconds * input.sample_rate()));
  const Eigen::Index m = std::min(input.samples(), std::max<Eigen::Index>(wanted, 1));
  if (m < 4) throw Error(ErrorCode::TooShort, "analysis window holds fewer than 4 samples");
  const MeasurementWindow window = m == input.samples() ? input : input.rows(0, m);
  const MeasurementWindow centered = detrend(window).window;

  RegressionInputs inputs = [&]() -> RegressionInputs {
    if (config.derivative_source == DerivativeSource::FiniteDifference) {
      return estimate_derivatives(centered, config.prefilter_width);
    }
    if (!rocof) throw Error(ErrorCode::InvalidArgument, "ROCOF derivative source needs ROCOF data");
    if (rocof->rows() != input.samples() || rocof->cols() != input.machines()) {
      throw Error(ErrorCode::ShapeMismatch, "ROCOF block shape differs from the window");
    }
    return {centered.rows(0, m - 1), ingest_rocof(centered, rocof->topRows(m))};
  }();

  LocationReport report;
  report.labels = window.labels();
  report.bin_width_hz = window.sample_rate() / static_cast<double>(m);

  FrequencyCandidateSet candidates;
  try {
    candidates = candidate_frequencies(centered, config.candidates);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoCandidates) throw;
    report.verdict = Verdict::NoCandidates;
    finish(report);
    return report;
  }
  report.candidates_hz = candidates.frequencies();

  const int r = static_cast<int>(window.machines());
  const FeatureLibrary library = build_library(inputs.states, candidates);
  const StructuralMask mask = StructuralMask::swing(r, static_cast<int>(candidates.size()));
  double lambda = config.lambda;
  if (config.lambda_mode == LambdaMode::Sparsity) {
    lambda = sparsity_lambda(initial_fit(library, inputs.derivatives, mask),
                             config.sparsity_target, config.lambda);
  }
  StlsqResult fit = stlsq(library, inputs.derivatives, lambda, mask);
  report.diagnostics = fit.diagnostics;

  const ZetaIndex zeta = extract_forcing_block(fit.xi, window.labels());
  report.zeta = zeta.values();
  report.detections = ranked(zeta, mad_outliers(zeta, config.outlier_axis));
  if (!report.detections.empty()) {
    report.verdict = Verdict::Located;
  } else if (dense_and_uniform(zeta.values(), config.unlocatable_spread)) {
    report.verdict = Verdict::Unlocatable;
  } else {
    report.verdict = Verdict::NoSourceLocated;
  }
  finish(report);
  return report;
}

LocationReport locate(const MeasurementWindow& window, const PipelineConfig& config,
                      const std::optional<Matrix>& rocof) {
  LocationReport report = run_pipeline(window, config, rocof);
  if (report.verdict == Verdict::NoCandidates) {
    throw Error(ErrorCode::NoCandidates, "no candidate forcing frequency in the window");
  }
  if (report.verdict == Verdict::Unlocatable) {
    throw Error(ErrorCode::Unlocatable,
                "forcing coefficients are dense and uniform; no source stands out");
  }
  return report;
}

}  // namespace fosl
