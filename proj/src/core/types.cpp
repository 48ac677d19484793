#include "fosl/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace fosl {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonUniformSampling: return "NonUniformSampling";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnitError: return "UnitError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::Unlocatable: return "Unlocatable";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::NoEquilibrium: return "NoEquilibrium";
    case ErrorCode::NotAnEquilibrium: return "NotAnEquilibrium";
    case ErrorCode::SpectrumTooShort: return "SpectrumTooShort";
  }
  return "Unknown";
}

const char* to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::Located: return "source located";
    case Verdict::NoSourceLocated: return "no source located";
    case Verdict::NoCandidates: return "no candidates";
    case Verdict::Unlocatable: return "unlocatable";
  }
  return "unknown";
}

std::optional<Verdict> verdict_from_string(const std::string& text) {
  for (auto v : {Verdict::Located, Verdict::NoSourceLocated, Verdict::NoCandidates,
                 Verdict::Unlocatable}) {
    if (text == to_string(v)) return v;
  }
  return std::nullopt;
}

namespace {

bool column_means_zero(const Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double scale = std::max(1.0, m.col(c).cwiseAbs().maxCoeff());
    if (std::abs(m.col(c).mean()) > 1e-12 * scale) return false;
  }
  return true;
}

}  // namespace

MeasurementWindow validate_window(RawSamples raw, double sample_rate) {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  }
  const auto m = static_cast<Eigen::Index>(raw.timestamps.size());
  if (raw.angles.cols() != raw.speeds.cols() || raw.angles.rows() != raw.speeds.rows()) {
    std::ostringstream msg;
    msg << "angle block is " << raw.angles.rows() << "x" << raw.angles.cols()
        << " but speed block is " << raw.speeds.rows() << "x" << raw.speeds.cols();
    throw Error(ErrorCode::ShapeMismatch, msg.str());
  }
  if (raw.angles.rows() != m) {
    throw Error(ErrorCode::ShapeMismatch, "channel rows differ from timestamp count");
  }
  if (static_cast<Eigen::Index>(raw.labels.size()) != raw.angles.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "label count differs from channel count");
  }
  if (m < 4) {
    throw Error(ErrorCode::TooShort,
                "window has " + std::to_string(m) + " samples, at least 4 required");
  }
  if (raw.angles.cols() < 2) {
    throw Error(ErrorCode::ShapeMismatch, "at least two machines are required");
  }
  std::set<std::string> seen;
  for (const auto& label : raw.labels) {
    if (label.empty()) throw Error(ErrorCode::InvalidArgument, "empty machine label");
    if (!seen.insert(label).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate machine label '" + label + "'");
    }
  }
  if (!raw.angles.allFinite() || !raw.speeds.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "non-finite channel sample");
  }

  const double step = 1.0 / sample_rate;
  for (Eigen::Index k = 0; k + 1 < m; ++k) {
    const double dt = raw.timestamps[k + 1] - raw.timestamps[k];
    if (!(std::abs(dt - step) <= kSamplingJitterTolerance * step)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "sample interval " << dt << " s at row " << k + 1 << " deviates from "
          << step << " s";
      throw Error(ErrorCode::NonUniformSampling, msg.str());
    }
  }

  MeasurementWindow w;
  w.sample_rate_ = sample_rate;
  w.timestamps_ = Eigen::Map<const Vector>(raw.timestamps.data(), m);
  w.labels_ = std::move(raw.labels);
  w.angles_ = std::move(raw.angles);
  w.speeds_ = std::move(raw.speeds);
  w.mean_centered_ = column_means_zero(w.angles_) && column_means_zero(w.speeds_);
  return w;
}

MeasurementWindow replace_channels(const MeasurementWindow& base, Matrix angles,
                                   Matrix speeds) {
  if (angles.rows() != base.samples() || angles.cols() != base.machines() ||
      speeds.rows() != base.samples() || speeds.cols() != base.machines()) {
    throw Error(ErrorCode::ShapeMismatch, "replacement channels change the window shape");
  }
  MeasurementWindow w = base;
  w.angles_ = std::move(angles);
  w.speeds_ = std::move(speeds);
  w.mean_centered_ = column_means_zero(w.angles_) && column_means_zero(w.speeds_);
  return w;
}

Matrix MeasurementWindow::states() const {
  Matrix x(samples(), 2 * machines());
  x << angles_, speeds_;
  return x;
}

MeasurementWindow MeasurementWindow::rows(Eigen::Index first, Eigen::Index count) const {
  if (first < 0 || count < 1 || first + count > samples()) {
    throw Error(ErrorCode::InvalidArgument, "row range outside window");
  }
  // A contiguous slice of a validated window stays uniformly sampled.
  MeasurementWindow w = *this;
  w.timestamps_ = timestamps_.segment(first, count);
  w.angles_ = angles_.middleRows(first, count);
  w.speeds_ = speeds_.middleRows(first, count);
  w.mean_centered_ = column_means_zero(w.angles_) && column_means_zero(w.speeds_);
  return w;
}

MeasurementWindow MeasurementWindow::permuted(const std::vector<Eigen::Index>& order) const {
  if (static_cast<Eigen::Index>(order.size()) != machines()) {
    throw Error(ErrorCode::ShapeMismatch, "permutation length differs from machine count");
  }
  MeasurementWindow w = *this;
  for (std::size_t k = 0; k < order.size(); ++k) {
    w.labels_[k] = labels_.at(static_cast<std::size_t>(order[k]));
    w.angles_.col(static_cast<Eigen::Index>(k)) = angles_.col(order[k]);
    w.speeds_.col(static_cast<Eigen::Index>(k)) = speeds_.col(order[k]);
  }
  return w;
}

MeasurementWindow MeasurementWindow::scaled(double factor) const {
  return replace_channels(*this, angles_ * factor, speeds_ * factor);
}

FrequencyCandidateSet::FrequencyCandidateSet(std::vector<double> frequencies,
                                             double bin_width, double sample_rate)
    : frequencies_(std::move(frequencies)), bin_width_(bin_width) {
  if (!(bin_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "bin width must be positive");
  std::sort(frequencies_.begin(), frequencies_.end());
  for (std::size_t i = 0; i < frequencies_.size(); ++i) {
    const double f = frequencies_[i];
    if (!(f > 0.0 && f < sample_rate / 2.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "candidate frequency " + std::to_string(f) + " Hz outside (0, Nyquist)");
    }
    if (i > 0 && !(f - frequencies_[i - 1] > bin_width / 2.0)) {
      throw Error(ErrorCode::InvalidArgument, "candidate frequencies are not deduplicated");
    }
  }
}

std::string describe(const FeatureTag& tag) {
  std::ostringstream out;
  switch (tag.kind) {
    case FeatureKind::Bias: out << "1"; break;
    case FeatureKind::AngleState: out << "angle[" << tag.machine << "]"; break;
    case FeatureKind::SpeedState: out << "speed[" << tag.machine << "]"; break;
    case FeatureKind::SinWave: out << "sin(" << tag.frequency << " Hz)"; break;
    case FeatureKind::CosWave: out << "cos(" << tag.frequency << " Hz)"; break;
  }
  return out.str();
}

CoefficientMatrix::CoefficientMatrix(Matrix values, int machines,
                                     std::vector<double> frequencies)
    : values_(std::move(values)), machines_(machines), frequencies_(std::move(frequencies)) {
  const auto expected_rows = 1 + 2 * machines_ + 2 * static_cast<int>(frequencies_.size());
  if (values_.rows() != expected_rows || values_.cols() != 2 * machines_) {
    throw Error(ErrorCode::ShapeMismatch, "coefficient matrix has the wrong shape");
  }
}

Matrix CoefficientMatrix::bias_block() const { return values_.topRows(1); }

Matrix CoefficientMatrix::jacobian_block() const {
  return values_.middleRows(1, 2 * machines_);
}

Matrix CoefficientMatrix::forcing_block() const {
  return values_.bottomRows(2 * candidates());
}

double CoefficientMatrix::sin_coefficient(int candidate, int machine) const {
  return values_(sin_row(machines_, candidate), machines_ + machine);
}

double CoefficientMatrix::cos_coefficient(int candidate, int machine) const {
  return values_(sin_row(machines_, candidate) + 1, machines_ + machine);
}

ZetaIndex::ZetaIndex(Matrix values, std::vector<double> frequencies,
                     std::vector<std::string> labels)
    : values_(std::move(values)),
      frequencies_(std::move(frequencies)),
      labels_(std::move(labels)) {
  if (values_.rows() != static_cast<Eigen::Index>(frequencies_.size()) ||
      values_.cols() != static_cast<Eigen::Index>(labels_.size())) {
    throw Error(ErrorCode::ShapeMismatch, "zeta index labels do not match its shape");
  }
  if ((values_.array() < 0.0).any() || !values_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "zeta entries must be finite and non-negative");
  }
}

ZetaIndex ZetaIndex::from_coefficients(const CoefficientMatrix& xi,
                                       std::vector<std::string> labels) {
  const int n = xi.candidates();
  const int r = xi.machines();
  Matrix z(n, r);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < r; ++j) {
      const double a = xi.sin_coefficient(i, j);
      const double b = xi.cos_coefficient(i, j);
      z(i, j) = a * a + b * b;
    }
  }
  return ZetaIndex(std::move(z), xi.frequencies(), std::move(labels));
}

}  // namespace fosl
