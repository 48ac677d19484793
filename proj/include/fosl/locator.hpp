// Scaled-MAD outlier flagging on the zeta index and the end-to-end pipeline.
#pragma once

#include "fosl/spectrum.hpp"
#include "fosl/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fosl {

enum class DerivativeSource { FiniteDifference, Rocof };
enum class OutlierAxis { Flat, PerRow };
enum class LambdaMode {
  Fixed,     // use PipelineConfig::lambda as given
  Sparsity,  // derive lambda from the initial fit (see sparsity_lambda)
};

struct PipelineConfig {
  double lambda = 1e-6;
  LambdaMode lambda_mode = LambdaMode::Sparsity;
  double sparsity_target = 0.5;
  CandidateParams candidates;
  double window_seconds = 40.0;
  DerivativeSource derivative_source = DerivativeSource::FiniteDifference;
  int prefilter_width = 1;
  OutlierAxis outlier_axis = OutlierAxis::Flat;
  // Relative spread under which an unflagged, fully dense zeta is Unlocatable.
  double unlocatable_spread = 0.10;
  std::uint64_t seed = 0;
};

// Throws InvalidArgument naming the first out-of-range field.
void validate_config(const PipelineConfig& config);

struct MadRule {
  double median = 0.0;
  double smad = 0.0;       // 1.4826 * median absolute deviation
  double spread = 0.0;     // smad, or the mean-deviation fallback
  double threshold = 0.0;  // median + 3 * spread
  bool fallback = false;
  bool active = false;     // false when both spreads are zero
};

MadRule mad_rule(const Vector& values);

// Indices into values above the rule's threshold, ascending.
std::vector<Eigen::Index> mad_outlier_indices(const Vector& values);

struct ZetaCell {
  int candidate = 0;
  int machine = 0;

  bool operator==(const ZetaCell&) const = default;
};

// Flat: one rule over the row-major flattened index. PerRow: one rule per
// candidate frequency. Cells are returned in row-major order.
std::vector<ZetaCell> mad_outliers(const ZetaIndex& zeta, OutlierAxis axis = OutlierAxis::Flat);

// Top-k cells by zeta, ties broken by (candidate, machine) ascending.
std::vector<Detection> rank_sources(const ZetaIndex& zeta, int k);

// Runs the whole pipeline and reports the outcome as a verdict; only input
// errors and RankDeficient escape as exceptions. rocof (m x r, rad/s^2) is
// required when the config selects it.
LocationReport run_pipeline(const MeasurementWindow& window, const PipelineConfig& config,
                            const std::optional<Matrix>& rocof = std::nullopt);

// As run_pipeline, but NoCandidates and Unlocatable verdicts are thrown.
LocationReport locate(const MeasurementWindow& window, const PipelineConfig& config,
                      const std::optional<Matrix>& rocof = std::nullopt);

}  // namespace fosl
