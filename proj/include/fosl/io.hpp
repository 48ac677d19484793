// File formats: PMU CSV windows, JSON config/scenario/report, spectra CSV.
//
// CSV header: time_s,<label>:angle:<rad|deg>,<label>:speed:<hz|radps>[,<label>:rocof:<radps2|hzps>]
// Speed and ROCOF in hz/hzps are frequency deviations and are scaled by 2 pi.
#pragma once

#include "fosl/locator.hpp"
#include "fosl/simulator.hpp"
#include "fosl/spectrum.hpp"
#include "fosl/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fosl {

struct PmuData {
  MeasurementWindow window;
  std::optional<Matrix> rocof;  // rad/s^2, present when the file has ROCOF columns
};

// Throws IoError, ParseError (with line number), UnitError and the
// validate_window errors.
PmuData parse_pmu_csv(std::istream& in, const std::string& source = "<stream>");
PmuData load_pmu_data(const std::string& path);
MeasurementWindow load_pmu_csv(const std::string& path);

// Values are printed with 17 significant digits so a reload is bit-exact.
void write_window_csv(std::ostream& out, const MeasurementWindow& window,
                      const std::optional<Matrix>& rocof = std::nullopt);
void write_window_csv(const std::string& path, const MeasurementWindow& window,
                      const std::optional<Matrix>& rocof = std::nullopt);

// Missing keys take defaults; unknown keys and bad values raise ParseError.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::string& path);
std::string config_to_json(const PipelineConfig& config);

struct Scenario {
  GridModel model;
  std::vector<ForcingSpec> forcings;
  SimulationOptions options;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

struct ReportFile {
  LocationReport report;
  PipelineConfig config;
};

std::string report_to_json(const LocationReport& report, const PipelineConfig& config);
void write_report(const LocationReport& report, const PipelineConfig& config,
                  const std::string& path);
ReportFile parse_report(const std::string& json_text);
ReportFile read_report(const std::string& path);

// bin_hz,amplitude,channel
void write_spectra(std::ostream& out, const std::vector<AmplitudeSpectrum>& spectra);
void write_spectra(const std::string& path, const std::vector<AmplitudeSpectrum>& spectra);

std::string read_text_file(const std::string& path);

}  // namespace fosl
