#include "fosl/fosl.h"

#include "fosl/io.hpp"
#include "fosl/locator.hpp"
#include "fosl/signal_prep.hpp"
#include "fosl/simulator.hpp"
#include "fosl/spectrum.hpp"

#include <cstring>
#include <new>
#include <string>

struct fosl_window {
  fosl::MeasurementWindow window;
  std::optional<fosl::Matrix> rocof;
};
struct fosl_config {
  fosl::PipelineConfig config;
};
struct fosl_report {
  fosl::LocationReport report;
  fosl::PipelineConfig config;
};
struct fosl_scenario {
  fosl::Scenario scenario;
};
struct fosl_spectra {
  std::vector<fosl::AmplitudeSpectrum> spectra;
};

namespace {

thread_local std::string last_error;

fosl_status fail(fosl_status status, const std::string& message) {
  last_error = message;
  return status;
}

fosl_status status_of(fosl::ErrorCode code) { return static_cast<fosl_status>(code); }

template <typename F>
fosl_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const fosl::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FOSL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FOSL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FOSL_ERR_INTERNAL, "unknown error");
  }
}

fosl_status null_argument(const char* name) {
  return fail(FOSL_ERR_INVALID_ARGUMENT, std::string(name) + " is NULL");
}

char* duplicate(const std::string& text) {
  auto* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

fosl::Matrix row_major(const double* data, size_t rows, size_t cols) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void to_row_major(const fosl::Matrix& m, double* out) {
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out, m.rows(), m.cols()) = m;
}

}  // namespace

extern "C" {

const char* fosl_version(void) { return "0.1.0"; }

const char* fosl_last_error(void) { return last_error.c_str(); }

const char* fosl_status_name(fosl_status status) {
  if (status == FOSL_OK) return "Ok";
  if (status == FOSL_ERR_INTERNAL) return "Internal";
  if (status >= FOSL_ERR_INVALID_ARGUMENT && status <= FOSL_ERR_SPECTRUM_TOO_SHORT) {
    return fosl::to_string(static_cast<fosl::ErrorCode>(status));
  }
  return "Unknown";
}

void fosl_string_free(char* text) { std::free(text); }

fosl_status fosl_window_create(size_t samples, size_t machines, double sample_rate,
                               const double* timestamps, const char* const* labels,
                               const double* angles, const double* speeds, fosl_window** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!timestamps) return null_argument("timestamps");
  if (!labels) return null_argument("labels");
  if (!angles) return null_argument("angles");
  if (!speeds) return null_argument("speeds");
  return guarded([&] {
    fosl::RawSamples raw;
    raw.timestamps.assign(timestamps, timestamps + samples);
    for (size_t j = 0; j < machines; ++j) {
      if (!labels[j]) return null_argument("label");
      raw.labels.emplace_back(labels[j]);
    }
    raw.angles = row_major(angles, samples, machines);
    raw.speeds = row_major(speeds, samples, machines);
    *out = new fosl_window{fosl::validate_window(std::move(raw), sample_rate), std::nullopt};
    return FOSL_OK;
  });
}

fosl_status fosl_window_load_csv(const char* path, fosl_window** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!path) return null_argument("path");
  return guarded([&] {
    auto data = fosl::load_pmu_data(path);
    *out = new fosl_window{std::move(data.window), std::move(data.rocof)};
    return FOSL_OK;
  });
}

fosl_status fosl_window_write_csv(const fosl_window* window, const char* path) {
  if (!window) return null_argument("window");
  if (!path) return null_argument("path");
  return guarded([&] {
    fosl::write_window_csv(std::string(path), window->window, window->rocof);
    return FOSL_OK;
  });
}

size_t fosl_window_samples(const fosl_window* window) {
  return window ? static_cast<size_t>(window->window.samples()) : 0;
}

size_t fosl_window_machines(const fosl_window* window) {
  return window ? static_cast<size_t>(window->window.machines()) : 0;
}

double fosl_window_sample_rate(const fosl_window* window) {
  return window ? window->window.sample_rate() : 0.0;
}

const char* fosl_window_label(const fosl_window* window, size_t index) {
  if (!window || index >= window->window.labels().size()) return nullptr;
  return window->window.labels()[index].c_str();
}

fosl_status fosl_window_copy_channels(const fosl_window* window, double* angles, double* speeds) {
  if (!window) return null_argument("window");
  if (angles) to_row_major(window->window.angles(), angles);
  if (speeds) to_row_major(window->window.speeds(), speeds);
  return FOSL_OK;
}

void fosl_window_free(fosl_window* window) { delete window; }

fosl_status fosl_config_default(fosl_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new fosl_config{};
    return FOSL_OK;
  });
}

fosl_status fosl_config_load(const char* path, fosl_config** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!path) return null_argument("path");
  return guarded([&] {
    *out = new fosl_config{fosl::load_config(path)};
    return FOSL_OK;
  });
}

fosl_status fosl_config_parse(const char* json_text, fosl_config** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!json_text) return null_argument("json_text");
  return guarded([&] {
    *out = new fosl_config{fosl::parse_config(json_text)};
    return FOSL_OK;
  });
}

fosl_status fosl_config_to_json(const fosl_config* config, char** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = duplicate(fosl::config_to_json(config->config));
    return FOSL_OK;
  });
}

void fosl_config_free(fosl_config* config) { delete config; }

fosl_status fosl_locate(const fosl_window* window, const fosl_config* config, fosl_report** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!window) return null_argument("window");
  if (!config) return null_argument("config");
  return guarded([&] {
    auto report = fosl::run_pipeline(window->window, config->config, window->rocof);
    const auto verdict = report.verdict;
    *out = new fosl_report{std::move(report), config->config};
    if (verdict == fosl::Verdict::NoCandidates) {
      return fail(FOSL_ERR_NO_CANDIDATES, "no candidate forcing frequency in the window");
    }
    if (verdict == fosl::Verdict::Unlocatable) {
      return fail(FOSL_ERR_UNLOCATABLE, "forcing coefficients are dense and uniform");
    }
    return FOSL_OK;
  });
}

fosl_verdict fosl_report_verdict(const fosl_report* report) {
  if (!report) return FOSL_VERDICT_NO_SOURCE;
  switch (report->report.verdict) {
    case fosl::Verdict::Located: return FOSL_VERDICT_LOCATED;
    case fosl::Verdict::NoSourceLocated: return FOSL_VERDICT_NO_SOURCE;
    case fosl::Verdict::NoCandidates: return FOSL_VERDICT_NO_CANDIDATES;
    case fosl::Verdict::Unlocatable: return FOSL_VERDICT_UNLOCATABLE;
  }
  return FOSL_VERDICT_NO_SOURCE;
}

const char* fosl_verdict_name(fosl_verdict verdict) {
  switch (verdict) {
    case FOSL_VERDICT_LOCATED: return fosl::to_string(fosl::Verdict::Located);
    case FOSL_VERDICT_NO_SOURCE: return fosl::to_string(fosl::Verdict::NoSourceLocated);
    case FOSL_VERDICT_NO_CANDIDATES: return fosl::to_string(fosl::Verdict::NoCandidates);
    case FOSL_VERDICT_UNLOCATABLE: return fosl::to_string(fosl::Verdict::Unlocatable);
  }
  return "unknown";
}

size_t fosl_report_detection_count(const fosl_report* report) {
  return report ? report->report.detections.size() : 0;
}

fosl_status fosl_report_detection(const fosl_report* report, size_t index, const char** machine,
                                  double* frequency_hz, double* zeta, int* rank) {
  if (!report) return null_argument("report");
  if (index >= report->report.detections.size()) {
    return fail(FOSL_ERR_INVALID_ARGUMENT, "detection index out of range");
  }
  const auto& d = report->report.detections[index];
  if (machine) *machine = d.machine.c_str();
  if (frequency_hz) *frequency_hz = d.frequency_hz;
  if (zeta) *zeta = d.zeta;
  if (rank) *rank = d.rank;
  return FOSL_OK;
}

size_t fosl_report_candidate_count(const fosl_report* report) {
  return report ? report->report.candidates_hz.size() : 0;
}

double fosl_report_candidate(const fosl_report* report, size_t index) {
  if (!report || index >= report->report.candidates_hz.size()) return 0.0;
  return report->report.candidates_hz[index];
}

double fosl_report_elapsed(const fosl_report* report) {
  return report ? report->report.elapsed_s : 0.0;
}

fosl_status fosl_report_to_json(const fosl_report* report, char** out) {
  if (!report) return null_argument("report");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = duplicate(fosl::report_to_json(report->report, report->config));
    return FOSL_OK;
  });
}

fosl_status fosl_report_write(const fosl_report* report, const char* path) {
  if (!report) return null_argument("report");
  if (!path) return null_argument("path");
  return guarded([&] {
    fosl::write_report(report->report, report->config, path);
    return FOSL_OK;
  });
}

void fosl_report_free(fosl_report* report) { delete report; }

fosl_status fosl_scenario_load(const char* path, fosl_scenario** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!path) return null_argument("path");
  return guarded([&] {
    *out = new fosl_scenario{fosl::load_scenario(path)};
    return FOSL_OK;
  });
}

fosl_status fosl_scenario_parse(const char* json_text, fosl_scenario** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!json_text) return null_argument("json_text");
  return guarded([&] {
    *out = new fosl_scenario{fosl::parse_scenario(json_text)};
    return FOSL_OK;
  });
}

fosl_status fosl_scenario_set_seed(fosl_scenario* scenario, uint64_t seed) {
  if (!scenario) return null_argument("scenario");
  scenario->scenario.options.seed = seed;
  return FOSL_OK;
}

size_t fosl_scenario_machines(const fosl_scenario* scenario) {
  return scenario ? static_cast<size_t>(scenario->scenario.model.machines()) : 0;
}

fosl_status fosl_simulate(const fosl_scenario* scenario, fosl_window** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!scenario) return null_argument("scenario");
  return guarded([&] {
    const auto& s = scenario->scenario;
    *out = new fosl_window{fosl::simulate(s.model, s.forcings, s.options), std::nullopt};
    return FOSL_OK;
  });
}

fosl_status fosl_modes(const fosl_scenario* scenario, double* frequency_hz, double* damping_ratio,
                       size_t capacity, size_t* count) {
  if (!scenario) return null_argument("scenario");
  if (!count) return null_argument("count");
  return guarded([&] {
    const auto& s = scenario->scenario;
    const fosl::Vector eq =
        s.options.initial_angles ? *s.options.initial_angles : fosl::solve_equilibrium(s.model);
    const auto modes = fosl::natural_modes(s.model, eq);
    *count = modes.size();
    for (size_t k = 0; k < modes.size() && k < capacity; ++k) {
      if (frequency_hz) frequency_hz[k] = modes[k].frequency_hz;
      if (damping_ratio) damping_ratio[k] = modes[k].damping_ratio;
    }
    return FOSL_OK;
  });
}

void fosl_scenario_free(fosl_scenario* scenario) { delete scenario; }

fosl_status fosl_spectra_compute(const fosl_window* window, fosl_channels channels,
                                 fosl_spectra** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!window) return null_argument("window");
  fosl::ScanChannels scan;
  switch (channels) {
    case FOSL_CHANNELS_SPEED: scan = fosl::ScanChannels::Speed; break;
    case FOSL_CHANNELS_ANGLE: scan = fosl::ScanChannels::Angle; break;
    case FOSL_CHANNELS_BOTH: scan = fosl::ScanChannels::Both; break;
    default: return fail(FOSL_ERR_INVALID_ARGUMENT, "unknown channel selection");
  }
  return guarded([&] {
    const auto centered = fosl::detrend(window->window).window;
    *out = new fosl_spectra{fosl::channel_spectra(centered, scan)};
    return FOSL_OK;
  });
}

size_t fosl_spectra_count(const fosl_spectra* spectra) {
  return spectra ? spectra->spectra.size() : 0;
}

fosl_status fosl_spectra_write_csv(const fosl_spectra* spectra, const char* path) {
  if (!spectra) return null_argument("spectra");
  if (!path) return null_argument("path");
  return guarded([&] {
    fosl::write_spectra(std::string(path), spectra->spectra);
    return FOSL_OK;
  });
}

void fosl_spectra_free(fosl_spectra* spectra) { delete spectra; }

}  // extern "C"
