// Command-line front end over the C interface.
#include "fosl/fosl.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitLocated = 0;
constexpr int kExitError = 1;
constexpr int kExitNotLocated = 2;

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Window = std::unique_ptr<fosl_window, Deleter<fosl_window, fosl_window_free>>;
using Config = std::unique_ptr<fosl_config, Deleter<fosl_config, fosl_config_free>>;
using Report = std::unique_ptr<fosl_report, Deleter<fosl_report, fosl_report_free>>;
using Scenario = std::unique_ptr<fosl_scenario, Deleter<fosl_scenario, fosl_scenario_free>>;
using Spectra = std::unique_ptr<fosl_spectra, Deleter<fosl_spectra, fosl_spectra_free>>;

int report_error(fosl_status status) {
  std::fprintf(stderr, "error (%s): %s\n", fosl_status_name(status), fosl_last_error());
  return kExitError;
}

int run_locate(const std::string& input, const std::string& config_path,
               const std::string& output) {
  fosl_window* w = nullptr;
  if (auto s = fosl_window_load_csv(input.c_str(), &w); s != FOSL_OK) return report_error(s);
  Window window(w);

  fosl_config* c = nullptr;
  const fosl_status cs = config_path.empty() ? fosl_config_default(&c)
                                             : fosl_config_load(config_path.c_str(), &c);
  if (cs != FOSL_OK) return report_error(cs);
  Config config(c);

  fosl_report* r = nullptr;
  const fosl_status ls = fosl_locate(window.get(), config.get(), &r);
  if (!r) return report_error(ls);
  Report report(r);

  if (output.empty()) {
    char* text = nullptr;
    if (auto s = fosl_report_to_json(report.get(), &text); s != FOSL_OK) return report_error(s);
    std::fputs(text, stdout);
    fosl_string_free(text);
  } else {
    if (auto s = fosl_report_write(report.get(), output.c_str()); s != FOSL_OK) {
      return report_error(s);
    }
    const fosl_verdict verdict = fosl_report_verdict(report.get());
    std::printf("verdict: %s\n", fosl_verdict_name(verdict));
    const size_t n = fosl_report_candidate_count(report.get());
    std::printf("candidates:");
    for (size_t k = 0; k < n; ++k) std::printf(" %.4g", fosl_report_candidate(report.get(), k));
    std::printf(n == 0 ? " none\n" : " Hz\n");
    for (size_t k = 0; k < fosl_report_detection_count(report.get()); ++k) {
      const char* machine = nullptr;
      double f = 0.0, zeta = 0.0;
      int rank = 0;
      fosl_report_detection(report.get(), k, &machine, &f, &zeta, &rank);
      std::printf("  #%d %s at %.4g Hz (zeta %.4g)\n", rank, machine, f, zeta);
    }
  }
  return fosl_report_verdict(report.get()) == FOSL_VERDICT_LOCATED ? kExitLocated
                                                                   : kExitNotLocated;
}

int run_simulate(const std::string& scenario_path, const std::string& output,
                 std::optional<std::uint64_t> seed) {
  fosl_scenario* sc = nullptr;
  if (auto s = fosl_scenario_load(scenario_path.c_str(), &sc); s != FOSL_OK) return report_error(s);
  Scenario scenario(sc);
  if (seed) fosl_scenario_set_seed(scenario.get(), *seed);
  fosl_window* w = nullptr;
  if (auto s = fosl_simulate(scenario.get(), &w); s != FOSL_OK) return report_error(s);
  Window window(w);
  if (auto s = fosl_window_write_csv(window.get(), output.c_str()); s != FOSL_OK) {
    return report_error(s);
  }
  return 0;
}

int run_spectrum(const std::string& input, const std::string& output, const std::string& channels) {
  fosl_window* w = nullptr;
  if (auto s = fosl_window_load_csv(input.c_str(), &w); s != FOSL_OK) return report_error(s);
  Window window(w);
  const fosl_channels which = channels == "angle"   ? FOSL_CHANNELS_ANGLE
                              : channels == "both" ? FOSL_CHANNELS_BOTH
                                                   : FOSL_CHANNELS_SPEED;
  fosl_spectra* sp = nullptr;
  if (auto s = fosl_spectra_compute(window.get(), which, &sp); s != FOSL_OK) return report_error(s);
  Spectra spectra(sp);
  if (auto s = fosl_spectra_write_csv(spectra.get(), output.c_str()); s != FOSL_OK) {
    return report_error(s);
  }
  return 0;
}

int run_modes(const std::string& scenario_path) {
  fosl_scenario* sc = nullptr;
  if (auto s = fosl_scenario_load(scenario_path.c_str(), &sc); s != FOSL_OK) return report_error(s);
  Scenario scenario(sc);
  size_t count = 0;
  if (auto s = fosl_modes(scenario.get(), nullptr, nullptr, 0, &count); s != FOSL_OK) {
    return report_error(s);
  }
  std::vector<double> freq(count), zeta(count);
  if (auto s = fosl_modes(scenario.get(), freq.data(), zeta.data(), count, &count); s != FOSL_OK) {
    return report_error(s);
  }
  std::printf("%-6s %12s %14s\n", "mode", "frequency_hz", "damping_ratio");
  for (size_t k = 0; k < count; ++k) {
    std::printf("%-6zu %12.6f %14.6f\n", k + 1, freq[k], zeta[k]);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forced-oscillation source location from PMU angle/speed data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fosl_version()));

  std::string input, config, output, scenario, channels = "speed";
  std::optional<std::uint64_t> seed;

  auto* locate = app.add_subcommand("locate", "Locate forced-oscillation sources in a PMU CSV");
  locate->add_option("--input", input, "PMU CSV file")->required()->check(CLI::ExistingFile);
  locate->add_option("--config", config, "Pipeline config (JSON); defaults when omitted")
      ->check(CLI::ExistingFile);
  locate->add_option("--output", output, "Report path (JSON); stdout when omitted");

  auto* simulate = app.add_subcommand("simulate", "Simulate a scenario into a PMU CSV");
  simulate->add_option("--scenario", scenario, "Scenario file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--output", output, "CSV output path")->required();
  simulate->add_option("--seed", seed, "Override the scenario's noise seed");

  auto* spectrum = app.add_subcommand("spectrum", "Write per-channel amplitude spectra");
  spectrum->add_option("--input", input, "PMU CSV file")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--output", output, "CSV output path")->required();
  spectrum->add_option("--channels", channels, "speed, angle or both")
      ->check(CLI::IsMember({"speed", "angle", "both"}));

  auto* modes = app.add_subcommand("modes", "Print natural modes of a scenario's grid model");
  modes->add_option("--scenario", scenario, "Scenario file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  if (locate->parsed()) return run_locate(input, config, output);
  if (simulate->parsed()) return run_simulate(scenario, output, seed);
  if (spectrum->parsed()) return run_spectrum(input, output, channels);
  return run_modes(scenario);
}
