// Acceptance suite: one PASS/FAIL line per criterion A1..A10.
#include "fosl/locator.hpp"
#include "fosl/sindy.hpp"
#include "fosl/simulator.hpp"
#include "fosl/spectrum.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using fosl::Matrix;
using fosl::Vector;

namespace {

constexpr int kSeeds = 20;
constexpr double kBin = 30.0 / 1200.0;
constexpr double kBinTol = kBin * (1.0 + 1e-9);

int failures = 0;

void line(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool near(double f, double target) { return std::abs(f - target) <= kBinTol; }

bool near_mode(double f, const std::vector<fosl::NaturalMode>& modes, double rel) {
  return std::any_of(modes.begin(), modes.end(), [&](const fosl::NaturalMode& m) {
    return std::abs(f - m.frequency_hz) <= rel * m.frequency_hz;
  });
}

std::vector<fosl::NaturalMode> modes_of(const std::string& name) {
  const auto s = fixture::scenario(name);
  return fosl::natural_modes(s.model, *s.options.initial_angles);
}

// Runs the scenario over the seed set; judge returns true on success.
struct SeedRun {
  int passed = 0;
  double max_elapsed = 0.0;
  std::string first_failure;
};

SeedRun over_seeds(const std::string& scenario, std::uint64_t base,
                   const std::function<bool(const fosl::LocationReport&, std::string&)>& judge) {
  SeedRun run;
  const fosl::PipelineConfig config;
  for (int k = 0; k < kSeeds; ++k) {
    const auto window = fixture::simulate(scenario, base + static_cast<std::uint64_t>(k));
    const auto report = fosl::run_pipeline(window, config);
    run.max_elapsed = std::max(run.max_elapsed, report.elapsed_s);
    std::string why;
    if (judge(report, why)) {
      ++run.passed;
    } else if (run.first_failure.empty()) {
      run.first_failure = fmt("seed %llu: %s", static_cast<unsigned long long>(base + k), why.c_str());
    }
  }
  return run;
}

std::string describe(const fosl::LocationReport& r) {
  std::string s = std::string(fosl::to_string(r.verdict)) + " [";
  for (const auto& d : r.detections) s += fmt(" %s@%.3f", d.machine.c_str(), d.frequency_hz);
  return s + " ]";
}

void a1() {
  const auto modes = modes_of("resonant_sine");
  const double inter_area = modes.front().frequency_hz;
  const bool resonant = std::abs(0.4 - inter_area) <= 0.005 * inter_area;
  const auto run = over_seeds("resonant_sine", 1000, [](const auto& r, std::string& why) {
    why = describe(r);
    return r.detections.size() == 1 && r.detections[0].machine == "G4" &&
           near(r.detections[0].frequency_hz, 0.4);
  });
  const bool pass = resonant && run.passed >= 18 && run.max_elapsed < 5.0;
  line("A1", pass,
       fmt("resonant single source: %d/%d seeds exact (need >= 18); forcing 0.4 Hz vs mode "
           "%.4f Hz; max runtime %.3f s (limit 5 s)%s%s",
           run.passed, kSeeds, inter_area, run.max_elapsed, run.first_failure.empty() ? "" : "; ",
           run.first_failure.c_str()));
}

void a2() {
  const auto modes = modes_of("two_sources");
  const bool resonant = near_mode(0.4, modes, 0.03) && near_mode(1.6, modes, 0.03);
  const auto run = over_seeds("two_sources", 2000, [](const auto& r, std::string& why) {
    why = describe(r);
    if (r.detections.size() != 2) return false;
    auto has = [&](const char* m, double f) {
      return std::any_of(r.detections.begin(), r.detections.end(),
                         [&](const auto& d) { return d.machine == m && near(d.frequency_hz, f); });
    };
    return has("G3", 0.4) && has("G9", 1.6);
  });
  line("A2", resonant && run.passed >= 16,
       fmt("two sources: %d/%d seeds flag exactly {G3@0.4, G9@1.6} (need >= 16)%s%s", run.passed,
           kSeeds, run.first_failure.empty() ? "" : "; ", run.first_failure.c_str()));
}

void a3() {
  const auto run = over_seeds("rectangular", 3000, [](const auto& r, std::string& why) {
    why = describe(r);
    if (r.detections.empty()) return false;
    return std::all_of(r.detections.begin(), r.detections.end(), [](const auto& d) {
      if (d.machine != "G7") return false;
      for (int h = 1; h <= 13; h += 2) {
        if (near(d.frequency_hz, 0.2 * h)) return true;
      }
      return false;
    });
  });
  line("A3", run.passed >= 16,
       fmt("rectangular 0.2 Hz: %d/%d seeds flag only G7 at odd harmonics (need >= 16)%s%s",
           run.passed, kSeeds, run.first_failure.empty() ? "" : "; ", run.first_failure.c_str()));
}

void a4() {
  const auto run = over_seeds("frequency_switch", 4000, [](const auto& r, std::string& why) {
    why = describe(r);
    const auto g2 = std::find(r.labels.begin(), r.labels.end(), "G2") - r.labels.begin();
    if (r.zeta.size() == 0) return false;
    Vector flat(r.zeta.size());
    for (Eigen::Index i = 0; i < r.zeta.rows(); ++i) {
      flat.segment(i * r.zeta.cols(), r.zeta.cols()) = r.zeta.row(i).transpose();
    }
    const fosl::MadRule rule = fosl::mad_rule(flat);
    auto peak_at = [&](double f) {
      for (std::size_t i = 0; i < r.candidates_hz.size(); ++i) {
        if (near(r.candidates_hz[i], f) && rule.active &&
            r.zeta(static_cast<Eigen::Index>(i), g2) > rule.threshold) {
          return true;
        }
      }
      return false;
    };
    const bool flagged = std::any_of(r.detections.begin(), r.detections.end(),
                                     [](const auto& d) { return d.machine == "G2"; });
    return flagged && peak_at(0.25) && peak_at(0.35);
  });
  line("A4", run.passed >= 16,
       fmt("frequency switch 0.25->0.35 Hz: %d/%d seeds flag G2 with zeta above the MAD "
           "threshold at both frequencies (need >= 16)%s%s",
           run.passed, kSeeds, run.first_failure.empty() ? "" : "; ", run.first_failure.c_str()));
}

void a5() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const int trials = 200;
  const int rows = 120, features = 13, targets = 4;
  int exact = 0, noisy = 0;
  bool bounded = true;
  for (int t = 0; t < trials; ++t) {
    Matrix theta(rows, features);
    for (auto& x : theta.reshaped()) x = normal(rng);
    Matrix planted = Matrix::Zero(features, targets);
    const double sparsity = 0.6 + 0.3 * unit(rng);
    for (auto& x : planted.reshaped()) {
      if (unit(rng) >= sparsity) x = (unit(rng) < 0.5 ? -1.0 : 1.0) * (1e-3 + unit(rng));
    }
    const fosl::BoolMatrix mask = fosl::BoolMatrix::Constant(features, targets, true);
    const Matrix xdot = theta * planted;
    const auto clean = fosl::stlsq(theta, xdot, 1e-6, mask);
    const bool support = ((clean.xi.array() != 0.0) == (planted.array() != 0.0)).all();
    if (support && (clean.xi - planted).cwiseAbs().maxCoeff() < 1e-9) ++exact;
    bounded = bounded && clean.diagnostics.iterations <= clean.diagnostics.initial_support;

    Matrix noise(rows, targets);
    for (auto& x : noise.reshaped()) x = 1e-5 * normal(rng);
    const auto rough = fosl::stlsq(theta, xdot + noise, 1e-4, mask);
    if (((rough.xi.array() != 0.0) == (planted.array() != 0.0)).all()) ++noisy;
    bounded = bounded && rough.diagnostics.iterations <= rough.diagnostics.initial_support;
  }
  line("A5", exact == trials && noisy >= 195 && bounded,
       fmt("STLSQ planted models: noiseless exact %d/%d (need 200), noisy support %d/%d "
           "(need >= 195), iterations <= card(Xi0): %s",
           exact, trials, noisy, trials, bounded ? "yes" : "no"));
}

void a6() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  double worst_bin = 0.0, worst_parseval = 0.0;
  for (int m : {64, 255, 256, 1200}) {
    std::vector<double> x(static_cast<std::size_t>(m));
    for (auto& v : x) v = normal(rng);
    const auto spec = fosl::amplitude_spectrum(Eigen::Map<const Vector>(x.data(), m), 30.0);
    const auto ref = oracle::naive_amplitudes(x);
    for (std::size_t k = 0; k < ref.size(); ++k) {
      worst_bin = std::max(worst_bin, std::abs(ref[k] - spec.amplitudes(static_cast<Eigen::Index>(k))));
    }
    double energy = 0.0;
    for (double v : x) energy += v * v;
    const auto& a = spec.amplitudes;
    const Eigen::Index last = a.size() - 1;
    double from_spectrum = a(0) * a(0);
    for (Eigen::Index k = 1; k <= last; ++k) {
      const bool nyquist = m % 2 == 0 && k == last;
      from_spectrum += nyquist ? a(k) * a(k) : a(k) * a(k) / 2.0;
    }
    from_spectrum *= m;
    worst_parseval = std::max(worst_parseval, std::abs(from_spectrum - energy) / energy);
  }

  std::uniform_int_distribution<int> spikes(1, 4);
  std::uniform_real_distribution<double> unit;
  const fosl::ZScoreParams params;
  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    const int bins = 601;
    fosl::AmplitudeSpectrum s;
    s.bin_width = kBin;
    s.frequencies = Vector::LinSpaced(bins, 0.0, kBin * (bins - 1));
    s.amplitudes.resize(bins);
    for (auto& v : s.amplitudes) v = 1.0 + 0.3 * std::abs(normal(rng));
    const int count = spikes(rng);
    for (int k = 0; k < count; ++k) {
      const auto at = static_cast<Eigen::Index>(1 + unit(rng) * (bins - 2));
      s.amplitudes(at) *= 10.0 + 90.0 * unit(rng);
    }
    const auto got = fosl::zscore_peak_bins(s, params);
    const std::vector<double> amps(s.amplitudes.data(), s.amplitudes.data() + bins);
    const auto want = oracle::zscore_peaks(amps, params.lag, params.threshold, params.influence,
                                           params.direction == fosl::ScanDirection::Bidirectional);
    if (std::equal(got.begin(), got.end(), want.begin(), want.end(),
                   [](Eigen::Index a, std::size_t b) { return static_cast<std::size_t>(a) == b; })) {
      ++agree;
    }
  }
  line("A6", worst_bin < 1e-9 && worst_parseval < 1e-6 && agree >= 98,
       fmt("spectra: max |FFT - DFT| %.2e (limit 1e-9), Parseval rel err %.2e (limit 1e-6), "
           "z-score agreement %d/100 (need >= 98)",
           worst_bin, worst_parseval, agree));
}

void a7() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 60);
  std::uniform_real_distribution<double> unit;
  int agree = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    const int kind = t % 4;
    for (auto& x : v) {
      x = unit(rng);
      if (kind == 1 && unit(rng) < 0.6) x = 0.0;                   // zero-majority floors
      if (kind == 2 && unit(rng) < 0.1) x = 50.0 * unit(rng);      // heavy outliers
      if (kind == 3) x = std::floor(4.0 * x);                      // coarse ties
    }
    const auto got = fosl::mad_outlier_indices(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    const auto want = oracle::mad_flags(v);
    if (std::equal(got.begin(), got.end(), want.begin(), want.end(),
                   [](Eigen::Index a, std::size_t b) { return static_cast<std::size_t>(a) == b; })) {
      ++agree;
    }
  }
  line("A7", agree == 1000, fmt("MAD rule agreement %d/1000 (need 1000)", agree));
}

void a8() {
  // Equilibrium is a fixed point of the noise-free, unforced integrator.
  const auto sc = fixture::scenario("ambient");
  const auto model = sc.model.with_sigma_load(Vector::Zero(sc.model.machines()));
  const Vector eq = *sc.options.initial_angles;
  fosl::SimState s{0.0, eq, Vector::Zero(model.machines())};
  const double dt = fosl::default_internal_dt(30.0);
  const Vector zero = Vector::Zero(model.machines());
  double drift = 0.0;
  for (int k = 0; k < static_cast<int>(std::lround(40.0 / dt)); ++k) {
    s = fosl::step(s, dt, model, {}, zero);
    drift = std::max({drift, (s.delta - eq).cwiseAbs().maxCoeff(), s.omega.cwiseAbs().maxCoeff()});
  }

  // Jacobian against central differences at a perturbed point.
  const Vector at = eq + Vector::LinSpaced(model.machines(), -0.05, 0.07);
  const Matrix jac = fosl::electrical_power_jacobian(at, model);
  double jac_err = 0.0;
  const double h = 1e-6;
  for (int j = 0; j < model.machines(); ++j) {
    Vector up = at, down = at;
    up(j) += h;
    down(j) -= h;
    const Vector col = (fosl::electrical_power(up, model) - fosl::electrical_power(down, model)) / (2 * h);
    jac_err = std::max(jac_err, (col - jac.col(j)).cwiseAbs().maxCoeff());
  }

  // Two machines: the relative mode solves s^2 + d s + (K12/M1 + K21/M2) = 0.
  const fixture::TwoMachine p;
  const auto two = fixture::two_machine(p);
  const double d2 = fixture::two_machine_angle(p);
  const Vector eq2 = (Vector(2) << 0.0, d2).finished();
  const double k12 = p.e1 * p.e2 * p.y12 * std::sin(std::numbers::pi / 2 + d2);
  const double k21 = p.e1 * p.e2 * p.y12 * std::sin(std::numbers::pi / 2 - d2);
  const double w0sq = k12 / p.m1 + k21 / p.m2;
  const double analytic = std::sqrt(w0sq - p.d_per_m * p.d_per_m / 4.0) / (2 * std::numbers::pi);
  const auto two_modes = fosl::natural_modes(two, eq2);
  const double mode_err = two_modes.size() == 1 ? std::abs(two_modes[0].frequency_hz - analytic) : 1.0;

  // Seed determinism.
  const auto w1 = fixture::simulate("resonant_sine", 77);
  const auto w2 = fixture::simulate("resonant_sine", 77);
  const auto w3 = fixture::simulate("resonant_sine", 78);
  const bool same = w1.angles() == w2.angles() && w1.speeds() == w2.speeds();
  const bool differs = w1.speeds() != w3.speeds();

  line("A8", drift < 1e-9 && jac_err < 1e-6 && mode_err < 1e-9 && same && differs,
       fmt("simulator: equilibrium drift %.2e over 40 s (limit 1e-9), Jacobian FD err %.2e "
           "(limit 1e-6), two-machine mode err %.2e Hz (limit 1e-9), same seed bit-exact: %s, "
           "other seed differs: %s",
           drift, jac_err, mode_err, same ? "yes" : "no", differs ? "yes" : "no"));
}

void a9() {
  int no_candidates = 0;
  const auto run = over_seeds("ambient", 9000, [&](const auto& r, std::string& why) {
    why = describe(r);
    if (r.verdict == fosl::Verdict::NoCandidates) ++no_candidates;
    return r.detections.empty();
  });
  line("A9", run.passed >= 18,
       fmt("ambient only: %d/%d seeds without false flags (need >= 18), %d NoCandidates%s%s",
           run.passed, kSeeds, no_candidates, run.first_failure.empty() ? "" : "; ",
           run.first_failure.c_str()));
}

void a10() {
  const char* dir = std::getenv("FOSL_TASK_FORCE_DIR");
  if (!dir) {
    std::printf("A10 SKIP  optional external-data check: set FOSL_TASK_FORCE_DIR to run it\n");
    return;
  }
  // Expected layout: <dir>/<case>.csv in the documented CSV schema and
  // <dir>/expected.json {"<case>": {"machine": "...", "frequency_hz": f}, ...}.
  int total = 0, matched = 0;
  std::string detail;
  try {
    const auto expected = nlohmann::json::parse(fosl::read_text_file(std::string(dir) + "/expected.json"));
    for (const auto& [name, want] : expected.items()) {
      ++total;
      const auto window = fosl::load_pmu_csv(std::string(dir) + "/" + name + ".csv");
      const auto report = fosl::run_pipeline(window, fosl::PipelineConfig{});
      const bool ok = !report.detections.empty() &&
                      report.detections[0].machine == want.at("machine").get<std::string>();
      matched += ok ? 1 : 0;
      detail += fmt(" %s:%s", name.c_str(), ok ? "ok" : "miss");
    }
  } catch (const std::exception& e) {
    line("A10", false, std::string("external data: ") + e.what());
    return;
  }
  line("A10", total > 0 && matched == total,
       fmt("external cases matched %d/%d:%s", matched, total, detail.c_str()));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)()>> criteria = {
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
      {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}};
  for (const auto& [id, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      line(id, false, std::string("threw: ") + e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
