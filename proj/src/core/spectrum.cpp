#include "fosl/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <tuple>

namespace fosl {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> dft_magnitudes(const Vector& x) {
  const int m = static_cast<int>(x.size());
  const int bins = m / 2 + 1;
  auto* in = static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(m)));
  auto* out = static_cast<fftw_complex*>(
      fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(bins)));
  if (!in || !out) {
    fftw_free(in);
    fftw_free(out);
    throw std::bad_alloc();
  }
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(m, in, out, FFTW_ESTIMATE);
  }
  std::copy(x.data(), x.data() + m, in);
  fftw_execute(plan);
  std::vector<double> mag(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) mag[static_cast<std::size_t>(k)] = std::hypot(out[k][0], out[k][1]);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return mag;
}

std::vector<bool> forward_scan(const std::vector<double>& y, const ZScoreParams& p) {
  const std::size_t n = y.size();
  const auto lag = static_cast<std::size_t>(p.lag);
  std::vector<bool> signal(n, false);
  if (n < lag) return signal;
  std::vector<double> filtered = y;
  auto stats = [&](std::size_t end) {  // over filtered[end - lag, end)
    double mean = 0.0;
    for (std::size_t k = end - lag; k < end; ++k) mean += filtered[k];
    mean /= static_cast<double>(lag);
    double var = 0.0;
    for (std::size_t k = end - lag; k < end; ++k) var += (filtered[k] - mean) * (filtered[k] - mean);
    return std::pair{mean, std::sqrt(var / static_cast<double>(lag))};
  };
  auto [mean, sd] = stats(lag);
  for (std::size_t i = lag; i < n; ++i) {
    const double excess = y[i] - mean;
    // The relative floor keeps round-off on an exactly flat spectrum from signaling.
    if (excess > p.threshold * sd && excess > 1e-12 * std::abs(mean)) {
      signal[i] = true;
      filtered[i] = p.influence * y[i] + (1.0 - p.influence) * filtered[i - 1];
    }
    std::tie(mean, sd) = stats(i + 1);
  }
  return signal;
}

void check_params(const ZScoreParams& p) {
  if (p.lag < 2) throw Error(ErrorCode::InvalidArgument, "z-score lag must be >= 2");
  if (!(p.threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "z-score threshold must be > 0");
  if (!(p.influence >= 0.0 && p.influence <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "z-score influence must lie in [0, 1]");
  }
}

}  // namespace

AmplitudeSpectrum amplitude_spectrum(const Vector& samples, double sample_rate,
                                     std::string channel) {
  const Eigen::Index m = samples.size();
  if (m < 4) throw Error(ErrorCode::TooShort, "spectrum needs at least 4 samples");
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  const std::vector<double> mag = dft_magnitudes(samples);
  const auto bins = static_cast<Eigen::Index>(mag.size());
  AmplitudeSpectrum s;
  s.channel = std::move(channel);
  s.bin_width = sample_rate / static_cast<double>(m);
  s.frequencies.resize(bins);
  s.amplitudes.resize(bins);
  const double md = static_cast<double>(m);
  for (Eigen::Index k = 0; k < bins; ++k) {
    s.frequencies(k) = static_cast<double>(k) * s.bin_width;
    const bool single = k == 0 || (m % 2 == 0 && k == bins - 1);
    s.amplitudes(k) = (single ? 1.0 : 2.0) * mag[static_cast<std::size_t>(k)] / md;
  }
  return s;
}

std::vector<bool> zscore_signals(const Vector& amplitudes, const ZScoreParams& params) {
  check_params(params);
  const Eigen::Index bins = amplitudes.size();
  const std::size_t n = bins > 1 ? static_cast<std::size_t>(bins - 1) : 0;
  if (n < static_cast<std::size_t>(params.lag)) {
    throw Error(ErrorCode::SpectrumTooShort, "spectrum has " + std::to_string(n) +
                                                 " non-DC bins, fewer than lag " +
                                                 std::to_string(params.lag));
  }
  std::vector<double> y(amplitudes.data() + 1, amplitudes.data() + bins);
  const std::vector<bool> fwd = forward_scan(y, params);
  if (params.direction == ScanDirection::Forward) return fwd;

  std::vector<double> rev(y.rbegin(), y.rend());
  std::vector<bool> bwd = forward_scan(rev, params);
  std::reverse(bwd.begin(), bwd.end());
  const std::size_t lag = static_cast<std::size_t>(params.lag);
  std::vector<bool> out(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const bool has_fwd = i >= lag;
    const bool has_bwd = i + lag < n;
    if (has_fwd && has_bwd) {
      out[i] = fwd[i] && bwd[i];
    } else if (has_fwd) {
      out[i] = fwd[i];
    } else {
      out[i] = bwd[i];
    }
  }
  return out;
}

std::vector<Eigen::Index> zscore_peak_bins(const AmplitudeSpectrum& spectrum,
                                           const ZScoreParams& params) {
  const std::vector<bool> sig = zscore_signals(spectrum.amplitudes, params);
  std::vector<Eigen::Index> peaks;
  const std::size_t n = sig.size();
  for (std::size_t i = 0; i < n;) {
    if (!sig[i]) {
      ++i;
      continue;
    }
    std::size_t best = i;
    std::size_t j = i;
    for (; j < n && sig[j]; ++j) {
      if (spectrum.amplitudes(static_cast<Eigen::Index>(j + 1)) >
          spectrum.amplitudes(static_cast<Eigen::Index>(best + 1))) {
        best = j;
      }
    }
    peaks.push_back(static_cast<Eigen::Index>(best + 1));
    i = j;
  }
  return peaks;
}

std::vector<double> zscore_peaks(const AmplitudeSpectrum& spectrum, const ZScoreParams& params) {
  std::vector<double> out;
  for (Eigen::Index k : zscore_peak_bins(spectrum, params)) out.push_back(spectrum.frequencies(k));
  return out;
}

std::vector<AmplitudeSpectrum> channel_spectra(const MeasurementWindow& window,
                                               ScanChannels channels) {
  std::vector<AmplitudeSpectrum> out;
  const double fs = window.sample_rate();
  const auto& labels = window.labels();
  if (channels != ScanChannels::Speed) {
    for (Eigen::Index j = 0; j < window.machines(); ++j) {
      out.push_back(amplitude_spectrum(window.angles().col(j), fs,
                                       labels[static_cast<std::size_t>(j)] + ":angle"));
    }
  }
  if (channels != ScanChannels::Angle) {
    for (Eigen::Index j = 0; j < window.machines(); ++j) {
      out.push_back(amplitude_spectrum(window.speeds().col(j), fs,
                                       labels[static_cast<std::size_t>(j)] + ":speed"));
    }
  }
  return out;
}

std::vector<PeakDetection> scan_peaks(const std::vector<AmplitudeSpectrum>& spectra,
                                      const ZScoreParams& params) {
  std::vector<PeakDetection> out;
  for (const auto& s : spectra) {
    for (Eigen::Index k : zscore_peak_bins(s, params)) {
      out.push_back({s.frequencies(k), s.amplitudes(k), s.channel});
    }
  }
  return out;
}

FrequencyCandidateSet aggregate_candidates(const std::vector<PeakDetection>& detections,
                                           std::size_t channel_count, double bin_width,
                                           double sample_rate, const CandidateParams& params) {
  if (params.policy == Aggregation::Intersection &&
      !(params.quorum > 0.0 && params.quorum <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quorum must lie in (0, 1]");
  }
  const double tol = bin_width * (1.0 + 1e-9);
  std::vector<PeakDetection> sorted = detections;
  std::sort(sorted.begin(), sorted.end(), [](const PeakDetection& a, const PeakDetection& b) {
    if (a.amplitude != b.amplitude) return a.amplitude > b.amplitude;
    if (a.frequency_hz != b.frequency_hz) return a.frequency_hz < b.frequency_hz;
    return a.channel < b.channel;
  });
  std::vector<double> kept;
  for (const auto& d : sorted) {
    // A Nyquist-bin peak cannot be represented by a sin/cos pair.
    if (!(d.frequency_hz < sample_rate / 2.0)) continue;
    const bool near = std::any_of(kept.begin(), kept.end(),
                                  [&](double f) { return std::abs(f - d.frequency_hz) <= tol; });
    if (!near) kept.push_back(d.frequency_hz);
  }
  if (params.policy == Aggregation::Intersection) {
    std::vector<double> quorate;
    for (double f : kept) {
      std::vector<std::string> support;
      for (const auto& d : detections) {
        if (std::abs(d.frequency_hz - f) <= tol &&
            std::find(support.begin(), support.end(), d.channel) == support.end()) {
          support.push_back(d.channel);
        }
      }
      if (static_cast<double>(support.size()) >=
          params.quorum * static_cast<double>(channel_count) - 1e-12) {
        quorate.push_back(f);
      }
    }
    kept = std::move(quorate);
  }
  return FrequencyCandidateSet(std::move(kept), bin_width, sample_rate);
}

FrequencyCandidateSet candidate_frequencies(const MeasurementWindow& window,
                                            const CandidateParams& params) {
  const auto spectra = channel_spectra(window, params.channels);
  const double bw = window.sample_rate() / static_cast<double>(window.samples());
  auto set = aggregate_candidates(scan_peaks(spectra, params.zscore), spectra.size(), bw,
                                  window.sample_rate(), params);
  if (set.empty()) {
    throw Error(ErrorCode::NoCandidates, "no spectral peak passed the z-score test");
  }
  return set;
}

}  // namespace fosl
