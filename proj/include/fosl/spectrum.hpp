// Single-sided amplitude spectra and forcing-frequency candidate extraction.
#pragma once

#include "fosl/types.hpp"

#include <string>
#include <vector>

namespace fosl {

struct AmplitudeSpectrum {
  Vector frequencies;  // Hz, bin k at k * sample_rate / m, DC to Nyquist
  Vector amplitudes;
  std::string channel;
  double bin_width = 0.0;
};

// 2|X_k|/m for interior bins, |X_k|/m for DC and the even-m Nyquist bin.
// Throws TooShort below 4 samples.
AmplitudeSpectrum amplitude_spectrum(const Vector& samples, double sample_rate,
                                     std::string channel = {});

enum class ScanDirection {
  Forward,        // classic trailing-window smoothed z-score
  Bidirectional,  // also scans high-to-low so bins below the lag are reachable
};

struct ZScoreParams {
  int lag = 16;
  double threshold = 8.0;
  double influence = 0.1;
  ScanDirection direction = ScanDirection::Bidirectional;
};

// Per-bin signal flags over bins 1..N-1 of the amplitude array (DC skipped);
// element k of the result refers to bin k + 1.
std::vector<bool> zscore_signals(const Vector& amplitudes, const ZScoreParams& params);

// Peak bin indices (into the spectrum, DC = 0), one per run of contiguous
// signaled bins, at the run's largest amplitude. Throws SpectrumTooShort
// when there are fewer non-DC bins than the lag.
std::vector<Eigen::Index> zscore_peak_bins(const AmplitudeSpectrum& spectrum,
                                           const ZScoreParams& params);
std::vector<double> zscore_peaks(const AmplitudeSpectrum& spectrum, const ZScoreParams& params);

enum class Aggregation { Union, Intersection };
enum class ScanChannels { Speed, Angle, Both };

struct CandidateParams {
  ZScoreParams zscore;
  Aggregation policy = Aggregation::Union;
  double quorum = 0.25;  // Intersection: minimum fraction of channels with the peak
  ScanChannels channels = ScanChannels::Speed;
};

struct PeakDetection {
  double frequency_hz = 0.0;
  double amplitude = 0.0;
  std::string channel;
};

std::vector<AmplitudeSpectrum> channel_spectra(const MeasurementWindow& window,
                                               ScanChannels channels);

std::vector<PeakDetection> scan_peaks(const std::vector<AmplitudeSpectrum>& spectra,
                                      const ZScoreParams& params);

// Merges detections within one bin width of a stronger one and applies the
// aggregation policy. May return an empty set.
FrequencyCandidateSet aggregate_candidates(const std::vector<PeakDetection>& detections,
                                           std::size_t channel_count, double bin_width,
                                           double sample_rate, const CandidateParams& params);

// Throws NoCandidates when nothing survives aggregation.
FrequencyCandidateSet candidate_frequencies(const MeasurementWindow& window,
                                            const CandidateParams& params);

}  // namespace fosl
