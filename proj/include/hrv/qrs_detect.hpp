#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "hrv/ecg_io.hpp"

namespace hrv {

struct DetectorConfig {
    double band_low_hz = 4.0;
    double band_high_hz = 30.0;
    double integration_window_ms = 150.0;
    double reset_timeout_s = 1.4;
    double zero_floor = 1e-12;
    double refractory_ms = 200.0;
    double twave_window_ms = 360.0;      // slope-ratio T-wave test inside this gap
    double searchback_window_ms = 100.0; // final peak snap window
    double potential_peak_window_ms = 200.0;
    double learning_period_s = 2.0;

    bool polarity_check = true;
    bool threshold_reset = true;
    bool zero_skip = true;
    bool searchback_on_bandpass = true;  // false: snap final peaks on the raw trace

    // Enhanced preset: 4-30 Hz band plus reset, zero-skip and bandpass snapping.
    static DetectorConfig enhanced() { return DetectorConfig{}; }
    // Classic preset for A/B runs: 5-15 Hz band, enhancements off.
    static DetectorConfig standard();

    void validate(double fs) const;
};

// Running decision thresholds. The I set lives on the moving-integration
// signal, the F set on the bandpassed signal.
struct DetectorThresholds {
    double I1 = 0.0, I2 = 0.0, SPKI = 0.0, NPKI = 0.0;
    double F1 = 0.0, F2 = 0.0, SPKF = 0.0, NPKF = 0.0;
};

struct FeatureSignals {
    std::vector<double> bandpassed;
    std::vector<double> derivative;
    std::vector<double> squared;
    std::vector<double> integrated;
    int delay_bandpass = 0;    // zero-phase filtering
    int delay_derivative = 0;  // centered stencil
    int delay_integrated = 0;  // causal moving mean, (W-1)/2
    bool polarity_flipped = false;
};

struct RPeakSeries {
    enum class Source { Raw, Bandpass };
    std::vector<int> indices;   // sample positions on the raw record
    std::vector<double> times;  // s, includes record t0
    Source source = Source::Bandpass;
};

// Dominant local maxima of the bandpassed signal, used by RR reconstruction.
struct PotentialPeaks {
    std::vector<int> indices;
    std::vector<double> times;  // s, includes record t0
};

struct ThresholdSnapshot {
    int index = 0;
    DetectorThresholds thresholds;
    enum class Event { Init, Accept, Noise, Searchback, Reset } event = Event::Init;
};

struct DetectionResult {
    RPeakSeries peaks;
    PotentialPeaks potential;
    FeatureSignals features;
    bool polarity_flipped = false;
    std::vector<ThresholdSnapshot> trajectory;
};

// Zero-phase (forward-backward) 4th-order recursive bandpass.
std::vector<double> bandpass(const EcgRecord& rec, const DetectorConfig& cfg);

// Flips the signal when the dominant deflection of the learning window is
// negative (|min| > 1.2 |max|; ties keep orientation).
std::pair<std::vector<double>, bool> check_polarity(std::vector<double> bandpassed,
                                                    double fs, double learning_period_s);

// Centered five-point derivative; exposed for oracle tests.
std::vector<double> derivative5(std::span<const double> x);
// Causal moving mean of the given window length in samples.
std::vector<double> moving_mean(std::span<const double> x, int window);

FeatureSignals feature_transform(std::span<const double> bandpassed, double fs,
                                 const DetectorConfig& cfg);

// I1 = Max_I / 3, I2 = 0.5 Mean_I, SPKI = I1, NPKI = I2; F set computed the
// same way on the bandpassed slice.
DetectorThresholds init_thresholds(std::span<const double> integrated_slice,
                                   std::span<const double> bandpassed_slice);

// Snaps each peak to the local maximum of `signal` within +-window/2,
// clipped at the ends; preserves order and the refractory gap.
RPeakSeries searchback_refine(const RPeakSeries& peaks, std::span<const double> signal,
                              double fs, double window_ms, double refractory_ms);

PotentialPeaks find_potential_peaks(std::span<const double> bandpassed, double fs,
                                    double window_ms, double t0 = 0.0);

DetectionResult detect(const EcgRecord& rec, const DetectorConfig& cfg = {});

void write_peaks_csv(std::ostream& out, const RPeakSeries& peaks);
RPeakSeries read_peaks_csv(std::istream& in);

// Greedy one-to-one matching of detected beats against ground truth.
struct DetectionMetrics {
    double sensitivity = 0.0;
    double ppv = 0.0;
    double mean_abs_error_ms = 0.0;
    int matched = 0;
    int missed = 0;
    int false_positives = 0;
};
DetectionMetrics match_beats(std::span<const double> truth_times,
                             std::span<const double> detected_times,
                             double tolerance_s = 0.05);

}  // namespace hrv
