#pragma once

#include <span>
#include <string>
#include <vector>

#include "hrv/qrs_detect.hpp"

namespace hrv {

enum class RrCategory { ExtremelyShort, Short, Long, ExtremelyLong };

// ExtremelyShort: rr <= 0.2 s; Short: (0.2, 2]; Long: (2, 10]; ExtremelyLong: > 10.
RrCategory classify_interval(double rr_s);

enum class RrAnnotation { Original, ReplacedMa, Reconstructed, ExcludedGap };

std::string to_string(RrAnnotation a);
RrAnnotation rr_annotation_from_string(const std::string& s);

struct RrSeries {
    std::vector<double> beat_times;  // n+1 entries, strictly increasing, s
    std::vector<double> intervals;   // n entries, s
    double fs = 0.0;                 // provenance

    static RrSeries from_beat_times(std::vector<double> beat_times, double fs = 0.0);
    static RrSeries from_peaks(const RPeakSeries& peaks, double fs);
    void validate() const;
    double span_s() const { return beat_times.empty() ? 0.0 : beat_times.back() - beat_times.front(); }
};

struct CorrectedRrSeries {
    std::vector<double> beat_times;
    std::vector<double> intervals;
    std::vector<RrAnnotation> annotations;
    double global_mean_rr = 0.0;  // mean over original intervals <= 2 s

    RrSeries as_rr(double fs = 0.0) const;
};

struct CorrectionConfig {
    int ma_window_beats = 8;            // trailing moving-average width
    double short_outlier_factor = 2.05; // replace Short intervals above this x mean
    double min_sub_interval_factor = 0.6;  // discard reconstructed intervals below this x global mean
    bool outlier_rule_uses_global_mean = false;  // default: local trailing average
};

// Replaces ExtremelyShort intervals and Short outliers with the trailing
// moving-average estimate. Long and longer intervals pass through untouched.
RrSeries correct_short(const RrSeries& series, const CorrectionConfig& cfg = {});

// Subdivides each Long interval at candidate peak times inside it; candidates
// producing a sub-interval shorter than 0.6 x global mean are dropped and the
// neighbours merged.
RrSeries reconstruct_long(const RrSeries& series, std::span<const double> candidate_times,
                          double global_mean_rr, const CorrectionConfig& cfg = {});

// Full post-processing pass: classify, fix short intervals, reconstruct long
// ones, flag >10 s gaps for exclusion without modification.
CorrectedRrSeries correct(const RrSeries& series, const PotentialPeaks& pp,
                          const CorrectionConfig& cfg = {});

void write_corrected_rr_csv(std::ostream& out, const CorrectedRrSeries& series);
CorrectedRrSeries read_corrected_rr_csv(std::istream& in);

}  // namespace hrv
