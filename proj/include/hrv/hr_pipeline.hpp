#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hrv/rr_correct.hpp"

namespace hrv {

enum class LabelKind { Strong, Weak };
enum class HieGrade { Normal, Mild, Moderate, Severe, Inactive };

std::string to_string(LabelKind k);
std::string to_string(HieGrade g);
HieGrade grade_from_string(const std::string& s);

// Normal and mild grades map to class 0; moderate, severe and inactive to 1.
int binary_class(HieGrade g);

struct EpochAnnotation {
    int epoch_hour = 0;
    std::optional<HieGrade> grade;  // empty for weak labels
    int label = 0;                  // binary class
    LabelKind kind = LabelKind::Strong;
};

// Instantaneous RR tachogram sampled uniformly at 4 Hz.
struct HrSegment {
    std::vector<double> values;  // s
    double t0 = 0.0;
    int epoch_id = 0;
};

struct HrWindow {
    std::vector<double> values;  // 1200 samples
    int epoch_id = 0;
    int label = 0;
    LabelKind label_kind = LabelKind::Strong;
    bool normalized = false;
    double t0 = 0.0;
};

struct Normalizer {
    double p5 = 0.0;
    double p95 = 1.0;
};

struct PipelineConfig {
    double max_rr_s = 4.0;       // split threshold
    double window_s = 300.0;
    double overlap = 0.8;
    double sd_max = 0.12;        // window noise-rejection bound, s
    int min_windows_per_epoch = 10;
    double grid_hz = 4.0;
    double intermediate_hz = 256.0;
};

constexpr int kWindowSamples = 1200;

// Maximal runs free of excluded gaps and of intervals above max_rr; the
// offending intervals are dropped.
std::vector<RrSeries> split_on_gaps(const CorrectedRrSeries& series, double max_rr_s = 4.0);

// Two-step resampling: linear interpolation of the beat-time tachogram onto a
// 256 Hz grid, then a natural cubic spline onto the 4 Hz grid.
HrSegment resample_4hz(const RrSeries& seg, const PipelineConfig& cfg = {});

std::vector<HrWindow> make_windows(const HrSegment& seg, const PipelineConfig& cfg = {});

// Keeps windows whose population standard deviation is <= sd_max (seconds).
std::vector<HrWindow> reject_noisy(std::vector<HrWindow> windows, double sd_max = 0.12);

// Drops epochs with fewer than min_windows surviving windows.
std::vector<HrWindow> filter_epochs(std::vector<HrWindow> windows, int min_windows = 10);

// Percentiles use linear interpolation between order statistics, pooled over
// the training windows only.
Normalizer fit_normalizer(std::span<const HrWindow> train_windows);

HrWindow normalize(HrWindow w, const Normalizer& n);

// Linear-interpolation percentile of a value pool, p in [0, 1].
double percentile(std::vector<double> pool, double p);

// Fills hours between consecutive strong annotations that share a binary
// class; pairs with differing classes contribute nothing. Returns the
// combined strong + weak set sorted by hour.
std::vector<EpochAnnotation> propagate_weak_labels(std::vector<EpochAnnotation> strong);

void write_window_file(std::ostream& out, std::span<const HrWindow> windows);
std::vector<HrWindow> read_window_file(std::istream& in);

}  // namespace hrv
