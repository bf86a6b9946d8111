#include "hrv/rr_correct.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hrv/errors.hpp"

namespace hrv {

namespace {
constexpr double kExtremelyShortMax = 0.2;
constexpr double kShortMax = 2.0;
constexpr double kLongMax = 10.0;
}  // namespace

RrCategory classify_interval(double rr_s) {
    if (!(rr_s > 0.0)) throw DataError("classify_interval: RR interval must be positive");
    if (rr_s <= kExtremelyShortMax) return RrCategory::ExtremelyShort;
    if (rr_s <= kShortMax) return RrCategory::Short;
    if (rr_s <= kLongMax) return RrCategory::Long;
    return RrCategory::ExtremelyLong;
}

std::string to_string(RrAnnotation a) {
    switch (a) {
        case RrAnnotation::Original: return "original";
        case RrAnnotation::ReplacedMa: return "replaced_ma";
        case RrAnnotation::Reconstructed: return "reconstructed";
        case RrAnnotation::ExcludedGap: return "excluded_gap";
    }
    return "original";
}

RrAnnotation rr_annotation_from_string(const std::string& s) {
    if (s == "original") return RrAnnotation::Original;
    if (s == "replaced_ma") return RrAnnotation::ReplacedMa;
    if (s == "reconstructed") return RrAnnotation::Reconstructed;
    if (s == "excluded_gap") return RrAnnotation::ExcludedGap;
    throw DataError("unknown RR annotation: " + s);
}

RrSeries RrSeries::from_beat_times(std::vector<double> beat_times, double fs) {
    RrSeries s;
    s.fs = fs;
    s.beat_times = std::move(beat_times);
    if (s.beat_times.size() >= 2) {
        s.intervals.resize(s.beat_times.size() - 1);
        for (std::size_t i = 0; i + 1 < s.beat_times.size(); ++i)
            s.intervals[i] = s.beat_times[i + 1] - s.beat_times[i];
    }
    s.validate();
    return s;
}

RrSeries RrSeries::from_peaks(const RPeakSeries& peaks, double fs) {
    return from_beat_times(peaks.times, fs);
}

void RrSeries::validate() const {
    if (beat_times.size() >= 2 && intervals.size() != beat_times.size() - 1)
        throw DataError("RrSeries: interval count must be beat count - 1");
    for (std::size_t i = 0; i + 1 < beat_times.size(); ++i) {
        if (!(beat_times[i + 1] > beat_times[i]))
            throw DataError("RrSeries: beat times must be strictly increasing");
        if (std::abs(intervals[i] - (beat_times[i + 1] - beat_times[i])) > 1e-9)
            throw DataError("RrSeries: intervals inconsistent with beat times");
    }
    for (double rr : intervals)
        if (!(rr > 0.0)) throw DataError("RrSeries: intervals must be positive");
}

RrSeries CorrectedRrSeries::as_rr(double fs) const {
    RrSeries s;
    s.fs = fs;
    s.beat_times = beat_times;
    s.intervals = intervals;
    return s;
}

namespace {

// Trailing moving average over the corrected intervals seen so far. Seeded
// with the series-level mean so the first beats have a sane estimate.
class TrailingMean {
public:
    TrailingMean(double seed, int window) : seed_(seed), window_(window) {}

    double value() const {
        if (buf_.empty()) return seed_;
        return std::accumulate(buf_.begin(), buf_.end(), 0.0) / static_cast<double>(buf_.size());
    }
    void push(double rr) {
        buf_.push_back(rr);
        if (buf_.size() > static_cast<std::size_t>(window_)) buf_.pop_front();
    }

private:
    double seed_;
    int window_;
    std::deque<double> buf_;
};

double mean_of_short_intervals(std::span<const double> intervals) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double rr : intervals) {
        if (rr <= kShortMax) {
            sum += rr;
            ++count;
        }
    }
    if (count > 0) return sum / static_cast<double>(count);
    // All intervals are gaps; fall back to the plain mean.
    if (!intervals.empty())
        return std::accumulate(intervals.begin(), intervals.end(), 0.0) /
               static_cast<double>(intervals.size());
    return 0.0;
}

std::vector<double> rebuild_times(double t0, std::span<const double> intervals) {
    std::vector<double> times;
    times.reserve(intervals.size() + 1);
    times.push_back(t0);
    for (double rr : intervals) times.push_back(times.back() + rr);
    return times;
}

// Short-interval pass over a raw interval list. Returns corrected values and
// a replacement mask; only intervals <= 2 s feed the trailing average.
void short_pass(std::span<const double> intervals, double global_mean,
                const CorrectionConfig& cfg, std::vector<double>& out,
                std::vector<bool>& replaced) {
    out.assign(intervals.begin(), intervals.end());
    replaced.assign(intervals.size(), false);
    TrailingMean ma(global_mean, cfg.ma_window_beats);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double rr = out[i];
        if (rr > kShortMax) continue;  // long intervals handled elsewhere
        const double mean = cfg.outlier_rule_uses_global_mean ? global_mean : ma.value();
        if (rr <= kExtremelyShortMax || rr > cfg.short_outlier_factor * mean) {
            out[i] = ma.value();
            replaced[i] = true;
        }
        ma.push(out[i]);
    }
}

}  // namespace

RrSeries correct_short(const RrSeries& series, const CorrectionConfig& cfg) {
    if (series.intervals.empty()) throw DataError("correct_short: empty series");
    std::vector<double> fixed;
    std::vector<bool> replaced;
    short_pass(series.intervals, mean_of_short_intervals(series.intervals), cfg, fixed, replaced);
    RrSeries out;
    out.fs = series.fs;
    out.intervals = std::move(fixed);
    out.beat_times = rebuild_times(series.beat_times.front(), out.intervals);
    return out;
}

namespace {

// Subdivide one gap [t_a, t_b] at the candidate times strictly inside it.
// Greedy left-to-right merge drops candidates that would create a
// sub-interval below min_len; the trailing remainder merges backwards.
std::vector<double> subdivide_gap(double t_a, double t_b, std::span<const double> candidates,
                                  double min_len) {
    std::vector<double> cut_points;
    for (double c : candidates)
        if (c > t_a + 1e-12 && c < t_b - 1e-12) cut_points.push_back(c);
    if (cut_points.empty()) return {};

    std::vector<double> kept;
    double prev = t_a;
    for (double c : cut_points) {
        if (c - prev < min_len) continue;  // candidate dropped, merge forward
        kept.push_back(c);
        prev = c;
    }
    while (!kept.empty() && t_b - kept.back() < min_len) kept.pop_back();
    if (kept.empty()) return {};

    std::vector<double> subs;
    prev = t_a;
    for (double c : kept) {
        subs.push_back(c - prev);
        prev = c;
    }
    subs.push_back(t_b - prev);
    return subs;
}

}  // namespace

RrSeries reconstruct_long(const RrSeries& series, std::span<const double> candidate_times,
                          double global_mean_rr, const CorrectionConfig& cfg) {
    if (!(global_mean_rr > 0.0))
        throw DataError("reconstruct_long: global mean RR must be positive");
    const double min_len = cfg.min_sub_interval_factor * global_mean_rr;
    std::vector<double> out_intervals;
    for (std::size_t i = 0; i < series.intervals.size(); ++i) {
        const double rr = series.intervals[i];
        if (rr > kShortMax && rr <= kLongMax) {
            auto subs = subdivide_gap(series.beat_times[i], series.beat_times[i + 1],
                                      candidate_times, min_len);
            if (!subs.empty()) {
                out_intervals.insert(out_intervals.end(), subs.begin(), subs.end());
                continue;
            }
        }
        out_intervals.push_back(rr);
    }
    RrSeries out;
    out.fs = series.fs;
    out.intervals = std::move(out_intervals);
    out.beat_times = rebuild_times(series.beat_times.front(), out.intervals);
    return out;
}

CorrectedRrSeries correct(const RrSeries& series, const PotentialPeaks& pp,
                          const CorrectionConfig& cfg) {
    if (series.intervals.empty()) throw DataError("correct: empty series");
    series.validate();

    CorrectedRrSeries out;
    out.global_mean_rr = mean_of_short_intervals(series.intervals);

    std::vector<double> fixed;
    std::vector<bool> replaced;
    short_pass(series.intervals, out.global_mean_rr, cfg, fixed, replaced);

    const double min_len = cfg.min_sub_interval_factor * out.global_mean_rr;
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        const double rr = fixed[i];
        if (replaced[i]) {
            out.intervals.push_back(rr);
            out.annotations.push_back(RrAnnotation::ReplacedMa);
            continue;
        }
        if (rr > kLongMax) {
            out.intervals.push_back(rr);
            out.annotations.push_back(RrAnnotation::ExcludedGap);
            continue;
        }
        if (rr > kShortMax) {
            // Candidate times are located against the original beat grid.
            auto subs = subdivide_gap(series.beat_times[i], series.beat_times[i + 1],
                                      pp.times, min_len);
            if (!subs.empty()) {
                for (double s : subs) {
                    out.intervals.push_back(s);
                    out.annotations.push_back(RrAnnotation::Reconstructed);
                }
                continue;
            }
        }
        out.intervals.push_back(rr);
        out.annotations.push_back(RrAnnotation::Original);
    }

    out.beat_times = rebuild_times(series.beat_times.front(), out.intervals);
    return out;
}

void write_corrected_rr_csv(std::ostream& out, const CorrectedRrSeries& series) {
    out.precision(17);
    out << "beat_time_s,rr_s,annotation\n";
    for (std::size_t i = 0; i < series.intervals.size(); ++i)
        out << series.beat_times[i + 1] << "," << series.intervals[i] << ","
            << to_string(series.annotations[i]) << "\n";
}

CorrectedRrSeries read_corrected_rr_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.find("beat_time_s,rr_s,annotation") == std::string::npos)
        throw DataError("missing corrected RR header");
    CorrectedRrSeries s;
    std::vector<double> end_times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw DataError("malformed corrected RR row: " + line);
        end_times.push_back(std::stod(a));
        s.intervals.push_back(std::stod(b));
        s.annotations.push_back(rr_annotation_from_string(c));
    }
    if (!end_times.empty()) {
        s.beat_times.push_back(end_times.front() - s.intervals.front());
        s.beat_times.insert(s.beat_times.end(), end_times.begin(), end_times.end());
    }
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < s.intervals.size(); ++i) {
        if (s.intervals[i] <= kShortMax) {
            sum += s.intervals[i];
            ++cnt;
        }
    }
    if (cnt > 0) s.global_mean_rr = sum / static_cast<double>(cnt);
    return s;
}

}  // namespace hrv
