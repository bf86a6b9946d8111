#include "hrv/hr_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "hrv/errors.hpp"

namespace hrv {

std::string to_string(LabelKind k) { return k == LabelKind::Strong ? "strong" : "weak"; }

std::string to_string(HieGrade g) {
    switch (g) {
        case HieGrade::Normal: return "normal";
        case HieGrade::Mild: return "mild";
        case HieGrade::Moderate: return "moderate";
        case HieGrade::Severe: return "severe";
        case HieGrade::Inactive: return "inactive";
    }
    return "normal";
}

HieGrade grade_from_string(const std::string& s) {
    if (s == "normal") return HieGrade::Normal;
    if (s == "mild") return HieGrade::Mild;
    if (s == "moderate") return HieGrade::Moderate;
    if (s == "severe") return HieGrade::Severe;
    if (s == "inactive") return HieGrade::Inactive;
    throw DataError("unknown HIE grade: " + s);
}

int binary_class(HieGrade g) {
    return (g == HieGrade::Normal || g == HieGrade::Mild) ? 0 : 1;
}

std::vector<RrSeries> split_on_gaps(const CorrectedRrSeries& series, double max_rr_s) {
    std::vector<RrSeries> segments;
    std::vector<double> times;
    auto flush = [&]() {
        if (times.size() >= 2) segments.push_back(RrSeries::from_beat_times(times));
        times.clear();
    };
    for (std::size_t i = 0; i < series.intervals.size(); ++i) {
        const bool bad = series.intervals[i] > max_rr_s ||
                         series.annotations[i] == RrAnnotation::ExcludedGap;
        if (bad) {
            flush();
            continue;
        }
        if (times.empty()) times.push_back(series.beat_times[i]);
        times.push_back(series.beat_times[i + 1]);
    }
    flush();
    return segments;
}

namespace {

// Natural cubic spline through (x_i, y_i) with zero second derivative at the
// ends. Standard tridiagonal solve for the second derivatives.
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        m_.assign(n, 0.0);
        if (n < 3) return;
        std::vector<double> diag(n, 2.0), rhs(n, 0.0), sub(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1];
            const double h1 = x_[i + 1] - x_[i];
            sub[i] = h0 / (h0 + h1);
            rhs[i] = 6.0 / (h0 + h1) *
                     ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        // Thomas algorithm on the interior rows; natural ends stay zero.
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double upper = 1.0 - sub[i];
            const double denom = diag[i] - sub[i] * c[i - 1];
            c[i] = upper / denom;
            d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = d[i] - c[i] * m_[i + 1];
            if (i == 1) break;
        }
    }

    double eval(double t) const {
        const std::size_t n = x_.size();
        if (t <= x_.front()) return y_.front();
        if (t >= x_.back()) return y_.back();
        const std::size_t hi =
            static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
        const std::size_t lo = hi - 1;
        const double h = x_[hi] - x_[lo];
        const double a = (x_[hi] - t) / h;
        const double b = (t - x_[lo]) / h;
        return a * y_[lo] + b * y_[hi] +
               ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * h * h / 6.0;
    }

private:
    std::vector<double> x_, y_, m_;
};

double linear_interp(std::span<const double> xs, std::span<const double> ys, double t) {
    if (t <= xs.front()) return ys.front();
    if (t >= xs.back()) return ys.back();
    const std::size_t hi =
        static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), t) - xs.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
}

}  // namespace

HrSegment resample_4hz(const RrSeries& seg, const PipelineConfig& cfg) {
    if (seg.beat_times.size() < 2 || seg.span_s() < 1.0)
        throw DataError("resample_4hz: segment spans less than 1 s");

    // Tachogram abscissa: each interval anchored at its ending beat.
    std::vector<double> xs(seg.intervals.size()), ys(seg.intervals.size());
    for (std::size_t i = 0; i < seg.intervals.size(); ++i) {
        xs[i] = seg.beat_times[i + 1];
        ys[i] = seg.intervals[i];
    }
    if (xs.size() == 1) {
        xs.push_back(xs[0] + 1.0);
        ys.push_back(ys[0]);
    }

    const double t_begin = seg.beat_times.front();
    const double t_end = seg.beat_times.back();

    // Step 1: dense linear interpolation at 256 Hz.
    const double dt = 1.0 / cfg.intermediate_hz;
    const std::size_t n_dense =
        static_cast<std::size_t>(std::floor((t_end - t_begin) / dt)) + 1;
    std::vector<double> dense_x(n_dense), dense_y(n_dense);
    for (std::size_t i = 0; i < n_dense; ++i) {
        dense_x[i] = t_begin + static_cast<double>(i) * dt;
        dense_y[i] = linear_interp(xs, ys, dense_x[i]);
    }

    // Step 2: natural cubic spline down to the 4 Hz grid.
    CubicSpline spline(std::move(dense_x), std::move(dense_y));
    const double step = 1.0 / cfg.grid_hz;
    HrSegment out;
    out.t0 = t_begin;
    const std::size_t n_out =
        static_cast<std::size_t>(std::floor((t_end - t_begin) / step)) + 1;
    out.values.resize(n_out);
    for (std::size_t i = 0; i < n_out; ++i)
        out.values[i] = spline.eval(t_begin + static_cast<double>(i) * step);
    return out;
}

std::vector<HrWindow> make_windows(const HrSegment& seg, const PipelineConfig& cfg) {
    if (!(cfg.overlap >= 0.0 && cfg.overlap < 1.0))
        throw ConfigError("make_windows: overlap must lie in [0, 1)");
    const int win = static_cast<int>(std::lround(cfg.window_s * cfg.grid_hz));
    const int stride = static_cast<int>(std::lround(cfg.window_s * (1.0 - cfg.overlap) * cfg.grid_hz));
    std::vector<HrWindow> out;
    const long n = static_cast<long>(seg.values.size());
    for (long start = 0; start + win <= n; start += stride) {
        HrWindow w;
        w.epoch_id = seg.epoch_id;
        w.t0 = seg.t0 + static_cast<double>(start) / cfg.grid_hz;
        w.values.assign(seg.values.begin() + start, seg.values.begin() + start + win);
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<HrWindow> reject_noisy(std::vector<HrWindow> windows, double sd_max) {
    std::vector<HrWindow> kept;
    for (auto& w : windows) {
        if (w.normalized) throw DataError("reject_noisy: expects unnormalized windows");
        double mean = 0.0;
        for (double v : w.values) mean += v;
        mean /= static_cast<double>(w.values.size());
        double var = 0.0;
        for (double v : w.values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(w.values.size());
        if (std::sqrt(var) <= sd_max) kept.push_back(std::move(w));
    }
    return kept;
}

std::vector<HrWindow> filter_epochs(std::vector<HrWindow> windows, int min_windows) {
    std::map<int, int> counts;
    for (const auto& w : windows) ++counts[w.epoch_id];
    std::vector<HrWindow> kept;
    for (auto& w : windows)
        if (counts[w.epoch_id] >= min_windows) kept.push_back(std::move(w));
    return kept;
}

double percentile(std::vector<double> pool, double p) {
    if (pool.empty()) throw DataError("percentile: empty pool");
    std::sort(pool.begin(), pool.end());
    const double h = p * static_cast<double>(pool.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= pool.size()) return pool.back();
    const double frac = h - static_cast<double>(lo);
    return pool[lo] + frac * (pool[lo + 1] - pool[lo]);
}

Normalizer fit_normalizer(std::span<const HrWindow> train_windows) {
    std::vector<double> pool;
    for (const auto& w : train_windows)
        pool.insert(pool.end(), w.values.begin(), w.values.end());
    if (pool.size() < 2) throw DataError("fit_normalizer: need at least 2 values");
    Normalizer n;
    n.p5 = percentile(pool, 0.05);
    n.p95 = percentile(pool, 0.95);
    if (!(n.p5 < n.p95)) throw DataError("fit_normalizer: degenerate percentiles (p5 == p95)");
    return n;
}

HrWindow normalize(HrWindow w, const Normalizer& n) {
    if (!(n.p5 < n.p95)) throw DataError("normalize: invalid normalizer");
    const double scale = 1.0 / (n.p95 - n.p5);
    for (double& v : w.values) v = (v - n.p5) * scale;
    w.normalized = true;
    return w;
}

std::vector<EpochAnnotation> propagate_weak_labels(std::vector<EpochAnnotation> strong) {
    std::sort(strong.begin(), strong.end(),
              [](const EpochAnnotation& a, const EpochAnnotation& b) {
                  return a.epoch_hour < b.epoch_hour;
              });
    std::vector<EpochAnnotation> out = strong;
    for (std::size_t i = 0; i + 1 < strong.size(); ++i) {
        const auto& a = strong[i];
        const auto& b = strong[i + 1];
        if (a.label != b.label) continue;  // undetermined, excluded
        for (int h = a.epoch_hour + 1; h < b.epoch_hour; ++h) {
            EpochAnnotation w;
            w.epoch_hour = h;
            w.label = a.label;
            w.kind = LabelKind::Weak;
            out.push_back(w);
        }
    }
    std::sort(out.begin(), out.end(), [](const EpochAnnotation& a, const EpochAnnotation& b) {
        return a.epoch_hour < b.epoch_hour;
    });
    return out;
}

void write_window_file(std::ostream& out, std::span<const HrWindow> windows) {
    out.precision(17);
    out << "epoch_id,label,label_kind\n";
    for (const auto& w : windows) {
        out << w.epoch_id << "," << w.label << "," << to_string(w.label_kind) << "\n";
        for (std::size_t i = 0; i < w.values.size(); ++i) {
            if (i) out << ",";
            out << w.values[i];
        }
        out << "\n";
    }
}

std::vector<HrWindow> read_window_file(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.find("epoch_id,label,label_kind") == std::string::npos)
        throw DataError("missing window file header");
    std::vector<HrWindow> windows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream meta(line);
        std::string a, b, c;
        if (!std::getline(meta, a, ',') || !std::getline(meta, b, ',') || !std::getline(meta, c))
            throw DataError("malformed window metadata row: " + line);
        HrWindow w;
        w.epoch_id = std::stoi(a);
        w.label = std::stoi(b);
        w.label_kind = (c == "weak") ? LabelKind::Weak : LabelKind::Strong;
        if (!std::getline(in, line)) throw DataError("window file truncated after metadata row");
        std::istringstream vals(line);
        std::string tok;
        while (std::getline(vals, tok, ',')) w.values.push_back(std::stod(tok));
        if (w.values.size() != kWindowSamples)
            throw DataError("window row must carry " + std::to_string(kWindowSamples) + " values");
        windows.push_back(std::move(w));
    }
    return windows;
}

}  // namespace hrv
