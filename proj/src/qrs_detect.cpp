#include "hrv/qrs_detect.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hrv/errors.hpp"

namespace hrv {

DetectorConfig DetectorConfig::standard() {
    DetectorConfig cfg;
    cfg.band_low_hz = 5.0;
    cfg.band_high_hz = 15.0;
    cfg.polarity_check = false;
    cfg.threshold_reset = false;
    cfg.zero_skip = false;
    cfg.searchback_on_bandpass = false;
    return cfg;
}

void DetectorConfig::validate(double fs) const {
    if (!(fs > 0.0)) throw ConfigError("detector: sampling rate must be positive");
    if (!(band_low_hz > 0.0) || !(band_low_hz < band_high_hz) || !(band_high_hz < fs / 2.0))
        throw ConfigError("detector: need 0 < band_low < band_high < fs/2");
    if (!(reset_timeout_s > 0.0)) throw ConfigError("detector: reset_timeout must be positive");
    if (!(integration_window_ms > 0.0) || !(refractory_ms > 0.0) ||
        !(searchback_window_ms > 0.0) || !(learning_period_s > 0.0))
        throw ConfigError("detector: window parameters must be positive");
}

namespace {

struct Biquad {
    double b0, b1, b2, a1, a2;  // y = b0 x + b1 x1 + b2 x2 - a1 y1 - a2 y2
};

Biquad butterworth_lowpass(double fc, double fs) {
    const double c = 1.0 / std::tan(M_PI * fc / fs);
    const double k = 1.0 / (1.0 + std::sqrt(2.0) * c + c * c);
    return {k, 2.0 * k, k, 2.0 * k * (1.0 - c * c), k * (1.0 - std::sqrt(2.0) * c + c * c)};
}

Biquad butterworth_highpass(double fc, double fs) {
    const double c = std::tan(M_PI * fc / fs);
    const double k = 1.0 / (1.0 + std::sqrt(2.0) * c + c * c);
    return {k, -2.0 * k, k, 2.0 * k * (c * c - 1.0), k * (1.0 - std::sqrt(2.0) * c + c * c)};
}

void filter_inplace(std::vector<double>& x, const Biquad& q) {
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (double& v : x) {
        const double y = q.b0 * v + q.b1 * x1 + q.b2 * x2 - q.a1 * y1 - q.a2 * y2;
        x2 = x1;
        x1 = v;
        y2 = y1;
        y1 = y;
        v = y;
    }
}

// Forward-backward filtering with odd-reflection padding at both ends.
std::vector<double> filtfilt(std::span<const double> x, const Biquad& q, std::size_t padlen) {
    const std::size_t n = x.size();
    padlen = std::min(padlen, n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 2; i <= padlen + 1; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - (i - 1)]);

    filter_inplace(ext, q);
    std::reverse(ext.begin(), ext.end());
    filter_inplace(ext, q);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + static_cast<long>(padlen),
                               ext.begin() + static_cast<long>(padlen + n));
}

}  // namespace

std::vector<double> bandpass(const EcgRecord& rec, const DetectorConfig& cfg) {
    cfg.validate(rec.fs);
    if (rec.samples.size() < 8) throw DataError("bandpass: record shorter than filter warm-up");
    const std::size_t padlen = static_cast<std::size_t>(std::lround(rec.fs));
    std::vector<double> y = filtfilt(rec.samples, butterworth_highpass(cfg.band_low_hz, rec.fs), padlen);
    y = filtfilt(y, butterworth_lowpass(cfg.band_high_hz, rec.fs), padlen);
    return y;
}

std::pair<std::vector<double>, bool> check_polarity(std::vector<double> bandpassed,
                                                    double fs, double learning_period_s) {
    const std::size_t n =
        std::min(bandpassed.size(),
                 static_cast<std::size_t>(std::lround(learning_period_s * fs)));
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, bandpassed[i]);
        hi = std::max(hi, bandpassed[i]);
    }
    const bool flip = std::abs(lo) > 1.2 * std::abs(hi);
    if (flip)
        for (double& v : bandpassed) v = -v;
    return {std::move(bandpassed), flip};
}

std::vector<double> derivative5(std::span<const double> x) {
    const long n = static_cast<long>(x.size());
    std::vector<double> d(x.size(), 0.0);
    auto at = [&](long i) { return x[static_cast<std::size_t>(std::clamp(i, 0L, n - 1))]; };
    for (long i = 0; i < n; ++i)
        d[static_cast<std::size_t>(i)] =
            (-at(i - 2) - 2.0 * at(i - 1) + 2.0 * at(i + 1) + at(i + 2)) / 8.0;
    return d;
}

std::vector<double> moving_mean(std::span<const double> x, int window) {
    if (window < 1) throw ConfigError("moving_mean: window must be >= 1 sample");
    if (static_cast<std::size_t>(window) > x.size())
        throw DataError("moving_mean: window longer than signal");
    std::vector<double> y(x.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += x[i];
        if (i >= static_cast<std::size_t>(window)) acc -= x[i - static_cast<std::size_t>(window)];
        const double den = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
        y[i] = acc / static_cast<double>(den);
    }
    return y;
}

FeatureSignals feature_transform(std::span<const double> bandpassed, double fs,
                                 const DetectorConfig& cfg) {
    FeatureSignals f;
    f.bandpassed.assign(bandpassed.begin(), bandpassed.end());
    f.derivative = derivative5(bandpassed);
    f.squared.resize(f.derivative.size());
    std::transform(f.derivative.begin(), f.derivative.end(), f.squared.begin(),
                   [](double v) { return v * v; });
    const int w = std::max(1, static_cast<int>(std::lround(cfg.integration_window_ms * fs / 1000.0)));
    f.integrated = moving_mean(f.squared, w);
    f.delay_bandpass = 0;
    f.delay_derivative = 0;
    f.delay_integrated = (w - 1) / 2;
    return f;
}

DetectorThresholds init_thresholds(std::span<const double> integrated_slice,
                                   std::span<const double> bandpassed_slice) {
    auto stats = [](std::span<const double> s) {
        double mx = 0.0, mean = 0.0;
        for (double v : s) {
            mx = std::max(mx, v);
            mean += v;
        }
        if (!s.empty()) mean /= static_cast<double>(s.size());
        return std::pair<double, double>(mx, mean);
    };
    DetectorThresholds th;
    auto [max_i, mean_i] = stats(integrated_slice);
    th.I1 = max_i / 3.0;
    th.I2 = 0.5 * mean_i;
    th.SPKI = th.I1;
    th.NPKI = th.I2;
    auto [max_f, mean_f] = stats(bandpassed_slice);
    th.F1 = max_f / 3.0;
    th.F2 = 0.5 * mean_f;
    th.SPKF = th.F1;
    th.NPKF = th.F2;
    return th;
}

namespace {

void recompute(DetectorThresholds& th) {
    th.I1 = th.NPKI + 0.25 * (th.SPKI - th.NPKI);
    th.I2 = 0.5 * th.I1;
    th.F1 = th.NPKF + 0.25 * (th.SPKF - th.NPKF);
    th.F2 = 0.5 * th.F1;
}

struct Candidate {
    int idx;        // integration-signal index
    int bp_idx;     // aligned bandpass index
    double peak_i;  // integrated amplitude
    double peak_f;  // bandpassed amplitude
    double slope;   // max |derivative| near the candidate
};

}  // namespace

PotentialPeaks find_potential_peaks(std::span<const double> bandpassed, double fs,
                                    double window_ms, double t0) {
    PotentialPeaks pp;
    const long n = static_cast<long>(bandpassed.size());
    const long half = std::max(1L, std::lround(window_ms * fs / 2000.0));
    for (long i = 1; i + 1 < n; ++i) {
        const double v = bandpassed[static_cast<std::size_t>(i)];
        if (!(v > bandpassed[static_cast<std::size_t>(i - 1)]) ||
            !(v >= bandpassed[static_cast<std::size_t>(i + 1)]))
            continue;
        if (v <= 0.0) continue;
        bool dominant = true;
        const long j0 = std::max(0L, i - half), j1 = std::min(n - 1, i + half);
        for (long j = j0; j <= j1 && dominant; ++j)
            if (bandpassed[static_cast<std::size_t>(j)] > v) dominant = false;
        if (dominant) {
            pp.indices.push_back(static_cast<int>(i));
            pp.times.push_back(t0 + static_cast<double>(i) / fs);
        }
    }
    return pp;
}

RPeakSeries searchback_refine(const RPeakSeries& peaks, std::span<const double> signal,
                              double fs, double window_ms, double refractory_ms) {
    const long n = static_cast<long>(signal.size());
    const long half = std::lround(window_ms * fs / 2000.0);
    const long refr = std::lround(refractory_ms * fs / 1000.0);
    RPeakSeries out;
    out.source = peaks.source;
    for (std::size_t k = 0; k < peaks.indices.size(); ++k) {
        const long p = peaks.indices[k];
        if (p < 0 || p >= n) throw DataError("searchback_refine: peak outside signal bounds");
        const long j0 = std::max(0L, p - half), j1 = std::min(n - 1, p + half);
        long best = j0;
        for (long j = j0 + 1; j <= j1; ++j)
            if (signal[static_cast<std::size_t>(j)] > signal[static_cast<std::size_t>(best)])
                best = j;
        const double t = peaks.times.empty()
                             ? static_cast<double>(best) / fs
                             : peaks.times[k] + static_cast<double>(best - p) / fs;
        if (!out.indices.empty()) {
            if (best <= out.indices.back()) continue;
            if (best - out.indices.back() < refr) continue;
        }
        out.indices.push_back(static_cast<int>(best));
        out.times.push_back(t);
    }
    return out;
}

DetectionResult detect(const EcgRecord& rec, const DetectorConfig& cfg) {
    cfg.validate(rec.fs);
    const double fs = rec.fs;
    const long n = static_cast<long>(rec.samples.size());
    if (static_cast<double>(n) < 2.0 * fs || static_cast<double>(n) < cfg.learning_period_s * fs)
        throw DataError("detect: record shorter than the learning period");

    DetectionResult res;
    std::vector<double> bp = bandpass(rec, cfg);
    if (cfg.polarity_check) {
        auto [corrected, flipped] = check_polarity(std::move(bp), fs, cfg.learning_period_s);
        bp = std::move(corrected);
        res.polarity_flipped = flipped;
    }
    res.features = feature_transform(bp, fs, cfg);
    res.features.polarity_flipped = res.polarity_flipped;
    const std::vector<double>& mwi = res.features.integrated;
    const std::vector<double>& der = res.features.derivative;

    res.potential = find_potential_peaks(bp, fs, cfg.potential_peak_window_ms, rec.t0);

    const long learn = std::lround(cfg.learning_period_s * fs);
    const long w_int =
        std::max(1L, std::lround(cfg.integration_window_ms * fs / 1000.0));
    const long refr = std::lround(cfg.refractory_ms * fs / 1000.0);
    const long twave = std::lround(cfg.twave_window_ms * fs / 1000.0);
    const long reset_gap = std::lround(cfg.reset_timeout_s * fs);

    DetectorThresholds th =
        init_thresholds(std::span(mwi).subspan(0, static_cast<std::size_t>(std::min(learn, n))),
                        std::span(bp).subspan(0, static_cast<std::size_t>(std::min(learn, n))));
    res.trajectory.push_back({0, th, ThresholdSnapshot::Event::Init});

    auto window_max = [&](const std::vector<double>& s, long a, long b) {
        a = std::max(a, 0L);
        b = std::min(b, n - 1);
        long best = a;
        for (long j = a + 1; j <= b; ++j)
            if (s[static_cast<std::size_t>(j)] > s[static_cast<std::size_t>(best)]) best = j;
        return best;
    };
    auto make_candidate = [&](long i) {
        Candidate c;
        c.idx = static_cast<int>(i);
        c.bp_idx = static_cast<int>(window_max(bp, i - w_int, i));
        c.peak_i = mwi[static_cast<std::size_t>(i)];
        c.peak_f = bp[static_cast<std::size_t>(c.bp_idx)];
        double slope = 0.0;
        for (long j = std::max(0L, i - w_int); j <= std::min(n - 1, i); ++j)
            slope = std::max(slope, std::abs(der[static_cast<std::size_t>(j)]));
        c.slope = slope;
        return c;
    };

    std::vector<int> beat_bp;       // accepted beat positions (bandpass domain)
    long last_beat = -1;            // mwi-domain index of last accepted beat
    long last_event = 0;            // reset timer anchor: beat or reset
    double last_qrs_slope = 0.0;
    std::deque<double> rr_buf;      // last 8 accepted RR intervals, samples
    std::vector<Candidate> rejected;  // noise candidates since the last beat

    auto push_rr = [&](long gap) {
        rr_buf.push_back(static_cast<double>(gap));
        if (rr_buf.size() > 8) rr_buf.pop_front();
    };
    auto accept = [&](const Candidate& c, bool from_searchback) {
        const double wS = from_searchback ? 0.25 : 0.125;
        th.SPKI = wS * c.peak_i + (1.0 - wS) * th.SPKI;
        th.SPKF = wS * c.peak_f + (1.0 - wS) * th.SPKF;
        recompute(th);
        if (last_beat >= 0) push_rr(c.idx - last_beat);
        last_beat = c.idx;
        last_event = c.idx;
        last_qrs_slope = c.slope;
        beat_bp.push_back(c.bp_idx);
        rejected.clear();
        res.trajectory.push_back({c.idx, th,
                                  from_searchback ? ThresholdSnapshot::Event::Searchback
                                                  : ThresholdSnapshot::Event::Accept});
    };

    for (long i = 1; i + 1 < n; ++i) {
        const double v = mwi[static_cast<std::size_t>(i)];
        if (!(v > mwi[static_cast<std::size_t>(i - 1)]) ||
            !(v >= mwi[static_cast<std::size_t>(i + 1)]))
            continue;  // not a local maximum of the integration signal

        if (cfg.zero_skip && v < cfg.zero_floor) continue;

        if (cfg.threshold_reset && i - last_event > reset_gap) {
            // Re-learn thresholds on a 2 s window centred at the current point.
            const long a = std::max(0L, i - std::lround(fs));
            const long b = std::min(n, i + std::lround(fs));
            th = init_thresholds(
                std::span(mwi).subspan(static_cast<std::size_t>(a), static_cast<std::size_t>(b - a)),
                std::span(bp).subspan(static_cast<std::size_t>(a), static_cast<std::size_t>(b - a)));
            last_event = i;
            rejected.clear();
            res.trajectory.push_back({static_cast<int>(i), th, ThresholdSnapshot::Event::Reset});
        }

        Candidate c = make_candidate(i);

        if (last_beat >= 0 && i - last_beat < refr) continue;

        bool is_twave = false;
        if (last_beat >= 0 && i - last_beat < twave && last_qrs_slope > 0.0)
            is_twave = c.slope < 0.5 * last_qrs_slope;

        const bool degenerate_guard = c.peak_i > 0.0;
        if (!is_twave && degenerate_guard && c.peak_i >= th.I1 && c.peak_f >= th.F1) {
            accept(c, false);
            continue;
        }

        // Noise peak.
        th.NPKI = 0.125 * c.peak_i + 0.875 * th.NPKI;
        th.NPKF = 0.125 * c.peak_f + 0.875 * th.NPKF;
        recompute(th);
        rejected.push_back(c);
        res.trajectory.push_back({c.idx, th, ThresholdSnapshot::Event::Noise});

        // Search-back at half threshold when a beat looks missed. Halted for
        // gaps beyond the reset timeout so zero segments are not scanned.
        if (last_beat >= 0 && rr_buf.size() >= 2) {
            const double rr_avg =
                std::accumulate(rr_buf.begin(), rr_buf.end(), 0.0) / static_cast<double>(rr_buf.size());
            const long gap = i - last_beat;
            const bool halted = cfg.zero_skip && gap > reset_gap;
            if (!halted && static_cast<double>(gap) > 1.66 * rr_avg) {
                const Candidate* best = nullptr;
                for (const Candidate& r : rejected) {
                    if (r.idx - last_beat < refr || c.idx - r.idx < refr) continue;
                    if (cfg.zero_skip && r.peak_i < cfg.zero_floor) continue;
                    if (r.peak_i >= th.I2 && r.peak_f >= th.F2 && r.peak_i > 0.0)
                        if (!best || r.peak_i > best->peak_i) best = &r;
                }
                if (best) accept(*best, true);
            }
        }
    }

    RPeakSeries provisional;
    provisional.source = cfg.searchback_on_bandpass ? RPeakSeries::Source::Bandpass
                                                    : RPeakSeries::Source::Raw;
    std::sort(beat_bp.begin(), beat_bp.end());
    for (int idx : beat_bp) {
        provisional.indices.push_back(idx);
        provisional.times.push_back(rec.t0 + static_cast<double>(idx) / fs);
    }
    res.peaks = searchback_refine(
        provisional,
        cfg.searchback_on_bandpass ? std::span<const double>(bp)
                                   : std::span<const double>(rec.samples),
        fs, cfg.searchback_window_ms, cfg.refractory_ms);
    return res;
}

void write_peaks_csv(std::ostream& out, const RPeakSeries& peaks) {
    out.precision(17);
    out << "index,time_s\n";
    for (std::size_t i = 0; i < peaks.indices.size(); ++i)
        out << peaks.indices[i] << "," << peaks.times[i] << "\n";
}

RPeakSeries read_peaks_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.find("index,time_s") == std::string::npos)
        throw DataError("missing index,time_s header");
    RPeakSeries p;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw DataError("malformed peak row: " + line);
        p.indices.push_back(std::stoi(a));
        p.times.push_back(std::stod(b));
    }
    return p;
}

DetectionMetrics match_beats(std::span<const double> truth_times,
                             std::span<const double> detected_times, double tolerance_s) {
    DetectionMetrics m;
    std::size_t i = 0, j = 0;
    double err_sum = 0.0;
    while (i < truth_times.size() && j < detected_times.size()) {
        const double d = detected_times[j] - truth_times[i];
        if (std::abs(d) <= tolerance_s) {
            ++m.matched;
            err_sum += std::abs(d);
            ++i;
            ++j;
        } else if (d < 0.0) {
            ++m.false_positives;
            ++j;
        } else {
            ++m.missed;
            ++i;
        }
    }
    m.missed += static_cast<int>(truth_times.size() - i);
    m.false_positives += static_cast<int>(detected_times.size() - j);
    if (m.matched > 0) m.mean_abs_error_ms = 1000.0 * err_sum / m.matched;
    const int tp = m.matched;
    if (tp + m.missed > 0) m.sensitivity = static_cast<double>(tp) / (tp + m.missed);
    if (tp + m.false_positives > 0) m.ppv = static_cast<double>(tp) / (tp + m.false_positives);
    return m;
}

}  // namespace hrv
