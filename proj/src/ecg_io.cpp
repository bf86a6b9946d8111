#include "hrv/ecg_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "hrv/errors.hpp"

namespace hrv {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw DataError("non-numeric " + what + ": '" + s + "'");
    }
    if (pos != s.size()) throw DataError("non-numeric " + what + ": '" + s + "'");
    return v;
}

}  // namespace

EcgRecord read_ecg_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("missing fs header");
    line = trim(line);
    if (line.rfind("fs=", 0) != 0) throw DataError("missing fs header");
    const double fs = parse_double(line.substr(3), "fs value");
    if (!(fs > 0.0) || !std::isfinite(fs)) throw DataError("invalid sampling rate");

    if (!std::getline(in, line) || trim(line) != "sample_mv")
        throw DataError("missing sample_mv header row");

    EcgRecord rec;
    rec.fs = fs;
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        rec.samples.push_back(parse_double(line, "sample at line " + std::to_string(lineno)));
    }
    if (rec.samples.empty()) throw DataError("no samples");
    if (rec.samples.size() < 2) throw DataError("fewer than 2 samples");
    return rec;
}

EcgRecord read_ecg_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open ECG file: " + path);
    return read_ecg_csv(in);
}

void write_ecg_csv(std::ostream& out, const EcgRecord& rec) {
    out.precision(17);
    out << "fs=" << rec.fs << "\n" << "sample_mv\n";
    for (double v : rec.samples) out << v << "\n";
}

void write_ecg_csv_file(const std::string& path, const EcgRecord& rec) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write ECG file: " + path);
    write_ecg_csv(out, rec);
}

std::vector<double> read_annotation_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "r_time_s")
        throw DataError("missing r_time_s header");
    std::vector<double> times;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        times.push_back(parse_double(line, "r_time_s value"));
    }
    return times;
}

std::vector<double> read_annotation_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotation file: " + path);
    return read_annotation_csv(in);
}

void write_annotation_csv(std::ostream& out, const std::vector<double>& r_times) {
    out.precision(17);
    out << "r_time_s\n";
    for (double t : r_times) out << t << "\n";
}

void write_annotation_csv_file(const std::string& path, const std::vector<double>& r_times) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write annotation file: " + path);
    write_annotation_csv(out, r_times);
}

namespace {

double gauss_bump(double t, double center, double sigma) {
    const double z = (t - center) / sigma;
    return std::exp(-0.5 * z * z);
}

// Asymmetric biphasic QRS (~80 ms wide, 1 mV main lobe) with a low late T wave.
double beat_waveform(double t_rel) {
    double v = 0.0;
    v += 1.00 * gauss_bump(t_rel, 0.0, 0.012);
    v -= 0.35 * gauss_bump(t_rel, 0.026, 0.015);
    v += 0.20 * gauss_bump(t_rel, 0.16, 0.045);
    return v;
}

}  // namespace

std::pair<EcgRecord, GroundTruthBeats> synth_ecg(const SynthParams& p) {
    if (p.hr_bpm < 60.0 || p.hr_bpm > 240.0)
        throw ConfigError("synth_ecg: hr_bpm outside [60, 240]");
    if (!(p.duration_s > 0.0)) throw ConfigError("synth_ecg: duration must be positive");
    if (!(p.fs > 0.0)) throw ConfigError("synth_ecg: fs must be positive");
    for (const auto& a : p.artifacts) {
        if (a.t_start < 0.0 || a.t_end > p.duration_s || a.t_start >= a.t_end)
            throw ConfigError("synth_ecg: artifact window outside record duration");
    }

    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> jitter(0.0, 1.0);

    const double mean_rr = 60.0 / p.hr_bpm;
    GroundTruthBeats truth;
    truth.inverted = p.inverted;
    truth.injected_artifacts = p.artifacts;

    // Beat schedule: i.i.d. Gaussian jitter on intervals, clipped at +-3 sigma.
    double t = 0.6 * mean_rr;
    while (t < p.duration_s - 0.05) {
        truth.r_times.push_back(t);
        double dt = jitter(rng) * p.hrv_sd;
        dt = std::clamp(dt, -3.0 * p.hrv_sd, 3.0 * p.hrv_sd);
        t += std::max(0.5 * mean_rr, mean_rr + dt);
    }

    EcgRecord rec;
    rec.fs = p.fs;
    rec.channel = "synthetic";
    const std::size_t n = static_cast<std::size_t>(std::llround(p.duration_s * p.fs));
    rec.samples.assign(n, 0.0);

    for (double rt : truth.r_times) {
        // Waveform support is about [-60 ms, +320 ms] around the R time.
        const long i0 = std::max<long>(0, std::lround((rt - 0.08) * p.fs));
        const long i1 = std::min<long>(static_cast<long>(n) - 1, std::lround((rt + 0.35) * p.fs));
        for (long i = i0; i <= i1; ++i)
            rec.samples[static_cast<std::size_t>(i)] += beat_waveform(i / p.fs - rt);
    }

    if (p.noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, p.noise_sd);
        for (double& v : rec.samples) v += noise(rng);
    }

    for (const auto& a : p.artifacts) {
        const std::size_t i0 = static_cast<std::size_t>(std::llround(a.t_start * p.fs));
        const std::size_t i1 =
            std::min(n, static_cast<std::size_t>(std::llround(a.t_end * p.fs)));
        switch (a.kind) {
            case ArtifactKind::Spike: {
                // Burst of narrow 5 mV pulses every 80 ms across the window.
                for (double c = a.t_start + 0.02; c < a.t_end; c += 0.08) {
                    const long j0 = std::max<long>(0, std::lround((c - 0.03) * p.fs));
                    const long j1 =
                        std::min<long>(static_cast<long>(n) - 1, std::lround((c + 0.03) * p.fs));
                    for (long j = j0; j <= j1; ++j)
                        rec.samples[static_cast<std::size_t>(j)] +=
                            5.0 * gauss_bump(j / p.fs, c, 0.008);
                }
                break;
            }
            case ArtifactKind::Zero:
                for (std::size_t i = i0; i < i1; ++i) rec.samples[i] = 0.0;
                break;
            case ArtifactKind::Wander:
                for (std::size_t i = i0; i < i1; ++i)
                    rec.samples[i] += 0.8 * std::sin(2.0 * M_PI * 0.25 * (i / p.fs));
                break;
            case ArtifactKind::Noise: {
                std::normal_distribution<double> burst(0.0, 0.3);
                for (std::size_t i = i0; i < i1; ++i) rec.samples[i] += burst(rng);
                break;
            }
        }
    }

    if (p.inverted)
        for (double& v : rec.samples) v = -v;

    return {std::move(rec), std::move(truth)};
}

}  // namespace hrv
