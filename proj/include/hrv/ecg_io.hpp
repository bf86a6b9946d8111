#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace hrv {

// Raw single-channel ECG trace.
struct EcgRecord {
    std::vector<double> samples;  // amplitude (mV by convention)
    double fs = 0.0;              // sampling rate, Hz
    std::string channel = "ECG";
    double t0 = 0.0;              // start offset, s

    double duration_s() const {
        return fs > 0.0 ? static_cast<double>(samples.size()) / fs : 0.0;
    }
};

enum class ArtifactKind { Spike, Zero, Wander, Noise };

struct ArtifactSpec {
    ArtifactKind kind = ArtifactKind::Noise;
    double t_start = 0.0;  // s, inclusive
    double t_end = 0.0;    // s, exclusive
};

// Beat schedule the generator actually realized, for oracle-based tests.
struct GroundTruthBeats {
    std::vector<double> r_times;  // strictly increasing, s
    bool inverted = false;
    std::vector<ArtifactSpec> injected_artifacts;
};

struct SynthParams {
    double hr_bpm = 120.0;   // mean heart rate, [60, 240]
    double hrv_sd = 0.02;    // beat-interval jitter, s
    double duration_s = 60.0;
    double fs = 256.0;       // Hz
    double noise_sd = 0.0;   // baseline Gaussian noise, mV
    bool inverted = false;
    std::vector<ArtifactSpec> artifacts;
    std::uint64_t seed = 0;
};

// CSV schema: line 1 "fs=<float>", line 2 "sample_mv", one float per line after.
EcgRecord read_ecg_csv(std::istream& in);
EcgRecord read_ecg_csv_file(const std::string& path);
void write_ecg_csv(std::ostream& out, const EcgRecord& rec);
void write_ecg_csv_file(const std::string& path, const EcgRecord& rec);

// Annotation CSV: single "r_time_s" column.
std::vector<double> read_annotation_csv(std::istream& in);
std::vector<double> read_annotation_csv_file(const std::string& path);
void write_annotation_csv(std::ostream& out, const std::vector<double>& r_times);
void write_annotation_csv_file(const std::string& path, const std::vector<double>& r_times);

// Template QRS-T waveform placed at jittered beat times, plus requested
// artifacts. Same seed reproduces the record and schedule bit for bit.
std::pair<EcgRecord, GroundTruthBeats> synth_ecg(const SynthParams& p);

}  // namespace hrv
