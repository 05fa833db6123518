#pragma once

#include <map>
#include <string>
#include <vector>

#include "hfprep/filters.hpp"
#include "hfprep/manifest.hpp"
#include "hfprep/video.hpp"

namespace hfprep {

// The strategy sweep: -2.0 to 3.0 in steps of 0.5, 11 values.
std::vector<double> default_strategies();

struct LabelJobSpec {
    std::vector<double> strategies = default_strategies();
    std::vector<double> bitrates_kbps{1000, 2000, 3000, 4000};
    double target_kbps = 2000;
    // Command templates, run via /bin/sh. encoder: {input} {output}
    // {bitrate_kbps}; decode: {input} {output_y4m}; metric: {image}, must
    // print one float. "builtin" selects the offline proxy metric.
    std::string encoder_cmd;
    std::string decode_cmd;
    std::string metric_cmd = "builtin";
    std::string workdir = "hfprep_work";
    bool cache = true;
    double timeout_s = 600.0;
    int workers = 1;
    GaussianSpec gaussian;
};

void validate_jobspec(const LabelJobSpec& spec);

struct RDPoint {
    double measured_kbps = 0.0;
    double quality = 0.0;
    double strategy = 0.0;
    double nominal_kbps = 0.0;
};

// Points of one strategy, sorted by measured bitrate; duplicate bitrates
// collapse to the best quality.
struct RDCurve {
    std::vector<RDPoint> points;
};

RDCurve make_curve(std::vector<RDPoint> points);

// Piecewise-linear read of the curve at target_kbps; clamps to the
// endpoints outside the measured range.
double quality_at_bitrate(const RDCurve& curve, double target_kbps);

// Argmax of quality_at_bitrate over strategies. Ties prefer the smallest
// |alpha|, then the smaller alpha. Throws if a required strategy has no
// curve.
StrategyLabel select_optimal(const std::map<double, RDCurve>& curves,
                             const std::vector<double>& required_strategies,
                             double target_kbps);

struct EncodeOutcome {
    RDPoint point; // quality unset (NaN) until measured
    std::string encoded_path;
    bool from_cache = false;
};

// Preprocesses the source with USM at `alpha` (skipping the filter when
// alpha is 0), invokes the encoder command, and computes the measured
// bitrate from the output size. Artifacts are cached in spec.workdir
// keyed by content hash.
EncodeOutcome encode_variant(const std::string& video_path, double alpha,
                             double bitrate_kbps, const LabelJobSpec& spec);

// Decodes and scores an encoded file: frames sampled at one per second,
// each scored by metric_cmd (or the builtin proxy), scores averaged.
double measure_quality(const std::string& encoded_path, const LabelJobSpec& spec);

// Offline proxy used for tests and hermetic runs: a normalized
// high-frequency-energy statistic minus a blockiness penalty, averaged
// over the sampled frames. This is NOT CLIP-IQA; it only provides a
// deterministic stand-in with the same harness contract.
double builtin_quality(const PlanarVideo& video);
double builtin_frame_quality(const Plane& luma);

// Frame indices floor(k * fps) for k = 0,1,... within range.
std::vector<int> one_per_second_indices(int frame_count, double fps);

struct LabelRow {
    std::string video_id;
    double alpha = 0.0;
    double quality_at_target = 0.0;
    double target_kbps = 0.0;
};

struct LabelRunStats {
    int labeled = 0;
    int skipped = 0; // already present in the output from a previous run
    int failed = 0;
    std::vector<std::string> failures;
};

// Full sweep over the manifest: strategies x bitrates encodes, quality
// measurement, curve assembly and argmax selection. Results are appended
// to labels_csv / audit_csv incrementally; videos already present in
// labels_csv are skipped, and cached encode/metric artifacts make a
// killed-then-resumed run re-invoke nothing that already completed.
// Per-video failures are recorded and the run continues.
LabelRunStats pseudo_label_dataset(const Manifest& manifest, const LabelJobSpec& spec,
                                   const std::string& labels_csv,
                                   const std::string& audit_csv);

// Content hash used for cache keys (FNV-1a over file bytes and salts).
uint64_t hash_file(const std::string& path);

} // namespace hfprep
