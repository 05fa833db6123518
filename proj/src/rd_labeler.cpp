#include "hfprep/rd_labeler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "hfprep/csv.hpp"
#include "hfprep/subprocess.hpp"
#include "hfprep/y4m.hpp"

namespace fs = std::filesystem;

namespace hfprep {

std::vector<double> default_strategies() {
    std::vector<double> s;
    for (int i = 0; i <= 10; ++i) s.push_back(-2.0 + 0.5 * i);
    return s;
}

void validate_jobspec(const LabelJobSpec& spec) {
    if (spec.strategies.empty())
        throw InvalidArgument("label.strategies must be non-empty");
    bool has_zero = false;
    for (size_t i = 0; i < spec.strategies.size(); ++i) {
        if (spec.strategies[i] == 0.0) has_zero = true;
        if (i && spec.strategies[i] <= spec.strategies[i - 1])
            throw InvalidArgument("label.strategies must be strictly increasing");
    }
    if (!has_zero)
        throw InvalidArgument("label.strategies must contain 0.0 (the no-op baseline)");
    if (spec.bitrates_kbps.size() < 2)
        throw InvalidArgument("label.bitrates_kbps needs at least 2 values");
    for (double b : spec.bitrates_kbps)
        if (!(b > 0)) throw InvalidArgument("label.bitrates_kbps must be positive");
    const auto [lo, hi] =
        std::minmax_element(spec.bitrates_kbps.begin(), spec.bitrates_kbps.end());
    if (spec.target_kbps < *lo || spec.target_kbps > *hi)
        throw InvalidArgument("label.target_kbps " + std::to_string(spec.target_kbps) +
                              " outside the swept bitrate range");
    if (spec.workers < 1) throw InvalidArgument("label.workers must be >= 1");
    validate_spec(spec.gaussian);
}

// ---- hashing and cache paths ------------------------------------------------

namespace {

uint64_t fnv1a(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a(const std::string& s, uint64_t h) { return fnv1a(s.data(), s.size(), h); }

uint64_t hash_double(double v, uint64_t h) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    return fnv1a(&bits, 8, h);
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string format_alpha(double a) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.2f", a);
    return buf;
}

std::string format_number(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
        return buf;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

uint64_t hash_gaussian(const GaussianSpec& g, uint64_t h) {
    h = hash_double(g.sigma, h);
    h = fnv1a(&g.ksize, sizeof(g.ksize), h);
    const int b = g.boundary == Boundary::Wrap ? 1 : 0;
    return fnv1a(&b, sizeof(b), h);
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

std::string expand_template(const std::string& tpl,
                            const std::vector<std::pair<std::string, std::string>>& subs) {
    std::string out = tpl;
    for (const auto& [k, v] : subs) replace_all(out, "{" + k + "}", v);
    return out;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write '" + tmp + "'");
        f << content;
    }
    fs::rename(tmp, path);
}

struct SourceInfo {
    double duration = 0.0;
    double fps = 0.0;
};

// Duration sidecar so cached encodes never reload the source video.
SourceInfo read_dur_sidecar(const std::string& path) {
    std::ifstream f(path);
    SourceInfo info;
    if (!(f >> info.duration >> info.fps)) throw Error("bad duration sidecar '" + path + "'");
    return info;
}

struct PreprocessedVariant {
    std::string path;
    SourceInfo info;
};

// Writes (or reuses) the USM-preprocessed y4m for (video, alpha). The
// file name carries the alpha so external tooling can recover it.
PreprocessedVariant ensure_preprocessed(const std::string& video_path, uint64_t video_hash,
                                        double alpha, const LabelJobSpec& spec) {
    uint64_t key = video_hash;
    key = hash_double(alpha, key);
    key = hash_gaussian(spec.gaussian, key);
    const std::string base =
        (fs::path(spec.workdir) / ("pre_" + hex64(key) + "_a" + format_alpha(alpha))).string();
    PreprocessedVariant v;
    v.path = base + ".y4m";
    const std::string dur = base + ".dur";
    if (spec.cache && fs::exists(v.path) && fs::exists(dur)) {
        v.info = read_dur_sidecar(dur);
        return v;
    }
    const PlanarVideo video = load_y4m(video_path);
    v.info.duration = video.duration_seconds();
    v.info.fps = video.fps();
    UsmPreprocessor usm(spec.gaussian);
    const PlanarVideo processed = preprocess_video(video, usm, alpha);
    const std::string tmp = v.path + ".tmp." + std::to_string(::getpid());
    write_y4m(processed, tmp);
    fs::rename(tmp, v.path);
    atomic_write(dur, std::to_string(v.info.duration) + " " + std::to_string(v.info.fps) + "\n");
    return v;
}

} // namespace

uint64_t hash_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for hashing");
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        h = fnv1a(buf, static_cast<size_t>(f.gcount()), h);
        if (f.gcount() < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

// ---- encode ----------------------------------------------------------------

EncodeOutcome encode_variant(const std::string& video_path, double alpha,
                             double bitrate_kbps, const LabelJobSpec& spec) {
    if (spec.encoder_cmd.find("{input}") == std::string::npos ||
        spec.encoder_cmd.find("{output}") == std::string::npos ||
        spec.encoder_cmd.find("{bitrate_kbps}") == std::string::npos)
        throw InvalidArgument(
            "encoder_cmd must contain {input}, {output} and {bitrate_kbps} placeholders");
    fs::create_directories(spec.workdir);

    const uint64_t video_hash = hash_file(video_path);
    const PreprocessedVariant pre = ensure_preprocessed(video_path, video_hash, alpha, spec);

    uint64_t key = video_hash;
    key = hash_double(alpha, key);
    key = hash_double(bitrate_kbps, key);
    key = hash_gaussian(spec.gaussian, key);
    key = fnv1a(spec.encoder_cmd, key);
    const std::string enc_path =
        (fs::path(spec.workdir) / ("enc_" + hex64(key) + ".hevc")).string();
    const std::string meta_path = enc_path + ".meta";

    EncodeOutcome outcome;
    outcome.encoded_path = enc_path;
    outcome.point.strategy = alpha;
    outcome.point.nominal_kbps = bitrate_kbps;
    outcome.point.quality = std::nan("");

    if (spec.cache && fs::exists(enc_path) && fs::exists(meta_path)) {
        std::ifstream m(meta_path);
        if (m >> outcome.point.measured_kbps) {
            outcome.from_cache = true;
            return outcome;
        }
    }

    const std::string cmd = expand_template(
        spec.encoder_cmd, {{"input", pre.path},
                           {"output", enc_path},
                           {"bitrate_kbps", format_number(bitrate_kbps)}});
    const CommandResult r = run_command(cmd, spec.timeout_s);
    if (r.timed_out)
        throw SubprocessError("encoder timed out after " + format_number(spec.timeout_s) +
                              "s: " + cmd);
    if (r.exit_code != 0)
        throw SubprocessError("encoder exited with " + std::to_string(r.exit_code) + ": " +
                              cmd + "\nstderr: " + r.stderr_tail);
    if (!fs::exists(enc_path) || fs::file_size(enc_path) == 0)
        throw SubprocessError("encoder produced no output: " + cmd +
                              "\nstderr: " + r.stderr_tail);

    const double bytes = static_cast<double>(fs::file_size(enc_path));
    outcome.point.measured_kbps = bytes * 8.0 / 1000.0 / pre.info.duration;
    atomic_write(meta_path, std::to_string(outcome.point.measured_kbps) + "\n");
    return outcome;
}

// ---- quality ---------------------------------------------------------------

std::vector<int> one_per_second_indices(int frame_count, double fps) {
    std::vector<int> out;
    for (int k = 0;; ++k) {
        const int idx = static_cast<int>(std::floor(k * fps));
        if (idx >= frame_count) break;
        if (out.empty() || idx != out.back()) out.push_back(idx);
        if (fps <= 0) break;
    }
    if (out.empty() && frame_count > 0) out.push_back(0);
    return out;
}

double builtin_frame_quality(const Plane& luma) {
    GaussianSpec spec; // default sigma 1, ksize 5, reflect
    const std::vector<double> res = highfreq_residual(luma, spec);
    double energy = 0.0;
    for (double r : res) energy += r * r;
    const double rms = std::sqrt(energy / static_cast<double>(res.size()));
    const double sharpness = std::min(1.0, rms / 16.0);

    // Blockiness: excess luma discontinuity across the 8-pixel coding
    // grid relative to off-grid columns/rows.
    auto axis_excess = [&](bool vertical) {
        double on = 0.0, off = 0.0;
        int64_t n_on = 0, n_off = 0;
        const int W = luma.width, H = luma.height;
        if (vertical) {
            for (int y = 0; y < H; ++y)
                for (int x = 0; x + 1 < W; ++x) {
                    const double d = std::abs(luma.at(x + 1, y) - luma.at(x, y));
                    if (x % 8 == 7) {
                        on += d;
                        ++n_on;
                    } else {
                        off += d;
                        ++n_off;
                    }
                }
        } else {
            for (int y = 0; y + 1 < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const double d = std::abs(luma.at(x, y + 1) - luma.at(x, y));
                    if (y % 8 == 7) {
                        on += d;
                        ++n_on;
                    } else {
                        off += d;
                        ++n_off;
                    }
                }
        }
        if (n_on == 0 || n_off == 0) return 0.0;
        return std::max(0.0, on / n_on - off / n_off);
    };
    const double blockiness =
        std::min(1.0, (axis_excess(true) + axis_excess(false)) / 2.0 / 16.0);
    return sharpness - 0.5 * blockiness;
}

double builtin_quality(const PlanarVideo& video) {
    const std::vector<int> idx = one_per_second_indices(video.frame_count(), video.fps());
    if (idx.empty()) throw InvalidArgument("builtin_quality: empty video");
    double acc = 0.0;
    for (int i : idx)
        acc += builtin_frame_quality(to_grayscale(video.frames[static_cast<size_t>(i)]));
    return acc / static_cast<double>(idx.size());
}

namespace {

// 8-bit PPM via BT.601 full-range conversion; the metric command sees the
// frame as an ordinary color image.
void write_frame_ppm(const Frame& frame, int width, int height, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + path + "'");
    f << "P6\n" << width << " " << height << "\n255\n";
    auto clip255 = [](double v) {
        return static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : std::lround(v)));
    };
    std::string buf;
    buf.reserve(static_cast<size_t>(width) * height * 3);
    const bool gray = frame.layout == PixLayout::GRAY;
    const Plane& y = frame.planes[0];
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            const double Y = y.at(col, row);
            double r = Y, g = Y, b = Y;
            if (!gray) {
                const Plane& u = frame.planes[1];
                const Plane& v = frame.planes[2];
                const bool sub = frame.layout == PixLayout::YUV420;
                const double cb = u.at(sub ? col / 2 : col, sub ? row / 2 : row) - 128.0;
                const double cr = v.at(sub ? col / 2 : col, sub ? row / 2 : row) - 128.0;
                r = Y + 1.402 * cr;
                g = Y - 0.344136 * cb - 0.714136 * cr;
                b = Y + 1.772 * cb;
            }
            buf.push_back(static_cast<char>(clip255(r)));
            buf.push_back(static_cast<char>(clip255(g)));
            buf.push_back(static_cast<char>(clip255(b)));
        }
    }
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

double external_frame_quality(const Frame& frame, int width, int height,
                              const LabelJobSpec& spec, const std::string& tag) {
    const std::string img =
        (fs::path(spec.workdir) / ("frame_" + tag + "_" + std::to_string(::getpid()) + ".ppm"))
            .string();
    write_frame_ppm(frame, width, height, img);
    const std::string cmd = expand_template(spec.metric_cmd, {{"image", img}});
    const CommandResult r = run_command(cmd, spec.timeout_s);
    fs::remove(img);
    if (r.timed_out) throw SubprocessError("metric timed out: " + cmd);
    if (r.exit_code != 0)
        throw SubprocessError("metric exited with " + std::to_string(r.exit_code) + ": " +
                              cmd + "\nstderr: " + r.stderr_tail);
    try {
        size_t pos = 0;
        const double v = std::stod(r.out, &pos);
        return v;
    } catch (const std::exception&) {
        throw SubprocessError("metric printed no number: '" + r.out.substr(0, 64) + "'");
    }
}

} // namespace

double measure_quality(const std::string& encoded_path, const LabelJobSpec& spec) {
    fs::create_directories(spec.workdir);
    uint64_t qkey = hash_file(encoded_path);
    qkey = fnv1a(spec.decode_cmd, qkey);
    qkey = fnv1a(spec.metric_cmd, qkey);
    const std::string qfile =
        (fs::path(spec.workdir) / ("q_" + hex64(qkey) + ".txt")).string();
    if (spec.cache && fs::exists(qfile)) {
        std::ifstream f(qfile);
        double q;
        if (f >> q) return q;
    }

    // Decode to y4m (or read directly when no decoder is configured, as
    // mock encoders emit y4m already).
    std::string y4m_path = encoded_path;
    bool temp_decoded = false;
    if (!spec.decode_cmd.empty()) {
        y4m_path = (fs::path(spec.workdir) /
                    ("dec_" + hex64(qkey) + "_" + std::to_string(::getpid()) + ".y4m"))
                       .string();
        const std::string cmd = expand_template(
            spec.decode_cmd, {{"input", encoded_path}, {"output_y4m", y4m_path}});
        const CommandResult r = run_command(cmd, spec.timeout_s);
        if (r.timed_out) throw SubprocessError("decoder timed out: " + cmd);
        if (r.exit_code != 0)
            throw SubprocessError("decoder exited with " + std::to_string(r.exit_code) +
                                  ": " + cmd + "\nstderr: " + r.stderr_tail);
        temp_decoded = true;
    }

    double quality;
    try {
        const PlanarVideo video = load_y4m(y4m_path);
        if (spec.metric_cmd == "builtin") {
            quality = builtin_quality(video);
        } else {
            const std::vector<int> idx =
                one_per_second_indices(video.frame_count(), video.fps());
            double acc = 0.0;
            for (size_t k = 0; k < idx.size(); ++k)
                acc += external_frame_quality(video.frames[static_cast<size_t>(idx[k])],
                                              video.width, video.height, spec,
                                              hex64(qkey) + "_" + std::to_string(k));
            quality = acc / static_cast<double>(idx.size());
        }
    } catch (...) {
        if (temp_decoded) fs::remove(y4m_path);
        throw;
    }
    if (temp_decoded) fs::remove(y4m_path);
    atomic_write(qfile, std::to_string(quality) + "\n");
    return quality;
}

// ---- curves and selection ---------------------------------------------------

RDCurve make_curve(std::vector<RDPoint> points) {
    if (points.size() < 2)
        throw InvalidArgument("rd curve needs at least 2 points, got " +
                              std::to_string(points.size()));
    std::sort(points.begin(), points.end(), [](const RDPoint& a, const RDPoint& b) {
        return a.measured_kbps < b.measured_kbps;
    });
    RDCurve curve;
    for (const RDPoint& p : points) {
        if (!(p.measured_kbps > 0))
            throw InvalidArgument("rd point has non-positive measured bitrate");
        if (!std::isfinite(p.quality))
            throw InvalidArgument("rd point has non-finite quality");
        if (!curve.points.empty() && p.measured_kbps == curve.points.back().measured_kbps) {
            // Equal measured bitrates collapse to the best quality.
            if (p.quality > curve.points.back().quality) curve.points.back() = p;
        } else {
            curve.points.push_back(p);
        }
    }
    if (curve.points.size() < 2)
        throw InvalidArgument("rd curve collapsed below 2 distinct bitrates");
    return curve;
}

double quality_at_bitrate(const RDCurve& curve, double target_kbps) {
    const auto& pts = curve.points;
    if (pts.size() < 2) throw InvalidArgument("quality_at_bitrate: degenerate curve");
    if (target_kbps <= pts.front().measured_kbps) return pts.front().quality;
    if (target_kbps >= pts.back().measured_kbps) return pts.back().quality;
    for (size_t i = 1; i < pts.size(); ++i) {
        if (target_kbps <= pts[i].measured_kbps) {
            const RDPoint& a = pts[i - 1];
            const RDPoint& b = pts[i];
            const double t = (target_kbps - a.measured_kbps) /
                             (b.measured_kbps - a.measured_kbps);
            return a.quality + t * (b.quality - a.quality);
        }
    }
    return pts.back().quality; // unreachable
}

StrategyLabel select_optimal(const std::map<double, RDCurve>& curves,
                             const std::vector<double>& required_strategies,
                             double target_kbps) {
    if (required_strategies.empty())
        throw InvalidArgument("select_optimal: empty strategy list");
    bool have = false;
    double best_alpha = 0.0;
    double best_q = 0.0;
    for (double alpha : required_strategies) {
        const auto it = curves.find(alpha);
        if (it == curves.end())
            throw InvalidArgument("select_optimal: missing curve for strategy " +
                                  format_alpha(alpha));
        const double q = quality_at_bitrate(it->second, target_kbps);
        const bool better =
            !have || q > best_q ||
            (q == best_q && (std::abs(alpha) < std::abs(best_alpha) ||
                             (std::abs(alpha) == std::abs(best_alpha) && alpha < best_alpha)));
        if (better) {
            best_alpha = alpha;
            best_q = q;
            have = true;
        }
    }
    return StrategyLabel{best_alpha};
}

// ---- dataset sweep ----------------------------------------------------------

namespace {

struct Job {
    double alpha;
    double bitrate;
    RDPoint point;
    std::string error;
};

void run_jobs(std::vector<Job>& jobs, const std::string& video_path,
              const LabelJobSpec& spec) {
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            Job& job = jobs[i];
            try {
                EncodeOutcome enc = encode_variant(video_path, job.alpha, job.bitrate, spec);
                enc.point.quality = measure_quality(enc.encoded_path, spec);
                job.point = enc.point;
            } catch (const std::exception& e) {
                job.error = e.what();
            }
        }
    };
    const int width = std::min<int>(spec.workers, static_cast<int>(jobs.size()));
    if (width <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(width));
    for (int i = 0; i < width; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

std::string format_quality(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace

LabelRunStats pseudo_label_dataset(const Manifest& manifest, const LabelJobSpec& spec,
                                   const std::string& labels_csv,
                                   const std::string& audit_csv) {
    validate_jobspec(spec);
    fs::create_directories(spec.workdir);

    // Resume support: ids already labeled are not re-processed.
    std::vector<std::string> done;
    if (fs::exists(labels_csv)) {
        const CsvTable existing = read_csv(labels_csv);
        const int c = existing.column("video_id");
        if (c >= 0)
            for (const auto& row : existing.rows)
                if (static_cast<size_t>(c) < row.size()) done.push_back(row[static_cast<size_t>(c)]);
    }
    const bool labels_new = !fs::exists(labels_csv);
    std::ofstream labels(labels_csv, std::ios::app);
    if (!labels) throw Error("cannot open '" + labels_csv + "' for append");
    if (labels_new) labels << "video_id,alpha_label,quality_at_target,target_kbps\n";
    const bool audit_new = !fs::exists(audit_csv);
    std::ofstream audit(audit_csv, std::ios::app);
    if (!audit) throw Error("cannot open '" + audit_csv + "' for append");
    if (audit_new) audit << "video_id,alpha,nominal_kbps,measured_kbps,quality\n";

    LabelRunStats stats;
    for (const ManifestEntry& entry : manifest.entries) {
        if (std::find(done.begin(), done.end(), entry.video_id) != done.end()) {
            stats.skipped += 1;
            continue;
        }
        try {
            // Materialize the preprocessed variants first so concurrent
            // bitrate jobs of one strategy never duplicate filter work.
            const uint64_t vhash = hash_file(entry.path);
            {
                std::vector<Job> pre_jobs;
                for (double a : spec.strategies) pre_jobs.push_back({a, 0.0, {}, ""});
                std::atomic<size_t> next{0};
                std::vector<std::thread> pool;
                const int width =
                    std::min<int>(spec.workers, static_cast<int>(pre_jobs.size()));
                auto worker = [&] {
                    for (;;) {
                        const size_t i = next.fetch_add(1);
                        if (i >= pre_jobs.size()) return;
                        try {
                            ensure_preprocessed(entry.path, vhash, pre_jobs[i].alpha, spec);
                        } catch (const std::exception& e) {
                            pre_jobs[i].error = e.what();
                        }
                    }
                };
                if (width <= 1) {
                    worker();
                } else {
                    for (int i = 0; i < width; ++i) pool.emplace_back(worker);
                    for (auto& t : pool) t.join();
                }
                for (const Job& j : pre_jobs)
                    if (!j.error.empty()) throw Error(j.error);
            }

            std::vector<Job> jobs;
            for (double a : spec.strategies)
                for (double b : spec.bitrates_kbps) jobs.push_back({a, b, {}, ""});
            run_jobs(jobs, entry.path, spec);
            for (const Job& j : jobs)
                if (!j.error.empty())
                    throw Error("alpha " + format_alpha(j.alpha) + " @ " +
                                format_number(j.bitrate) + " kbps: " + j.error);

            std::map<double, std::vector<RDPoint>> grouped;
            for (const Job& j : jobs) grouped[j.alpha].push_back(j.point);
            std::map<double, RDCurve> curves;
            for (auto& [alpha, pts] : grouped) curves[alpha] = make_curve(std::move(pts));

            const StrategyLabel label =
                select_optimal(curves, spec.strategies, spec.target_kbps);
            const double q_at =
                quality_at_bitrate(curves.at(label.alpha), spec.target_kbps);

            // Audit rows in (alpha, nominal) order regardless of worker
            // completion order.
            for (const Job& j : jobs)
                audit << entry.video_id << ',' << format_alpha(j.alpha) << ','
                      << format_number(j.bitrate) << ','
                      << format_quality(j.point.measured_kbps) << ','
                      << format_quality(j.point.quality) << '\n';
            audit.flush();
            labels << entry.video_id << ',' << format_alpha(label.alpha) << ','
                   << format_quality(q_at) << ',' << format_number(spec.target_kbps) << '\n';
            labels.flush();
            stats.labeled += 1;
        } catch (const std::exception& e) {
            stats.failed += 1;
            stats.failures.push_back(entry.video_id + ": " + e.what());
        }
    }
    return stats;
}

} // namespace hfprep
