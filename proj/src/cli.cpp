#include "hfprep/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "hfprep/config.hpp"
#include "hfprep/csv.hpp"
#include "hfprep/metrics.hpp"
#include "hfprep/y4m.hpp"

namespace fs = std::filesystem;

namespace hfprep {

namespace {

constexpr const char* kVersion = "0.1.0";

struct InputFlags {
    std::string path;
    bool raw = false;
    std::string size;
    std::string pix = "yuv420";
    std::string fps = "25/1";
};

void add_input_flags(CLI::App* cmd, InputFlags& in) {
    cmd->add_option("-i,--input", in.path, "input video (.y4m, or raw with --raw)")
        ->required();
    cmd->add_flag("--raw", in.raw, "input is headerless planar 8-bit YUV");
    cmd->add_option("--size", in.size, "raw frame size WxH");
    cmd->add_option("--pix", in.pix, "raw layout: yuv420|yuv444|gray");
    cmd->add_option("--fps", in.fps, "raw frame rate N/D");
}

PlanarVideo load_input(const InputFlags& in) {
    if (!in.raw) return load_y4m(in.path);
    int w = 0, h = 0, num = 25, den = 1;
    if (std::sscanf(in.size.c_str(), "%dx%d", &w, &h) != 2)
        throw InvalidArgument("--raw needs --size WxH, got '" + in.size + "'");
    if (std::sscanf(in.fps.c_str(), "%d/%d", &num, &den) < 1)
        throw InvalidArgument("bad --fps '" + in.fps + "'");
    PixLayout layout;
    if (in.pix == "yuv420")
        layout = PixLayout::YUV420;
    else if (in.pix == "yuv444")
        layout = PixLayout::YUV444;
    else if (in.pix == "gray")
        layout = PixLayout::GRAY;
    else
        throw InvalidArgument("bad --pix '" + in.pix + "'");
    return load_raw(in.path, w, h, layout, num, den);
}

// One JSON line per run: everything needed to reproduce it.
void append_run_log(const RunConfig& cfg, const std::string& subcommand,
                    const std::vector<std::string>& args, double elapsed_ms,
                    const std::vector<std::string>& outputs) {
    try {
        nlohmann::json entry;
        entry["tool"] = std::string("hfprep ") + kVersion;
        entry["subcommand"] = subcommand;
        entry["args"] = args;
        entry["seed"] = cfg.seed;
        entry["config"] = nlohmann::json::parse(config_to_json_text(cfg));
        entry["elapsed_ms"] = elapsed_ms;
        entry["outputs"] = outputs;
        std::ofstream log(cfg.log_path, std::ios::app);
        if (log) log << entry.dump() << "\n";
    } catch (const std::exception&) {
        // Logging must never fail the run itself.
    }
}

std::map<std::string, double> read_score_column(const std::string& path,
                                                const std::string& column) {
    const CsvTable t = read_csv(path);
    const int c_id = t.require_column("video_id", path);
    const int c_v = t.require_column(column, path);
    std::map<std::string, double> out;
    for (const auto& row : t.rows) {
        if (static_cast<size_t>(c_id) >= row.size() || static_cast<size_t>(c_v) >= row.size())
            continue;
        out[row[static_cast<size_t>(c_id)]] = std::stod(row[static_cast<size_t>(c_v)]);
    }
    return out;
}

int do_run(const std::vector<std::string>& args) {
    CLI::App app{"High-frequency preprocessing toolkit for video coding"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("hfprep ") + kVersion);

    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration")->expected(1);

    // preprocess ---------------------------------------------------------
    auto* cmd_pre = app.add_subcommand("preprocess", "apply signed USM to a video");
    double pre_alpha = 0.0;
    double pre_sigma = -1.0;
    int pre_ksize = 0;
    std::string pre_boundary, pre_out;
    InputFlags pre_in;
    cmd_pre->add_option("--alpha", pre_alpha, "signed strength (sharpen > 0, smooth < 0)")
        ->required();
    cmd_pre->add_option("--sigma", pre_sigma, "gaussian sigma");
    cmd_pre->add_option("--ksize", pre_ksize, "gaussian kernel size (odd)");
    cmd_pre->add_option("--boundary", pre_boundary, "reflect|wrap");
    add_input_flags(cmd_pre, pre_in);
    cmd_pre->add_option("-o,--output", pre_out, "output .y4m path")->required();

    // label ---------------------------------------------------------------
    auto* cmd_label = app.add_subcommand("label", "pseudo-label videos by RD sweep");
    std::string lab_manifest, lab_out = "labels.csv", lab_audit = "rd_audit.csv";
    std::string lab_encoder, lab_decoder, lab_metric;
    std::string lab_workdir;
    int lab_workers = 0;
    bool lab_no_cache = false;
    cmd_label->add_option("--manifest", lab_manifest, "dataset manifest CSV")->required();
    cmd_label->add_option("--out", lab_out, "labels CSV output");
    cmd_label->add_option("--audit", lab_audit, "RD-point audit CSV output");
    cmd_label->add_option("--encoder", lab_encoder,
                          "encoder command with {input} {output} {bitrate_kbps}");
    cmd_label->add_option("--decoder", lab_decoder,
                          "decode command with {input} {output_y4m}");
    cmd_label->add_option("--metric", lab_metric, "metric command with {image}, or 'builtin'");
    cmd_label->add_option("--workdir", lab_workdir, "cache/work directory");
    cmd_label->add_option("--workers", lab_workers, "parallel encode/metric jobs");
    cmd_label->add_flag("--no-cache", lab_no_cache, "disable the job cache");

    // train ---------------------------------------------------------------
    auto* cmd_train = app.add_subcommand("train", "train the strategy prediction network");
    std::string tr_manifest, tr_labels, tr_out = "model.ffpn";
    int tr_epochs = 0, tr_batch = 0;
    uint64_t tr_seed = 0;
    bool tr_seed_set = false;
    cmd_train->add_option("--manifest", tr_manifest, "labeled manifest CSV")->required();
    cmd_train->add_option("--labels", tr_labels,
                          "labels CSV to join on video_id (when the manifest has no "
                          "alpha_label column)");
    cmd_train->add_option("--out", tr_out, "checkpoint output path");
    cmd_train->add_option("--epochs", tr_epochs, "training epochs");
    cmd_train->add_option("--batch", tr_batch, "batch size in clips");
    cmd_train->add_option("--seed", tr_seed, "training seed")
        ->each([&](const std::string&) { tr_seed_set = true; });

    // predict -------------------------------------------------------------
    auto* cmd_predict = app.add_subcommand("predict", "predict the optimal strategy");
    std::string pd_model, pd_manifest, pd_out = "predictions.csv";
    int pd_clips = 4;
    uint64_t pd_seed = 0;
    InputFlags pd_in;
    cmd_predict->add_option("--model", pd_model, "checkpoint path")->required();
    cmd_predict->add_option("-i,--input", pd_in.path, "single video to score");
    cmd_predict->add_flag("--raw", pd_in.raw, "input is headerless planar 8-bit YUV");
    cmd_predict->add_option("--size", pd_in.size, "raw frame size WxH");
    cmd_predict->add_option("--pix", pd_in.pix, "raw layout: yuv420|yuv444|gray");
    cmd_predict->add_option("--fps", pd_in.fps, "raw frame rate N/D");
    cmd_predict->add_option("--manifest", pd_manifest, "score every video in a manifest");
    cmd_predict->add_option("--out", pd_out, "predictions CSV (manifest mode)");
    cmd_predict->add_option("--clips", pd_clips, "clips to sample and average");
    cmd_predict->add_option("--seed", pd_seed, "sampling seed");

    // evaluate --------------------------------------------------------------
    auto* cmd_eval = app.add_subcommand("evaluate", "PLCC/RMSE of predictions vs labels");
    std::string ev_pred, ev_gt;
    cmd_eval->add_option("--pred", ev_pred, "predictions CSV (video_id,s_pred)")->required();
    cmd_eval->add_option("--gt", ev_gt, "labels CSV (video_id,alpha_label)")->required();

    // rdplot ----------------------------------------------------------------
    auto* cmd_rdplot = app.add_subcommand("rdplot", "export per-video RD curves as CSV");
    std::string rp_audit, rp_dir = "rd_curves";
    cmd_rdplot->add_option("--audit", rp_audit, "audit CSV from 'label'")->required();
    cmd_rdplot->add_option("--out", rp_dir, "output directory");

    std::vector<const char*> argv;
    argv.push_back("hfprep");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << "hfprep " << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "hfprep: usage error: " << e.what() << "\n";
        std::cerr << app.help();
        return 2;
    }

    RunConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (const char* wd = std::getenv("HFPREP_WORKDIR"); wd && *wd)
        cfg.label.workdir = wd;

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };
    std::vector<std::string> outputs;
    std::string subname;

    if (cmd_pre->parsed()) {
        subname = "preprocess";
        GaussianSpec spec = cfg.gaussian;
        if (pre_sigma > 0) spec.sigma = pre_sigma;
        if (pre_ksize > 0) spec.ksize = pre_ksize;
        if (!pre_boundary.empty())
            spec.boundary = pre_boundary == "wrap" ? Boundary::Wrap : Boundary::Reflect;
        const PlanarVideo video = load_input(pre_in);
        UsmPreprocessor usm(spec);
        write_y4m(preprocess_video(video, usm, pre_alpha), pre_out);
        outputs.push_back(pre_out);
    } else if (cmd_label->parsed()) {
        subname = "label";
        LabelJobSpec spec = cfg.label;
        if (!lab_encoder.empty()) spec.encoder_cmd = lab_encoder;
        if (!lab_decoder.empty()) spec.decode_cmd = lab_decoder;
        if (!lab_metric.empty()) spec.metric_cmd = lab_metric;
        if (!lab_workdir.empty()) spec.workdir = lab_workdir;
        if (lab_workers > 0) spec.workers = lab_workers;
        if (lab_no_cache) spec.cache = false;
        if (spec.encoder_cmd.empty())
            throw InvalidArgument("no encoder command configured (--encoder or config label.encoder_cmd)");
        const Manifest manifest = load_manifest(lab_manifest);
        const LabelRunStats stats = pseudo_label_dataset(manifest, spec, lab_out, lab_audit);
        outputs.push_back(lab_out);
        outputs.push_back(lab_audit);
        std::cout << "labeled=" << stats.labeled << " skipped=" << stats.skipped
                  << " failed=" << stats.failed << "\n";
        for (const auto& f : stats.failures) std::cerr << "hfprep: label failure: " << f << "\n";
        if (stats.failed > 0 && stats.labeled == 0 && stats.skipped == 0) return 1;
    } else if (cmd_train->parsed()) {
        subname = "train";
        TrainSchedule schedule = cfg.train;
        if (tr_epochs > 0) schedule.epochs = tr_epochs;
        if (tr_batch > 0) schedule.batch = tr_batch;
        if (tr_seed_set) schedule.seed = tr_seed;

        const Manifest manifest = load_manifest(tr_manifest);
        std::map<std::string, double> joined;
        if (!tr_labels.empty()) joined = read_score_column(tr_labels, "alpha_label");

        std::vector<PlanarVideo> videos;
        videos.reserve(manifest.entries.size());
        std::vector<TrainItem> items;
        for (const auto& e : manifest.entries) {
            double alpha;
            if (e.alpha_label)
                alpha = *e.alpha_label;
            else if (auto it = joined.find(e.video_id); it != joined.end())
                alpha = it->second;
            else
                throw InvalidArgument("entry '" + e.video_id +
                                      "' has no strategy label (add an alpha_label column "
                                      "or pass --labels)");
            videos.push_back(load_y4m(e.path));
            items.push_back({e.video_id, nullptr, alpha});
        }
        for (size_t i = 0; i < items.size(); ++i) items[i].video = &videos[i];

        const TrainResult result =
            train_ffpn(items, cfg.ffpn, cfg.sampler, cfg.gaussian, schedule);
        save_checkpoint(result.best, tr_out);
        outputs.push_back(tr_out);
        for (const auto& log : result.log)
            std::cout << "epoch=" << log.epoch << " loss=" << log.mean_loss
                      << " lr_backbone=" << log.lr_backbone << " lr_fa_head=" << log.lr_fa_head
                      << "\n";
        std::cout << "best_epoch=" << result.best_epoch << " best_loss=" << result.best_loss
                  << " model=" << tr_out << "\n";
    } else if (cmd_predict->parsed()) {
        subname = "predict";
        const ModelCheckpoint ckpt = load_checkpoint(pd_model);
        if (!pd_in.path.empty()) {
            const PlanarVideo video = load_input(pd_in);
            const Prediction p = predict_video(video, ckpt, pd_clips, pd_seed);
            char buf[64];
            std::snprintf(buf, sizeof(buf), "s_pred=%.9g\n", p.s_pred);
            std::cout << buf;
        } else if (!pd_manifest.empty()) {
            const Manifest manifest = load_manifest(pd_manifest);
            std::ofstream out(pd_out, std::ios::trunc);
            if (!out) throw Error("cannot write '" + pd_out + "'");
            out << "video_id,s_pred\n";
            for (const auto& e : manifest.entries) {
                const PlanarVideo video = load_y4m(e.path);
                const Prediction p =
                    predict_video(video, ckpt, pd_clips,
                                  derive_seed(pd_seed, "predict/" + e.video_id));
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.9g", p.s_pred);
                out << e.video_id << ',' << buf << '\n';
            }
            outputs.push_back(pd_out);
        } else {
            throw InvalidArgument("predict needs -i <video> or --manifest <csv>");
        }
    } else if (cmd_eval->parsed()) {
        subname = "evaluate";
        const auto preds = read_score_column(ev_pred, "s_pred");
        const auto gts = read_score_column(ev_gt, "alpha_label");
        PairedScores pairs;
        for (const auto& [id, p] : preds) {
            const auto it = gts.find(id);
            if (it == gts.end()) continue;
            pairs.predictions.push_back(p);
            pairs.ground_truth.push_back(it->second);
        }
        if (pairs.predictions.empty())
            throw InvalidArgument("no overlapping video_ids between --pred and --gt");
        char buf[96];
        std::snprintf(buf, sizeof(buf), "plcc=%.6f rmse=%.6f\n", plcc(pairs), rmse(pairs));
        std::cout << buf;
    } else if (cmd_rdplot->parsed()) {
        subname = "rdplot";
        const CsvTable t = read_csv(rp_audit);
        const int c_id = t.require_column("video_id", rp_audit);
        const int c_alpha = t.require_column("alpha", rp_audit);
        const int c_nom = t.require_column("nominal_kbps", rp_audit);
        const int c_meas = t.require_column("measured_kbps", rp_audit);
        const int c_q = t.require_column("quality", rp_audit);
        fs::create_directories(rp_dir);
        std::map<std::string, std::vector<std::vector<std::string>>> per_video;
        for (const auto& row : t.rows)
            per_video[row[static_cast<size_t>(c_id)]].push_back(row);
        for (auto& [id, rows] : per_video) {
            std::sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
                const double aa = std::stod(a[static_cast<size_t>(c_alpha)]);
                const double ab = std::stod(b[static_cast<size_t>(c_alpha)]);
                if (aa != ab) return aa < ab;
                return std::stod(a[static_cast<size_t>(c_meas)]) <
                       std::stod(b[static_cast<size_t>(c_meas)]);
            });
            const std::string out_path = (fs::path(rp_dir) / (id + "_rd.csv")).string();
            std::ofstream out(out_path, std::ios::trunc);
            if (!out) throw Error("cannot write '" + out_path + "'");
            out << "alpha,nominal_kbps,measured_kbps,quality\n";
            for (const auto& row : rows)
                out << row[static_cast<size_t>(c_alpha)] << ','
                    << row[static_cast<size_t>(c_nom)] << ','
                    << row[static_cast<size_t>(c_meas)] << ','
                    << row[static_cast<size_t>(c_q)] << '\n';
            outputs.push_back(out_path);
        }
    }

    append_run_log(cfg, subname, args, elapsed_ms(), outputs);
    return 0;
}

} // namespace

int run_pipeline(const std::vector<std::string>& args) {
    try {
        return do_run(args);
    } catch (const Error& e) {
        std::cerr << "hfprep: error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "hfprep: error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace hfprep
