#include "hfprep/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hfprep {

using nlohmann::json;

RunConfig default_config() { return RunConfig{}; }

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    throw InvalidArgument("config key '" + key + "': " + why);
}

template <typename T>
void read_field(const json& obj, const std::string& section, const std::string& name,
                T& out) {
    if (!obj.contains(name)) return;
    const std::string key = section.empty() ? name : section + "." + name;
    try {
        out = obj.at(name).get<T>();
    } catch (const json::exception& e) {
        bad_key(key, std::string("wrong type (") + e.what() + ")");
    }
}

int line_of_byte(const std::string& text, size_t byte) {
    int line = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

} // namespace

void validate_config(const RunConfig& cfg) {
    try {
        validate_spec(cfg.gaussian);
    } catch (const Error& e) {
        bad_key("gaussian", e.what());
    }
    if (cfg.sampler.segments < 1) bad_key("sampler.segments", "must be >= 1");
    if (cfg.sampler.frames_per_segment < 1) bad_key("sampler.frames_per_segment", "must be >= 1");
    if (cfg.sampler.grid < 1) bad_key("sampler.grid", "must be >= 1");
    if (cfg.sampler.patch < 1) bad_key("sampler.patch", "must be >= 1");
    try {
        validate_ffpn(cfg.ffpn);
    } catch (const Error& e) {
        bad_key("ffpn", e.what());
    }
    if (cfg.sampler.grid * cfg.sampler.patch != cfg.ffpn.input_side)
        bad_key("sampler.patch", "grid*patch = " +
                                     std::to_string(cfg.sampler.grid * cfg.sampler.patch) +
                                     " must equal ffpn.input_side = " +
                                     std::to_string(cfg.ffpn.input_side));
    if (cfg.sampler.clip_frames() != cfg.ffpn.clip_frames)
        bad_key("sampler.segments",
                "segments*frames_per_segment = " + std::to_string(cfg.sampler.clip_frames()) +
                    " must equal ffpn.clip_frames = " + std::to_string(cfg.ffpn.clip_frames));
    try {
        validate_jobspec(cfg.label);
    } catch (const Error& e) {
        bad_key("label", e.what());
    }
    if (cfg.train.epochs < 1) bad_key("train.epochs", "must be >= 1");
    if (cfg.train.batch < 1) bad_key("train.batch", "must be >= 1");
    if (!(cfg.train.lr_backbone > 0)) bad_key("train.lr_backbone", "must be positive");
    if (!(cfg.train.lr_fa_head > 0)) bad_key("train.lr_fa_head", "must be positive");
    if (cfg.train.lr_patience < 1) bad_key("train.lr_patience", "must be >= 1");
    if (cfg.workers < 1) bad_key("workers", "must be >= 1");
}

RunConfig config_from_json_text(const std::string& text, const std::string& source_name) {
    RunConfig cfg = default_config();
    std::string trimmed = text;
    // An empty file is the full default configuration.
    if (trimmed.find_first_not_of(" \t\r\n") == std::string::npos) {
        validate_config(cfg);
        return cfg;
    }
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source_name + " line " + std::to_string(line_of_byte(text, e.byte)) +
                             ": " + e.what(),
                         e.byte);
    }
    if (!root.is_object()) throw InvalidArgument(source_name + ": top level must be an object");

    for (const auto& [key, value] : root.items()) {
        if (key == "gaussian") {
            read_field(value, key, "sigma", cfg.gaussian.sigma);
            read_field(value, key, "ksize", cfg.gaussian.ksize);
            std::string boundary;
            read_field(value, key, "boundary", boundary);
            if (!boundary.empty()) {
                if (boundary == "reflect")
                    cfg.gaussian.boundary = Boundary::Reflect;
                else if (boundary == "wrap")
                    cfg.gaussian.boundary = Boundary::Wrap;
                else
                    bad_key("gaussian.boundary", "expected 'reflect' or 'wrap'");
            }
        } else if (key == "sampler") {
            read_field(value, key, "segments", cfg.sampler.segments);
            read_field(value, key, "frames_per_segment", cfg.sampler.frames_per_segment);
            read_field(value, key, "grid", cfg.sampler.grid);
            read_field(value, key, "patch", cfg.sampler.patch);
        } else if (key == "ffpn") {
            std::vector<int> ch, st;
            read_field(value, key, "stage_channels", ch);
            read_field(value, key, "stage_strides", st);
            if (!ch.empty()) {
                if (ch.size() != 4) bad_key("ffpn.stage_channels", "need exactly 4 stages");
                std::copy(ch.begin(), ch.end(), cfg.ffpn.stage_channels.begin());
            }
            if (!st.empty()) {
                if (st.size() != 4) bad_key("ffpn.stage_strides", "need exactly 4 stages");
                std::copy(st.begin(), st.end(), cfg.ffpn.stage_strides.begin());
            }
            read_field(value, key, "fa_hidden", cfg.ffpn.fa_hidden);
            read_field(value, key, "head_hidden", cfg.ffpn.head_hidden);
            read_field(value, key, "input_side", cfg.ffpn.input_side);
            read_field(value, key, "clip_frames", cfg.ffpn.clip_frames);
            read_field(value, key, "use_fa", cfg.ffpn.use_fa);
        } else if (key == "label") {
            read_field(value, key, "strategies", cfg.label.strategies);
            read_field(value, key, "bitrates_kbps", cfg.label.bitrates_kbps);
            read_field(value, key, "target_kbps", cfg.label.target_kbps);
            read_field(value, key, "encoder_cmd", cfg.label.encoder_cmd);
            read_field(value, key, "decode_cmd", cfg.label.decode_cmd);
            read_field(value, key, "metric_cmd", cfg.label.metric_cmd);
            read_field(value, key, "workdir", cfg.label.workdir);
            read_field(value, key, "cache", cfg.label.cache);
            read_field(value, key, "timeout_s", cfg.label.timeout_s);
        } else if (key == "train") {
            read_field(value, key, "epochs", cfg.train.epochs);
            read_field(value, key, "batch", cfg.train.batch);
            read_field(value, key, "lr_backbone", cfg.train.lr_backbone);
            read_field(value, key, "lr_fa_head", cfg.train.lr_fa_head);
            read_field(value, key, "weight_decay", cfg.train.weight_decay);
            read_field(value, key, "lr_patience", cfg.train.lr_patience);
        } else if (key == "seed") {
            cfg.seed = value.get<uint64_t>();
            cfg.train.seed = cfg.seed;
        } else if (key == "workers") {
            cfg.workers = value.get<int>();
            cfg.label.workers = cfg.workers;
        } else if (key == "log_path") {
            cfg.log_path = value.get<std::string>();
        } else {
            bad_key(key, "unknown section");
        }
    }
    // The labeler shares the preprocessing Gaussian unless overridden later.
    cfg.label.gaussian = cfg.gaussian;
    cfg.label.workers = cfg.workers;
    cfg.train.seed = cfg.seed;
    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return config_from_json_text(ss.str(), path);
}

std::string config_to_json_text(const RunConfig& cfg) {
    json root;
    root["gaussian"] = {{"sigma", cfg.gaussian.sigma},
                        {"ksize", cfg.gaussian.ksize},
                        {"boundary", cfg.gaussian.boundary == Boundary::Wrap ? "wrap" : "reflect"}};
    root["sampler"] = {{"segments", cfg.sampler.segments},
                       {"frames_per_segment", cfg.sampler.frames_per_segment},
                       {"grid", cfg.sampler.grid},
                       {"patch", cfg.sampler.patch}};
    root["ffpn"] = {{"stage_channels", cfg.ffpn.stage_channels},
                    {"stage_strides", cfg.ffpn.stage_strides},
                    {"fa_hidden", cfg.ffpn.fa_hidden},
                    {"head_hidden", cfg.ffpn.head_hidden},
                    {"input_side", cfg.ffpn.input_side},
                    {"clip_frames", cfg.ffpn.clip_frames},
                    {"use_fa", cfg.ffpn.use_fa}};
    root["label"] = {{"strategies", cfg.label.strategies},
                     {"bitrates_kbps", cfg.label.bitrates_kbps},
                     {"target_kbps", cfg.label.target_kbps},
                     {"encoder_cmd", cfg.label.encoder_cmd},
                     {"decode_cmd", cfg.label.decode_cmd},
                     {"metric_cmd", cfg.label.metric_cmd},
                     {"workdir", cfg.label.workdir},
                     {"cache", cfg.label.cache},
                     {"timeout_s", cfg.label.timeout_s}};
    root["train"] = {{"epochs", cfg.train.epochs},
                     {"batch", cfg.train.batch},
                     {"lr_backbone", cfg.train.lr_backbone},
                     {"lr_fa_head", cfg.train.lr_fa_head},
                     {"weight_decay", cfg.train.weight_decay},
                     {"lr_patience", cfg.train.lr_patience}};
    root["seed"] = cfg.seed;
    root["workers"] = cfg.workers;
    root["log_path"] = cfg.log_path;
    return root.dump(2) + "\n";
}

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error("cannot write config '" + path + "'");
    f << config_to_json_text(cfg);
}

} // namespace hfprep
