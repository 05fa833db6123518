#pragma once

#include <string>

#include "hfprep/ffpn.hpp"
#include "hfprep/manifest.hpp"
#include "hfprep/rd_labeler.hpp"

namespace hfprep {

// Everything a run needs, loadable from one JSON file. Defaults match the
// documented pipeline hyperparameters; a missing or empty file yields the
// full default configuration.
struct RunConfig {
    GaussianSpec gaussian;     // shared preprocessing/mask low-pass
    SamplerConfig sampler;
    FfpnConfig ffpn;
    LabelJobSpec label;
    TrainSchedule train;
    uint64_t seed = 0;
    int workers = 1;
    std::string log_path = "hfprep_runs.log";
};

RunConfig default_config();

// Parses and validates; every failure names the offending key, parse
// errors carry a line number.
RunConfig load_config(const std::string& path);
RunConfig config_from_json_text(const std::string& text, const std::string& source_name);

std::string config_to_json_text(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

void validate_config(const RunConfig& cfg);

} // namespace hfprep
