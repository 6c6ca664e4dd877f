#pragma once

// JSON documents the CLI consumes: the fit manifest and the synth config.
// Unknown keys are rejected at every level.

#include "memstate/estimator.hpp"
#include "memstate/fit/grid_search.hpp"
#include "memstate/synth.hpp"

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace memstate::cli {

struct Manifest {
    std::vector<std::filesystem::path> traces;   // resolved against the manifest directory
    ModelKind kind = ModelKind::Proposed;
    fit::GridSearchConfig grid;
    fit::LossConfig loss;
    estimate::NoiseModel noise;
    bool has_noise = false;
    double exclusion_fraction = 0.3;
    estimate::Weighting weighting = estimate::Weighting::MinVariance;
    std::optional<std::filesystem::path> output;
};

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

nlohmann::ordered_json manifest_to_json(const Manifest& m, const std::filesystem::path& base_dir);

struct SynthFile {
    synth::SynthConfig config;
    synth::WaveformSpec waveform;
};

SynthFile parse_synth_config(std::string_view text);

estimate::Weighting parse_weighting(std::string_view name);
std::string_view to_string(estimate::Weighting w);

} // namespace memstate::cli
