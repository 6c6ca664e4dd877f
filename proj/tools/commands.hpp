#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace memstate::cli {

struct SynthArgs {
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::string prefix = "capture";
    std::optional<std::filesystem::path> manifest;
};

struct PreprocessArgs {
    std::filesystem::path input;
    std::filesystem::path output;
};

struct FitArgs {
    std::filesystem::path manifest;
    std::optional<std::filesystem::path> output;
};

// Shared by estimate and drift: traces come from the manifest, the command
// line, or both (manifest first).
struct EstimateArgs {
    std::filesystem::path fit;
    std::optional<std::filesystem::path> manifest;
    std::vector<std::filesystem::path> traces;
    std::optional<double> sigma_n;
    std::optional<double> r_series;
    std::optional<double> exclusion;
    std::optional<std::string> weighting;
    std::optional<std::filesystem::path> output;
};

struct EvalArgs {
    std::filesystem::path fit;
    std::filesystem::path trace;
    std::optional<std::size_t> index;
    std::optional<std::filesystem::path> output;
};

void run_synth(const SynthArgs& a);
void run_preprocess(const PreprocessArgs& a);
void run_fit(const FitArgs& a);
void run_estimate(const EstimateArgs& a);
void run_eval(const EvalArgs& a);
void run_drift(const EstimateArgs& a);

} // namespace memstate::cli
