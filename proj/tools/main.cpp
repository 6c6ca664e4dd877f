// memstate command-line front end.
//
// Exit status: 0 ok, 1 usage, 2 data or validation error, 3 numerical
// failure. Failures print one JSON object on a single line to stderr.

#include "commands.hpp"

#include "memstate/errors.hpp"
#include "memstate/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

int fail(Exit code, std::string_view kind, std::string_view message) {
    nlohmann::ordered_json j;
    j["schema_version"] = memstate::io::kSchemaVersion;
    j["error"] = kind;
    j["message"] = message;
    j["exit_code"] = static_cast<int>(code);
    std::cerr << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    return code;
}

void add_estimate_options(CLI::App* cmd, memstate::cli::EstimateArgs& a) {
    cmd->add_option("--fit", a.fit, "FitResult JSON")->required();
    cmd->add_option("--manifest", a.manifest, "manifest listing traces and noise settings");
    cmd->add_option("--sigma-n", a.sigma_n, "channel noise standard deviation, volts");
    cmd->add_option("--r-series", a.r_series, "series resistance, ohms");
    cmd->add_option("--exclusion", a.exclusion, "exclusion fraction of max |v| and max |i|");
    cmd->add_option("--weighting", a.weighting, "min_variance or uniform");
    cmd->add_option("-o,--output", a.output, "output file (default stdout)");
    cmd->add_option("traces", a.traces, "trace or capture CSV files");
}

} // namespace

int main(int argc, char** argv) {
    using namespace memstate::cli;

    CLI::App app{"Memristor state characterisation: synthesis, preprocessing, fitting, estimation"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "simulate READ captures from a synth config");
    synth_cmd->add_option("--config", synth.config, "synth config JSON")->required();
    synth_cmd->add_option("--out-dir", synth.out_dir, "directory for capture CSVs")->required();
    synth_cmd->add_option("--prefix", synth.prefix, "capture file name prefix");
    synth_cmd->add_option("--manifest", synth.manifest, "also write a manifest for the captures");

    PreprocessArgs prep;
    auto* prep_cmd = app.add_subcommand("preprocess", "capture or trace CSV -> aligned, offset-free trace CSV");
    prep_cmd->add_option("input", prep.input, "input CSV")->required();
    prep_cmd->add_option("-o,--output", prep.output, "output trace CSV")->required();

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "grid-search model parameters over a manifest");
    fit_cmd->add_option("manifest", fit.manifest, "manifest JSON")->required();
    fit_cmd->add_option("-o,--output", fit.output, "output FitResult JSON");

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand("estimate", "minimum-variance state estimate per trace");
    add_estimate_options(est_cmd, est);

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "fitting metrics of a FitResult on one trace");
    eval_cmd->add_option("--fit", eval.fit, "FitResult JSON")->required();
    eval_cmd->add_option("trace", eval.trace, "trace or capture CSV")->required();
    eval_cmd->add_option("--index", eval.index, "use the fitted state of this trace index");
    eval_cmd->add_option("-o,--output", eval.output, "output file (default stdout)");

    EstimateArgs drift;
    auto* drift_cmd = app.add_subcommand("drift", "state estimates over a time series as CSV");
    add_estimate_options(drift_cmd, drift);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        return fail(kUsage, "usage", e.what());
    }

    try {
        if (*synth_cmd) run_synth(synth);
        else if (*prep_cmd) run_preprocess(prep);
        else if (*fit_cmd) run_fit(fit);
        else if (*est_cmd) run_estimate(est);
        else if (*eval_cmd) run_eval(eval);
        else if (*drift_cmd) run_drift(drift);
    } catch (const memstate::NumericalError& e) {
        return fail(kNumerical, "numerical", e.what());
    } catch (const memstate::ValidationError& e) {
        return fail(kData, "validation", e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(kData, "validation", e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(kData, "io", e.what());
    } catch (const std::exception& e) {
        return fail(kData, "error", e.what());
    }
    return kOk;
}
