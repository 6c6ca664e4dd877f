#pragma once

// File formats:
//   capture CSV   header t,v_total,v_series        + sidecar <stem>.json
//   trace CSV     header v_mem,i_mem               + sidecar <stem>.json
//   FitResult, estimate, manifest and synth config JSON
// Doubles are written in shortest round-trip form. Every JSON document we
// write carries "schema_version"; readers reject other versions.

#include "memstate/fit/grid_search.hpp"
#include "memstate/trace.hpp"

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace memstate::io {

inline constexpr int kSchemaVersion = 1;

std::string format_double(double value);
double parse_double(std::string_view text);

// <dir>/<stem>.json next to a CSV file.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

struct CaptureSidecar {
    double r_series_ohms = 0.0;
    std::size_t n_period = 0;
    double sample_rate_hz = 0.0;

    friend bool operator==(const CaptureSidecar&, const CaptureSidecar&) = default;
};

std::string write_sidecar(const CaptureSidecar& s);
CaptureSidecar parse_sidecar(std::string_view text);

// Rows with missing or extra fields are rejected.
std::string write_capture_csv(const RawCapture& c);
std::vector<CaptureSample> parse_capture_csv(std::string_view text);

void save_capture(const std::filesystem::path& csv, const RawCapture& c);
RawCapture load_capture(const std::filesystem::path& csv);

std::string write_trace_csv(const Trace& t);
nlohmann::ordered_json trace_sidecar_json(const Trace& t);
void save_trace(const std::filesystem::path& csv, const Trace& t);
// Reads the sidecar when present (n_period, r_series, annotations).
Trace load_trace(const std::filesystem::path& csv);

// True if the CSV header names a trace (v_mem,i_mem) rather than a capture.
bool is_trace_csv(const std::filesystem::path& csv);

nlohmann::ordered_json params_to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

nlohmann::ordered_json fit_result_to_json(const fit::FitResult& r);
fit::FitResult fit_result_from_json(const nlohmann::json& j);

// Throws ValidationError unless j["schema_version"] == kSchemaVersion.
void check_schema(const nlohmann::json& j, bool required = true);

// Rejects keys outside `allowed`.
void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                std::string_view what);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

} // namespace memstate::io
