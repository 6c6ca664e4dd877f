#include "memstate/io.hpp"

#include "memstate/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace memstate::io {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw ValidationError("cannot format number");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw ValidationError("malformed number '" + std::string(text) + "'");
    }
    return value;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    std::filesystem::path p = csv;
    p.replace_extension(".json");
    return p;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, std::string_view content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("write failed for " + p.string());
}

void check_schema(const json& j, bool required) {
    if (!j.is_object()) throw ValidationError("expected a JSON object");
    const auto it = j.find("schema_version");
    if (it == j.end()) {
        if (required) throw ValidationError("missing schema_version");
        return;
    }
    if (!it->is_number_integer() || it->get<int>() != kSchemaVersion) {
        throw ValidationError("unsupported schema_version");
    }
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                std::string_view what) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError("unknown key '" + key + "' in " + std::string(what));
    }
}

namespace {

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string(what) + ": " + e.what());
    }
}

template <typename T>
T get_field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw ValidationError(std::string("missing field ") + key);
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("bad type for field ") + key);
    }
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Calls row(fields, line_number) for each data row after checking the header.
template <typename F>
void for_each_row(std::string_view text, std::string_view header, F&& row) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!seen_header) {
            if (line != header) {
                throw ValidationError("expected CSV header '" + std::string(header) + "'");
            }
            seen_header = true;
            continue;
        }
        row(split_fields(line), line_no);
    }
    if (!seen_header) throw ValidationError("empty CSV");
}

} // namespace

std::string write_sidecar(const CaptureSidecar& s) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["r_series_ohms"] = s.r_series_ohms;
    j["n_period"] = s.n_period;
    j["sample_rate_hz"] = s.sample_rate_hz;
    return j.dump(2) + "\n";
}

CaptureSidecar parse_sidecar(std::string_view text) {
    const json j = parse_json(text, "capture sidecar");
    check_schema(j, false);
    check_keys(j, {"schema_version", "r_series_ohms", "n_period", "sample_rate_hz"},
               "capture sidecar");
    CaptureSidecar s;
    s.r_series_ohms = get_field<double>(j, "r_series_ohms");
    s.n_period = get_field<std::size_t>(j, "n_period");
    s.sample_rate_hz = get_field<double>(j, "sample_rate_hz");
    return s;
}

std::string write_capture_csv(const RawCapture& c) {
    std::string out = "t,v_total,v_series\n";
    for (const auto& s : c.samples) {
        out += format_double(s.t);
        out += ',';
        out += format_double(s.v_total);
        out += ',';
        out += format_double(s.v_series);
        out += '\n';
    }
    return out;
}

std::vector<CaptureSample> parse_capture_csv(std::string_view text) {
    std::vector<CaptureSample> out;
    for_each_row(text, "t,v_total,v_series", [&](const auto& f, std::size_t line) {
        if (f.size() != 3) {
            throw ValidationError("capture row " + std::to_string(line) + " needs 3 fields");
        }
        for (auto field : f) {
            if (field.empty()) throw ValidationError("missing field on row " + std::to_string(line));
        }
        out.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2])});
    });
    return out;
}

void save_capture(const std::filesystem::path& csv, const RawCapture& c) {
    write_file(csv, write_capture_csv(c));
    write_file(sidecar_path(csv), write_sidecar({c.r_series, c.n_period, c.sample_rate}));
}

RawCapture load_capture(const std::filesystem::path& csv) {
    RawCapture c;
    c.samples = parse_capture_csv(read_file(csv));
    const CaptureSidecar s = parse_sidecar(read_file(sidecar_path(csv)));
    c.r_series = s.r_series_ohms;
    c.n_period = s.n_period;
    c.sample_rate = s.sample_rate_hz;
    c.validate();
    return c;
}

std::string write_trace_csv(const Trace& t) {
    std::string out = "v_mem,i_mem\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
        out += format_double(t.v[k]);
        out += ',';
        out += format_double(t.i[k]);
        out += '\n';
    }
    return out;
}

ordered_json trace_sidecar_json(const Trace& t) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["n_period"] = t.n_period;
    if (t.meta.r_series) j["r_series_ohms"] = *t.meta.r_series;
    if (t.meta.sample_rate) j["sample_rate_hz"] = *t.meta.sample_rate;
    if (t.meta.amplitude) j["amplitude_v"] = *t.meta.amplitude;
    if (t.meta.t_start) j["t_start_s"] = *t.meta.t_start;
    if (!t.meta.label.empty()) j["label"] = t.meta.label;
    return j;
}

void save_trace(const std::filesystem::path& csv, const Trace& t) {
    write_file(csv, write_trace_csv(t));
    write_file(sidecar_path(csv), trace_sidecar_json(t).dump(2) + "\n");
}

bool is_trace_csv(const std::filesystem::path& csv) {
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    return header == "v_mem,i_mem";
}

Trace load_trace(const std::filesystem::path& csv) {
    Trace t;
    for_each_row(read_file(csv), "v_mem,i_mem", [&](const auto& f, std::size_t line) {
        if (f.size() != 2 || f[0].empty() || f[1].empty()) {
            throw ValidationError("trace row " + std::to_string(line) + " needs 2 fields");
        }
        t.v.push_back(parse_double(f[0]));
        t.i.push_back(parse_double(f[1]));
    });
    const auto side = sidecar_path(csv);
    if (std::filesystem::exists(side)) {
        const json j = parse_json(read_file(side), "trace sidecar");
        check_schema(j, true);
        check_keys(j,
                   {"schema_version", "n_period", "r_series_ohms", "sample_rate_hz", "amplitude_v",
                    "t_start_s", "label"},
                   "trace sidecar");
        t.n_period = get_field<std::size_t>(j, "n_period");
        if (j.contains("r_series_ohms")) t.meta.r_series = get_field<double>(j, "r_series_ohms");
        if (j.contains("sample_rate_hz")) t.meta.sample_rate = get_field<double>(j, "sample_rate_hz");
        if (j.contains("amplitude_v")) t.meta.amplitude = get_field<double>(j, "amplitude_v");
        if (j.contains("t_start_s")) t.meta.t_start = get_field<double>(j, "t_start_s");
        if (j.contains("label")) t.meta.label = get_field<std::string>(j, "label");
    }
    t.validate();
    return t;
}

ordered_json params_to_json(const ModelParams& p) {
    ordered_json j;
    j["g_m"] = p.g_m;
    j["alpha1"] = p.alpha1;
    j["alpha2"] = p.alpha2;
    j["beta1"] = p.beta1;
    j["beta2"] = p.beta2;
    return j;
}

ModelParams params_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("params must be an object");
    check_keys(j, {"g_m", "alpha1", "alpha2", "beta1", "beta2"}, "params");
    ModelParams p{get_field<double>(j, "g_m"), get_field<double>(j, "alpha1"),
                  get_field<double>(j, "alpha2"), get_field<double>(j, "beta1"),
                  get_field<double>(j, "beta2")};
    p.validate();
    return p;
}

ordered_json fit_result_to_json(const fit::FitResult& r) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = std::string(to_string(r.kind));
    j["params"] = params_to_json(r.params);
    j["states"] = r.states;
    j["loss"] = r.loss;
    j["loss_history"] = r.loss_history;
    ordered_json m = ordered_json::object();
    for (const char* name : {"mse", "mae", "mre", "mrse"}) {
        if (const auto it = r.metrics.find(name); it != r.metrics.end()) m[name] = it->second;
    }
    j["metrics"] = m;
    return j;
}

fit::FitResult fit_result_from_json(const json& j) {
    check_schema(j, true);
    check_keys(j, {"schema_version", "kind", "params", "states", "loss", "loss_history", "metrics"},
               "fit result");
    fit::FitResult r;
    r.kind = parse_model_kind(get_field<std::string>(j, "kind"));
    r.params = params_from_json(j.at("params"));
    r.states = get_field<std::vector<double>>(j, "states");
    r.loss = get_field<double>(j, "loss");
    r.loss_history = get_field<std::vector<double>>(j, "loss_history");
    if (j.contains("metrics")) {
        for (const auto& [k, v] : j.at("metrics").items()) r.metrics[k] = v.get<double>();
    }
    return r;
}

} // namespace memstate::io
