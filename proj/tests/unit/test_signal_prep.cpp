#include "memstate/errors.hpp"
#include "memstate/signal_prep.hpp"
#include "memstate/synth.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace memstate;
using test::rel_err;

namespace {

RawCapture capture_of(std::vector<double> vt, std::vector<double> vs, double r, std::size_t n) {
    RawCapture c;
    c.r_series = r;
    c.n_period = n;
    c.sample_rate = 1000.0;
    for (std::size_t k = 0; k < vt.size(); ++k) c.samples.push_back({k * 1e-3, vt[k], vs[k]});
    return c;
}

synth::SimulatedCapture simulated(double x, std::size_t lead, double v_off = 0.0, double i_off = 0.0,
                                  std::size_t cycles = 3) {
    synth::SynthConfig cfg;
    cfg.state_schedule = {{0, x, {}, {}}};
    cfg.noise = {0.0, 0.1};
    cfg.lead_samples = lead;
    cfg.v_offset_inject = v_off;
    cfg.i_offset_inject = i_off;
    return synth::simulate_capture(cfg, synth::WaveformSpec::read(0.3, cycles), 0);
}

Trace triangle(std::size_t n, std::size_t cycles, std::size_t rotate) {
    synth::WaveformSpec spec = synth::WaveformSpec::read(0.2, cycles);
    spec.samples_per_period = n;
    std::vector<double> w = synth::gen_waveform(spec);
    std::rotate(w.begin(), w.end() - static_cast<std::ptrdiff_t>(rotate), w.end());
    Trace t;
    t.n_period = n;
    t.v = w;
    for (double v : w) t.i.push_back(forward_current(ModelKind::Proposed, reference::kProposed, StateValue(0.5), v));
    return t;
}

} // namespace

TEST_CASE("capture validation") {
    RawCapture c = capture_of(std::vector<double>(8, 1.0), std::vector<double>(8, 0.5), 1e5, 8);
    CHECK_NOTHROW(c.validate());
    RawCapture bad = c;
    bad.r_series = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.n_period = 7;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.n_period = 9;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.samples[3].t = bad.samples[2].t;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.samples[3].t += 1e-7;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.samples[3].v_series = std::nan("");
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("derived signals") {
    const Trace t = prep::derive_signals(capture_of({1.0, 0.3, 0, 0, 0, 0, 0, 0}, {0.4, 0.0, 0, 0, 0, 0, 0, 0}, 1e5, 8));
    REQUIRE(t.size() == 8);
    CHECK(rel_err(t.v[0], 0.6) < 1e-15);
    CHECK(rel_err(t.i[0], 4e-6) < 1e-15);
    CHECK(t.v[1] == 0.3);
    CHECK(t.i[1] == 0.0);
    CHECK(t.meta.r_series == 1e5);
    CHECK(rel_err(prep::implied_resistance(1.0, 0.5, 1e5), 1e5) < 1e-15);
    CHECK_THROWS_AS(prep::implied_resistance(1.0, 0.0, 1e5), NumericalError);
}

TEST_CASE("derived signals scale linearly with both channels") {
    const auto sim = simulated(0.5, 0);
    RawCapture scaled = sim.capture;
    for (auto& s : scaled.samples) {
        s.v_total *= 4.0;
        s.v_series *= 4.0;
    }
    const Trace a = prep::derive_signals(sim.capture);
    const Trace b = prep::derive_signals(scaled);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(b.v[k] == 4.0 * a.v[k]);
        CHECK(b.i[k] == 4.0 * a.i[k]);
    }
}

TEST_CASE("alignment recovers an injected rotation") {
    const Trace rotated = triangle(160, 2, 13);
    const Trace out = prep::align_periods(rotated);
    CHECK(out.meta.n_discard == 13u);
    CHECK(out.size() == 160u);
    const Trace clean = triangle(160, 2, 0);
    for (std::size_t k = 0; k < out.size(); ++k) CHECK(out.v[k] == clean.v[k]);
}

TEST_CASE("aligned input keeps every whole period") {
    Trace t = triangle(160, 3, 0);
    t.v.resize(400);
    t.i.resize(400);
    const Trace out = prep::align_periods(t);
    CHECK(out.meta.n_discard == 0u);
    CHECK(out.size() == 320u);
}

TEST_CASE("alignment is idempotent") {
    for (std::size_t rot : {0u, 1u, 13u, 80u, 159u}) {
        const Trace once = prep::align_periods(triangle(160, 2, rot));
        const Trace twice = prep::align_periods(once);
        CHECK(twice.v == once.v);
        CHECK(twice.i == once.i);
        CHECK(twice.meta.n_discard == 0u);
        CHECK(once.size() % 160 == 0);
    }
}

TEST_CASE("alignment failures") {
    Trace t = triangle(16, 2, 0);
    for (double& v : t.v) v += 1.0;
    CHECK_THROWS_WITH_AS(prep::align_periods(t), "alignment failed", ValidationError);
    Trace short_trace = triangle(16, 1, 0);
    short_trace.v.resize(10);
    short_trace.i.resize(10);
    CHECK_THROWS_AS(prep::align_periods(short_trace), ValidationError);
}

TEST_CASE("offset removal leaves a clean trace alone") {
    const Trace t = prep::align_periods(prep::derive_signals(simulated(0.5, 0).capture));
    const auto [out, corr] = prep::remove_offsets(t);
    CHECK(std::abs(corr.v_offset) < 1e-4 * 0.3);
    CHECK(out.size() == t.size());
    CHECK(corr.residual >= 0.0);
}

TEST_CASE("offset removal recovers injected offsets") {
    const auto sim = simulated(0.5, 0, 5e-3, 5e-3);
    const Trace t = prep::align_periods(prep::derive_signals(sim.capture));
    const double before = prep::quadrant_objective(t, 0.0, 0.0);
    const std::size_t count_before = prep::quadrant_count(t, 0.0, 0.0);
    const auto [out, corr] = prep::remove_offsets(t);
    CHECK(rel_err(corr.v_offset, 5e-3) < 0.1);
    CHECK(out.size() == t.size());
    CHECK(prep::quadrant_objective(t, corr.v_offset, corr.i_offset) <= before);
    CHECK(prep::quadrant_count(t, corr.v_offset, corr.i_offset) <= count_before);
    CHECK(std::abs(corr.v_offset) <= prep::OffsetConfig{}.max_v_offset);
}

TEST_CASE("pipeline reproduces the generating pairs") {
    const auto sim = simulated(0.5, 13);
    const auto r = prep::preprocess(sim.capture);
    CHECK(r.trace.meta.n_discard == 13u);
    REQUIRE(r.trace.size() == 320u);
    // Normwise: sample-wise ratios are meaningless at the zero crossings.
    double dv = 0.0, di = 0.0, vmax = 0.0, imax = 0.0;
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
        const std::size_t src = k + 13;
        dv = std::max(dv, std::abs(r.trace.v[k] - sim.v_mem[src]));
        di = std::max(di, std::abs(r.trace.i[k] - sim.i_mem[src]));
        vmax = std::max(vmax, std::abs(sim.v_mem[src]));
        imax = std::max(imax, std::abs(sim.i_mem[src]));
    }
    CHECK(dv / vmax < 1e-9);
    CHECK(di / imax < 1e-9);
}

TEST_CASE("preprocessing a prepared trace changes nothing") {
    const auto first = prep::preprocess(simulated(0.3, 21, 2e-3, 0.0).capture);
    const auto second = prep::preprocess(first.trace);
    CHECK(second.trace.v == first.trace.v);
    CHECK(second.trace.i == first.trace.i);
    CHECK(second.correction.identity);
}
