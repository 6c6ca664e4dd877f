#pragma once

// Raw capture -> memristor trace: series-circuit derivation, period
// alignment, and systematic offset removal.

#include "memstate/trace.hpp"

#include <utility>

namespace memstate::prep {

// v_mem = v_total - v_series, i_mem = v_series / r_series.
Trace derive_signals(const RawCapture& capture);

// r_mem = R_s * (V_t / V_s - 1).
double implied_resistance(double v_total, double v_series, double r_series);

struct AlignConfig {
    // A cycle-start candidate must satisfy |v| <= fraction * max|v|.
    double min_abs_fraction = 0.02;
};

// Finds the minimum-|v| sample inside the first period that is followed by a
// rising voltage, drops the N_discard samples before it and truncates the
// tail to whole periods. N_discard is recorded in meta.n_discard. Needs at
// least one period; only starts that leave a whole period are considered.
// Throws ValidationError("alignment failed") when no candidate qualifies.
Trace align_periods(const Trace& trace, const AlignConfig& cfg = {});

struct OffsetConfig {
    double max_v_offset = 0.05;  // volts
    double tolerance = 1e-12;    // on the normalized objective
    int max_iterations = 5000;
};

struct OffsetCorrection {
    double v_offset = 0.0;
    double i_offset = 0.0;
    double residual = 0.0;   // normalized objective at the returned offsets
    bool identity = false;   // optimizer could not improve on zero offsets
};

// Sum of |v*i| over samples in the second and fourth quadrants, after
// shifting the origin to (v_offset, i_offset).
double quadrant_objective(const Trace& trace, double v_offset, double i_offset);

// Number of samples with v*i < 0 after the shift.
std::size_t quadrant_count(const Trace& trace, double v_offset, double i_offset);

// Nelder-Mead over (v_offset, i_offset) on the normalized quadrant objective.
// When the series resistance is known, the mean applied voltage over whole
// periods (v + R*i) pins the offset pair along the VI curve.
std::pair<Trace, OffsetCorrection> remove_offsets(const Trace& trace,
                                                  const OffsetConfig& cfg = {});

struct PrepConfig {
    AlignConfig align;
    OffsetConfig offsets;
};

struct PrepResult {
    Trace trace;
    OffsetCorrection correction;
};

// derive -> align -> remove_offsets.
PrepResult preprocess(const RawCapture& capture, const PrepConfig& cfg = {});

// align -> remove_offsets on an already-derived trace.
PrepResult preprocess(const Trace& trace, const PrepConfig& cfg = {});

} // namespace memstate::prep
