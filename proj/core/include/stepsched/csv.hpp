#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "stepsched/optimizer.hpp"

namespace stepsched {

/// 17 significant digits — lossless double round-trip.
inline std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes the per-iteration trace as CSV: header `t,eta,value_gap,grad_sq`,
/// one row per iteration t = 1..T.
inline void write_trace_csv(const RunTrace& trace, std::ostream& out) {
    out << "t,eta,value_gap,grad_sq\n";
    for (std::size_t i = 0; i < trace.eta.size(); ++i) {
        out << (i + 1) << ',' << format17(trace.eta[i]) << ',' << format17(trace.value_gap[i])
            << ',' << format17(trace.grad_sq[i]) << '\n';
    }
}

}  // namespace stepsched
