#pragma once

#include <string>

#include "psafem/adaptive.hpp"

namespace psafem {

/// CSV with the exact header
/// iter,N,num_cells,omega_h,eta_sq,err,eff,num_marked,wall_ms
/// Doubles are written with 17 significant digits so a round-trip reproduces
/// the trace bit-exactly.
void write_trace_csv(const std::string& path, const AdaptiveTrace& trace);
AdaptiveTrace read_trace_csv(const std::string& path);

std::string format_double(double v);

} // namespace psafem
