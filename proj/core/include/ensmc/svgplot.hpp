#pragma once

#include <string>

#include "ensmc/trace.hpp"

namespace ensmc {

// Trace plot in the style of the paper's figures: three overlaid series
// against record index on a base-10 log scale -- geometric mean of nu (red),
// eta (green), sigma (blue).  The trace stores natural-log values; plotted
// ordinates are value / ln(10).  Throws IoError for an empty trace.
std::string trace_svg(const Trace& trace);
void write_trace_svg(const Trace& trace, const std::string& path);

}  // namespace ensmc
