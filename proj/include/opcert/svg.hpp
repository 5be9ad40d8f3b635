#pragma once

#include <string>

#include "opcert/report.hpp"

namespace opcert {

// Deterministic SVG (fixed 800x600 viewport, no timestamps): eigenvalue
// ladders from "spectrum" sections, singular-value decay curves, and
// counting-function staircases. Sections that are absent are skipped with a
// warning on stderr.
std::string render_plots(const Json& report);

void emit_plot(const Json& report, const std::string& path);

}  // namespace opcert
