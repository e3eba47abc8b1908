#pragma once

#include <string>
#include <vector>

#include "qclmi/core.hpp"
#include "qclmi/flows.hpp"

namespace qclmi {

// Line chart of an entropy series: quantum curves solid, classical dashed,
// analytic overlays dotted. Throws EmptyInput when nothing is plottable.
std::string render_entropy_svg(const EntropySeries& series);

// Scatter plot of Poincaré section points, colored by seed.
std::string render_section_svg(const std::vector<SectionPoint>& points);

}  // namespace qclmi
