#pragma once

#include <string>
#include <vector>

#include "obskit/placement.hpp"

namespace obskit::app {

/// Planform with one coloured cell per station; values are min-max
/// normalized before colouring. Span runs left to right.
std::string heatmap_svg(const Polygon& planform, const std::vector<Point2>& stations,
                        const std::vector<double>& values, double cell_x, double cell_y,
                        const std::string& title);

/// Planform, veins, candidate sites and the selected sensors.
std::string placement_svg(const Polygon& planform, const std::vector<Polyline>& veins,
                          const std::vector<SensorSite>& sites, const std::vector<int>& selected,
                          const std::string& title);

std::string xml_escape(const std::string& text);

}  // namespace obskit::app
