#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "epictrl/graph.hpp"

namespace epictrl {

// Network map: nodes at the given unit-square layout, fill darkness
// proportional to spend (white = no investment). Deterministic output,
// no timestamps.
std::string svg_network_map(const StaticGraph& g,
                            const std::vector<std::array<double, 2>>& layout,
                            const Eigen::VectorXd& spend);

// Simple line plot for (x, y) curves, e.g. threshold versus recovery rate.
std::string svg_line_plot(const std::vector<std::pair<double, double>>& points,
                          const std::string& x_label, const std::string& y_label);

} // namespace epictrl
