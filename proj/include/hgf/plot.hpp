#pragma once

#include <string>

#include "hgf/network.hpp"

namespace hgf {

struct PlotOptions {
  int width = 960;
  int panel_height = 170;
  // Panels are stacked ancestors-first (highest node index on top).
  bool show_surprise = true;
};

// Self-contained SVG: one panel per node with the expected mean, a +/- one
// predictive-sd band, observation dots for observed nodes, and a surprise
// trace along the bottom of observed panels.
std::string trajectory_svg(const Trajectory& traj, const PlotOptions& options = {});

void write_trajectory_svg(const Trajectory& traj, const std::string& path,
                          const PlotOptions& options = {});

}  // namespace hgf
