#include "hgf/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

#include "hgf/io.hpp"

namespace hgf {

namespace {

struct Extent {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return lo > hi; }
  void pad() {
    if (empty()) {
      lo = 0.0;
      hi = 1.0;
      return;
    }
    const double span = hi - lo;
    const double margin = span > 0.0 ? 0.08 * span : 0.5;
    lo -= margin;
    hi += margin;
  }
};

std::string num(double v) {
  // Fixed short decimals keep the file small; pixel resolution is plenty.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string trajectory_svg(const Trajectory& traj, const PlotOptions& options) {
  const int n = traj.node_count();
  const long steps = traj.steps();
  const int margin_left = 56;
  const int margin_right = 16;
  const int margin_top = 24;
  const int gap = 26;
  const int width = options.width;
  const int panel = options.panel_height;
  const int height = margin_top + n * panel + (n - 1) * gap + 36;
  const double plot_w = width - margin_left - margin_right;

  Extent time_extent;
  for (double t : traj.time) time_extent.add(t);
  if (time_extent.empty()) time_extent = {0.0, 1.0};
  const double t_lo = time_extent.lo;
  const double t_span = std::max(time_extent.hi - time_extent.lo, 1e-12);
  auto x_of = [&](double t) {
    return margin_left + (t - t_lo) / t_span * plot_w;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  for (int panel_idx = 0; panel_idx < n; ++panel_idx) {
    // Highest node on top: deep ancestors first, the observed level last.
    const int node = n - 1 - panel_idx;
    const NodeTrace& trace = traj.nodes[static_cast<std::size_t>(node)];
    const int top = margin_top + panel_idx * (panel + gap);
    const int bottom = top + panel;

    Extent y_extent;
    std::vector<double> sd(static_cast<std::size_t>(steps),
                           std::numeric_limits<double>::quiet_NaN());
    for (long s = 0; s < steps; ++s) {
      y_extent.add(trace.expected_mean[s]);
      y_extent.add(trace.mean[s]);
      if (trace.expected_precision[s] > 0.0 &&
          std::isfinite(trace.expected_precision[s])) {
        sd[static_cast<std::size_t>(s)] =
            std::sqrt(1.0 / trace.expected_precision[s]);
        y_extent.add(trace.expected_mean[s] + sd[s]);
        y_extent.add(trace.expected_mean[s] - sd[s]);
      }
      y_extent.add(trace.observation[s]);
    }
    y_extent.pad();
    auto y_of = [&](double v) {
      return bottom - (v - y_extent.lo) / (y_extent.hi - y_extent.lo) * panel;
    };

    svg << "<rect x=\"" << margin_left << "\" y=\"" << top << "\" width=\""
        << num(plot_w) << "\" height=\"" << panel
        << "\" fill=\"#f8f8fb\" stroke=\"#cccccc\"/>\n";
    svg << "<text x=\"" << margin_left << "\" y=\"" << top - 7
        << "\" font-family=\"sans-serif\" font-size=\"13\">node " << node
        << " (" << to_string(traj.kinds[static_cast<std::size_t>(node)])
        << ")</text>\n";
    svg << "<text x=\"8\" y=\"" << top + 14
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\">"
        << format_double(std::round(y_extent.hi * 100.0) / 100.0)
        << "</text>\n";
    svg << "<text x=\"8\" y=\"" << bottom
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\">"
        << format_double(std::round(y_extent.lo * 100.0) / 100.0)
        << "</text>\n";

    // Predictive band as a closed polygon: forward upper edge, reverse lower.
    std::ostringstream band;
    bool band_any = false;
    for (long s = 0; s < steps; ++s) {
      if (std::isnan(sd[static_cast<std::size_t>(s)])) continue;
      band << (band_any ? " " : "") << num(x_of(traj.time[s])) << ','
           << num(y_of(trace.expected_mean[s] + sd[s]));
      band_any = true;
    }
    for (long s = steps - 1; s >= 0; --s) {
      if (std::isnan(sd[static_cast<std::size_t>(s)])) continue;
      band << ' ' << num(x_of(traj.time[s])) << ','
           << num(y_of(trace.expected_mean[s] - sd[s]));
    }
    if (band_any) {
      svg << "<polygon points=\"" << band.str()
          << "\" fill=\"#aac4e8\" fill-opacity=\"0.45\" stroke=\"none\"/>\n";
    }

    std::ostringstream line;
    bool line_any = false;
    for (long s = 0; s < steps; ++s) {
      if (!std::isfinite(trace.expected_mean[s])) continue;
      line << (line_any ? " " : "") << num(x_of(traj.time[s])) << ','
           << num(y_of(trace.expected_mean[s]));
      line_any = true;
    }
    if (line_any) {
      svg << "<polyline points=\"" << line.str()
          << "\" fill=\"none\" stroke=\"#2c5aa0\" stroke-width=\"1.5\"/>\n";
    }

    bool observed = false;
    for (long s = 0; s < steps; ++s) {
      const double obs = trace.observation[s];
      if (std::isnan(obs)) continue;
      observed = true;
      svg << "<circle cx=\"" << num(x_of(traj.time[s])) << "\" cy=\""
          << num(y_of(obs)) << "\" r=\"2.2\" fill=\"#d1495b\"/>\n";
    }

    if (observed && options.show_surprise) {
      Extent s_extent;
      for (long s = 0; s < steps; ++s) s_extent.add(trace.surprise[s]);
      if (!s_extent.empty()) {
        s_extent.pad();
        const double band_h = panel * 0.25;
        std::ostringstream strace;
        bool any = false;
        for (long s = 0; s < steps; ++s) {
          if (!std::isfinite(trace.surprise[s])) continue;
          const double frac = (trace.surprise[s] - s_extent.lo) /
                              (s_extent.hi - s_extent.lo);
          strace << (any ? " " : "") << num(x_of(traj.time[s])) << ','
                 << num(bottom - frac * band_h);
          any = true;
        }
        svg << "<polyline points=\"" << strace.str()
            << "\" fill=\"none\" stroke=\"#e8a33d\" stroke-width=\"1\"/>\n";
      }
    }
  }

  const int axis_y = margin_top + n * panel + (n - 1) * gap;
  svg << "<text x=\"" << margin_left << "\" y=\"" << axis_y + 24
      << "\" font-family=\"sans-serif\" font-size=\"12\">time "
      << format_double(t_lo) << "</text>\n";
  svg << "<text x=\"" << width - margin_right
      << "\" y=\"" << axis_y + 24
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
      << format_double(time_extent.hi) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_trajectory_svg(const Trajectory& traj, const std::string& path,
                          const PlotOptions& options) {
  write_text_file(path, trajectory_svg(traj, options));
}

}  // namespace hgf
