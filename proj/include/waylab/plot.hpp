#pragma once

#include <algorithm>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "waylab/path.hpp"
#include "waylab/sim.hpp"

namespace waylab {

/// Overhead SVG of the true waypoints (one marker series) and the flown
/// trajectories (another), axes in meters, north up. Output bytes are a
/// pure function of the inputs.
inline std::string render_path_plot(const WaypointPath& path,
                                    std::span<const RolloutTrace> traces) {
    if (traces.empty()) throw empty_traces_error("plot: no traces given");
    path.validate();

    double min_x = path.waypoints[0].x, max_x = min_x;
    double min_y = path.waypoints[0].y, max_y = min_y;
    auto grow = [&](Vec2 p) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    };
    for (const auto& w : path.waypoints) grow(w);
    for (const auto& trace : traces) {
        for (const auto& row : trace.rows) grow(row.pose.position());
    }
    const double span_x = std::max(max_x - min_x, 1.0);
    const double span_y = std::max(max_y - min_y, 1.0);
    const double margin = 0.08 * std::max(span_x, span_y);  // >= 5% of the hull
    min_x -= margin;
    max_x += margin;
    min_y -= margin;
    max_y += margin;

    const double canvas_w = 720.0;
    const double scale = canvas_w / (max_x - min_x);
    const double canvas_h = (max_y - min_y) * scale;
    auto px = [&](double x) { return (x - min_x) * scale; };
    auto py = [&](double y) { return (max_y - y) * scale; };  // north up

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
           format_double(canvas_w) + " " + format_double(canvas_h) + "\">\n";
    svg += "<rect width=\"" + format_double(canvas_w) + "\" height=\"" +
           format_double(canvas_h) + "\" fill=\"#fafafa\" stroke=\"#444\"/>\n";

    // Axis ticks every quarter of the span, labeled in meters.
    svg += "<g class=\"axes\" font-size=\"11\" fill=\"#333\">\n";
    for (int k = 0; k <= 4; ++k) {
        const double x = min_x + (max_x - min_x) * k / 4.0;
        const double y = min_y + (max_y - min_y) * k / 4.0;
        svg += "<text x=\"" + format_double(px(x)) + "\" y=\"" +
               format_double(canvas_h - 3.0) + "\">" + format_double(std::round(x * 10) / 10) +
               "</text>\n";
        svg += "<text x=\"2\" y=\"" + format_double(py(y)) + "\">" +
               format_double(std::round(y * 10) / 10) + "</text>\n";
    }
    svg += "<text x=\"" + format_double(canvas_w / 2) + "\" y=\"" +
           format_double(canvas_h - 3.0) + "\">x [m]</text>\n";
    svg += "<text x=\"2\" y=\"12\">y [m]</text>\n";
    svg += "</g>\n";

    svg += "<g class=\"legend\" font-size=\"12\">\n";
    svg += "<circle cx=\"60\" cy=\"18\" r=\"5\" fill=\"#c22\"/>"
           "<text x=\"70\" y=\"22\">waypoints</text>\n";
    svg += "<circle cx=\"160\" cy=\"18\" r=\"2.5\" fill=\"#26c\"/>"
           "<text x=\"170\" y=\"22\">trajectory</text>\n";
    svg += "</g>\n";

    for (std::size_t i = 0; i < traces.size(); ++i) {
        svg += "<g class=\"trace\" id=\"trace" + std::to_string(i) + "\">\n";
        std::string points;
        for (const auto& row : traces[i].rows) {
            points += format_double(px(row.pose.x)) + ',' + format_double(py(row.pose.y)) + ' ';
        }
        svg += "<polyline fill=\"none\" stroke=\"#9bd\" stroke-width=\"1\" points=\"" + points +
               "\"/>\n";
        for (const auto& row : traces[i].rows) {
            svg += "<circle class=\"trajectory\" cx=\"" + format_double(px(row.pose.x)) +
                   "\" cy=\"" + format_double(py(row.pose.y)) + "\" r=\"2.5\" fill=\"#26c\"/>\n";
        }
        svg += "</g>\n";
    }

    svg += "<g class=\"waypoints\">\n";
    for (const auto& w : path.waypoints) {
        svg += "<circle class=\"waypoint\" cx=\"" + format_double(px(w.x)) + "\" cy=\"" +
               format_double(py(w.y)) + "\" r=\"5\" fill=\"#c22\"/>\n";
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

inline void emit_path_plot(const WaypointPath& path, std::span<const RolloutTrace> traces,
                           const std::filesystem::path& file) {
    write_text_file(file, render_path_plot(path, traces));
}

}  // namespace waylab
