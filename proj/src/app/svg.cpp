#include "obskit/app/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace obskit::app {

namespace {

constexpr double kScale = 12.0;  // px per mm
constexpr double kMargin = 30.0;

struct Frame {
    Point2 lo;
    double width = 0.0;
    double height = 0.0;

    // Span (y) maps to the horizontal axis, chord (x) downwards.
    Point2 map(const Point2& p) const {
        return Point2(kMargin + (p.y() - lo.y()) * 1e3 * kScale, kMargin + (p.x() - lo.x()) * 1e3 * kScale);
    }
};

Frame make_frame(const Polygon& planform) {
    Frame f;
    f.lo = planform.min_corner();
    const Point2 hi = planform.max_corner();
    f.width = (hi.y() - f.lo.y()) * 1e3 * kScale + 2 * kMargin;
    f.height = (hi.x() - f.lo.x()) * 1e3 * kScale + 2 * kMargin + 20.0;
    return f;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string header(const Frame& f, const std::string& title) {
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width) + "\" height=\"" + num(f.height) +
         "\" viewBox=\"0 0 " + num(f.width) + " " + num(f.height) + "\">\n";
    s += "<title>" + xml_escape(title) + "</title>\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kMargin) + "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" + xml_escape(title) +
         "</text>\n";
    return s;
}

std::string outline(const Frame& f, const Polygon& planform) {
    std::string pts;
    for (const auto& v : planform.vertices) {
        const Point2 q = f.map(v);
        pts += num(q.x()) + "," + num(q.y()) + " ";
    }
    return "<polygon points=\"" + pts + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
}

// Piecewise-linear approximation of the viridis colour map.
std::string colour(double t) {
    static const std::array<std::array<double, 3>, 5> stops = {{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double u = t - static_cast<double>(k);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(stops[k][0] + u * (stops[k + 1][0] - stops[k][0]))),
                  static_cast<int>(std::lround(stops[k][1] + u * (stops[k + 1][1] - stops[k][1]))),
                  static_cast<int>(std::lround(stops[k][2] + u * (stops[k + 1][2] - stops[k][2]))));
    return buf;
}

}  // namespace

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string heatmap_svg(const Polygon& planform, const std::vector<Point2>& stations,
                        const std::vector<double>& values, double cell_x, double cell_y,
                        const std::string& title) {
    const Frame f = make_frame(planform);
    std::string s = header(f, title);
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        lo = any ? std::min(lo, v) : v;
        hi = any ? std::max(hi, v) : v;
        any = true;
    }
    const double w = cell_y * 1e3 * kScale;
    const double h = cell_x * 1e3 * kScale;
    for (std::size_t i = 0; i < stations.size() && i < values.size(); ++i) {
        const Point2 c = f.map(stations[i]);
        const double t = (hi > lo && std::isfinite(values[i])) ? (values[i] - lo) / (hi - lo) : 0.0;
        s += "<rect x=\"" + num(c.x() - w / 2) + "\" y=\"" + num(c.y() - h / 2) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"" + colour(t) + "\"/>\n";
    }
    s += outline(f, planform);
    s += "</svg>\n";
    return s;
}

std::string placement_svg(const Polygon& planform, const std::vector<Polyline>& veins,
                          const std::vector<SensorSite>& sites, const std::vector<int>& selected,
                          const std::string& title) {
    const Frame f = make_frame(planform);
    std::string s = header(f, title);
    s += outline(f, planform);
    for (const auto& line : veins) {
        std::string pts;
        for (const auto& v : line) {
            const Point2 q = f.map(v);
            pts += num(q.x()) + "," + num(q.y()) + " ";
        }
        s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
    }
    for (const auto& site : sites) {
        const Point2 q = f.map(site.position);
        s += "<circle cx=\"" + num(q.x()) + "\" cy=\"" + num(q.y()) + "\" r=\"1.5\" fill=\"#bbbbbb\"/>\n";
    }
    for (int i : selected) {
        const SensorSite& site = sites[static_cast<std::size_t>(i)];
        const Point2 q = f.map(site.position);
        if (site.kind == StrainKind::bending) {
            s += "<circle cx=\"" + num(q.x()) + "\" cy=\"" + num(q.y()) +
                 "\" r=\"5\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\"/>\n";
        } else {
            s += "<rect x=\"" + num(q.x() - 4) + "\" y=\"" + num(q.y() - 4) +
                 "\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n";
        }
    }
    s += "<text x=\"" + num(kMargin) + "\" y=\"" + num(f.height - 8) +
         "\" font-family=\"sans-serif\" font-size=\"11\">circle: bending, square: shear</text>\n";
    s += "</svg>\n";
    return s;
}

}  // namespace obskit::app
