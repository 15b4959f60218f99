#include "epictrl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace epictrl {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

std::string svg_network_map(const StaticGraph& g,
                            const std::vector<std::array<double, 2>>& layout,
                            const Eigen::VectorXd& spend) {
    if (static_cast<int>(layout.size()) != g.node_count() || spend.size() != g.node_count())
        throw Error("svg_network_map: layout/spend size mismatch");
    const double w = 640, h = 640, margin = 40, r = 10;
    const auto px = [&](double x) { return margin + x * (w - 2 * margin); };
    const auto py = [&](double y) { return margin + (1.0 - y) * (h - 2 * margin); };
    const double smax = std::max(spend.maxCoeff(), 1e-300);

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    for (const auto& [u, v] : g.edges()) {
        out << "<line x1=\"" << fmt(px(layout[u][0])) << "\" y1=\"" << fmt(py(layout[u][1]))
            << "\" x2=\"" << fmt(px(layout[v][0])) << "\" y2=\"" << fmt(py(layout[v][1]))
            << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
    }
    for (int i = 0; i < g.node_count(); ++i) {
        const int gray = static_cast<int>(std::lround(255.0 * (1.0 - spend(i) / smax)));
        char color[8];
        std::snprintf(color, sizeof(color), "#%02x%02x%02x", gray, gray, gray);
        out << "<circle cx=\"" << fmt(px(layout[i][0])) << "\" cy=\"" << fmt(py(layout[i][1]))
            << "\" r=\"" << r << "\" fill=\"" << color
            << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(px(layout[i][0])) << "\" y=\"" << fmt(py(layout[i][1]) + 3)
            << "\" font-size=\"8\" text-anchor=\"middle\" fill=\""
            << (spend(i) / smax > 0.5 ? "#ffffff" : "#000000") << "\">" << i << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string svg_line_plot(const std::vector<std::pair<double, double>>& points,
                          const std::string& x_label, const std::string& y_label) {
    const double w = 640, h = 480, ml = 70, mr = 20, mt = 20, mb = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& [x, y] : points) {
        if (std::isnan(y)) continue;
        if (first) {
            xmin = xmax = x;
            ymin = ymax = y;
            first = false;
        } else {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    const auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << (w - ml - mr)
        << "\" height=\"" << (h - mt - mb)
        << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + k * (xmax - xmin) / 4.0;
        const double yv = ymin + k * (ymax - ymin) / 4.0;
        out << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << (h - mb + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
        out << "<text x=\"" << (ml - 8) << "\" y=\"" << fmt(py(yv) + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
    }
    out << "<text x=\"" << (ml + (w - ml - mr) / 2) << "\" y=\"" << (h - 10)
        << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << (mt + (h - mt - mb) / 2)
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (mt + (h - mt - mb) / 2) << ")\">" << y_label << "</text>\n";
    out << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : points) {
        if (std::isnan(y)) continue;
        out << fmt(px(x)) << "," << fmt(py(y)) << " ";
    }
    out << "\"/>\n";
    for (const auto& [x, y] : points) {
        if (std::isnan(y)) continue;
        out << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
            << "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace epictrl
