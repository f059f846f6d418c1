#include "senc/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "senc/csv.hpp"

namespace senc {

std::string manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["subcommand"] = m.subcommand;
    j["tool_version"] = m.tool_version;
    j["inputs"] = m.inputs;
    if (m.seed)
        j["seed"] = *m.seed;
    else
        j["seed"] = nullptr;
    j["outputs"] = m.outputs;
    return j.dump(2) + "\n";
}

namespace {

struct Panel {
    double x0, y0, w, h;
    double xmin, xmax, ymin, ymax;

    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
    double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void axes(std::ostringstream& os, const Panel& p, const std::string& title, const std::string& xlabel,
          const std::string& ylabel) {
    os << "<rect x=\"" << csv::fmt(p.x0, 1) << "\" y=\"" << csv::fmt(p.y0, 1) << "\" width=\"" << csv::fmt(p.w, 1)
       << "\" height=\"" << csv::fmt(p.h, 1) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << csv::fmt(p.x0 + p.w / 2, 1) << "\" y=\"" << csv::fmt(p.y0 - 6, 1)
       << "\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
    os << "<text x=\"" << csv::fmt(p.x0 + p.w / 2, 1) << "\" y=\"" << csv::fmt(p.y0 + p.h + 30, 1)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << xlabel << "</text>\n";
    os << "<text x=\"" << csv::fmt(p.x0 - 38, 1) << "\" y=\"" << csv::fmt(p.y0 + p.h / 2, 1)
       << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 " << csv::fmt(p.x0 - 38, 1) << ' '
       << csv::fmt(p.y0 + p.h / 2, 1) << ")\">" << ylabel << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = p.xmin + (p.xmax - p.xmin) * i / 4.0;
        const double yv = p.ymin + (p.ymax - p.ymin) * i / 4.0;
        os << "<text x=\"" << csv::fmt(p.px(xv), 1) << "\" y=\"" << csv::fmt(p.y0 + p.h + 14, 1)
           << "\" text-anchor=\"middle\" font-size=\"9\">" << csv::fmt(xv, 1) << "</text>\n";
        os << "<text x=\"" << csv::fmt(p.x0 - 4, 1) << "\" y=\"" << csv::fmt(p.py(yv) + 3, 1)
           << "\" text-anchor=\"end\" font-size=\"9\">" << csv::fmt(yv, 2) << "</text>\n";
    }
}

void polyline(std::ostringstream& os, const Panel& p, const std::vector<std::pair<double, double>>& pts,
              const char* color) {
    if (pts.empty()) return;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) os << csv::fmt(p.px(x), 1) << ',' << csv::fmt(p.py(y), 1) << ' ';
    os << "\"/>\n";
    for (const auto& [x, y] : pts)
        os << "<circle cx=\"" << csv::fmt(p.px(x), 1) << "\" cy=\"" << csv::fmt(p.py(y), 1) << "\" r=\"2\" fill=\""
           << color << "\"/>\n";
}

double nice_max(double v) {
    if (!(v > 0.0)) return 1.0;
    const double mag = std::pow(10.0, std::floor(std::log10(v)));
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (v <= m * mag) return m * mag;
    return 10.0 * mag;
}

}  // namespace

std::string accuracy_svg(const AccuracyTable& t) {
    static constexpr const char* names[6] = {"X", "Y", "Z", "Roll", "Pitch", "Yaw"};
    double ymax = 0.0;
    for (const auto& row : t.cells)
        for (const auto& c : row)
            if (c && std::isfinite(*c)) ymax = std::max(ymax, *c);
    ymax = nice_max(ymax);
    double xmin = t.displacements.empty() ? -1.0 : t.displacements.front();
    double xmax = t.displacements.empty() ? 1.0 : t.displacements.back();
    if (xmax <= xmin) {
        xmin -= 1.0;
        xmax += 1.0;
    }

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"560\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"900\" height=\"560\" fill=\"white\"/>\n";
    for (int a = 0; a < 6; ++a) {
        const Panel p{70.0 + (a % 3) * 280.0, 40.0 + (a / 3) * 270.0, 220.0, 190.0, xmin, xmax, 0.0, ymax};
        const bool rot = a >= 3;
        axes(os, p, names[a], rot ? "displacement (deg)" : "displacement (mm)", "|dP| (mm)");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t r = 0; r < t.displacements.size(); ++r) {
            const auto& c = t.cells[r][static_cast<std::size_t>(a)];
            if (c && std::isfinite(*c)) pts.emplace_back(t.displacements[r], *c);
        }
        polyline(os, p, pts, "#1f77b4");
    }
    os << "</svg>\n";
    return os.str();
}

std::string sweep_svg(const CalibrationSweep& s) {
    double ymax = 0.0;
    for (const auto& r : s.rows)
        if (std::isfinite(r.max_mm)) ymax = std::max(ymax, r.max_mm);
    ymax = nice_max(ymax);
    double xmin = s.rows.empty() ? -1.0 : s.rows.front().offset_mm;
    double xmax = s.rows.empty() ? 1.0 : s.rows.back().offset_mm;
    for (const auto& r : s.rows) {
        xmin = std::min(xmin, r.offset_mm);
        xmax = std::max(xmax, r.offset_mm);
    }
    if (xmax <= xmin) {
        xmin -= 1.0;
        xmax += 1.0;
    }

    const Panel p{80.0, 40.0, 520.0, 300.0, xmin, xmax, 0.0, ymax};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"680\" height=\"400\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"680\" height=\"400\" fill=\"white\"/>\n";
    axes(os, p, "String length offset sweep", "offset (mm)", "error (mm)");
    std::vector<std::pair<double, double>> rms, mx;
    for (const auto& r : s.rows) {
        if (std::isfinite(r.rms_mm)) rms.emplace_back(r.offset_mm, r.rms_mm);
        if (std::isfinite(r.max_mm)) mx.emplace_back(r.offset_mm, r.max_mm);
    }
    polyline(os, p, rms, "#1f77b4");
    polyline(os, p, mx, "#d62728");
    os << "<line x1=\"" << csv::fmt(p.px(s.best_offset), 1) << "\" y1=\"" << csv::fmt(p.y0, 1) << "\" x2=\""
       << csv::fmt(p.px(s.best_offset), 1) << "\" y2=\"" << csv::fmt(p.y0 + p.h, 1)
       << "\" stroke=\"#2ca02c\" stroke-dasharray=\"4 3\"/>\n";
    os << "<text x=\"612\" y=\"60\" font-size=\"11\" fill=\"#1f77b4\">RMS</text>\n";
    os << "<text x=\"612\" y=\"76\" font-size=\"11\" fill=\"#d62728\">max</text>\n";
    os << "<text x=\"612\" y=\"92\" font-size=\"11\" fill=\"#2ca02c\">best " << csv::fmt(s.best_offset, 2)
       << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace senc
