#include "vhc/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vhc/errors.hpp"
#include "vhc/grid.hpp"

namespace vhc {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace

SvgPlot::SvgPlot(double x_lo, double x_hi, double y_lo, double y_hi, int width, int height)
    : x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi), width_(width), height_(height) {}

double SvgPlot::map_x(double x) const {
    return margin_ + (x - x_lo_) / (x_hi_ - x_lo_) * (width_ - 2 * margin_);
}

double SvgPlot::map_y(double y) const {
    return height_ - margin_ - (y - y_lo_) / (y_hi_ - y_lo_) * (height_ - 2 * margin_);
}

void SvgPlot::add_curve(const std::vector<double>& x, const std::vector<double>& y,
                        const std::string& color, double stroke_width, const std::string& dash) {
    if (x.size() != y.size() || x.size() < 2) return;
    std::ostringstream p;
    int pts = 0;
    p << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << stroke_width
      << "\"";
    if (!dash.empty()) p << " stroke-dasharray=\"" << dash << "\"";
    p << " points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        double cy = std::min(std::max(y[i], y_lo_), y_hi_);
        p << fmt(map_x(x[i])) << ',' << fmt(map_y(cy)) << ' ';
        ++pts;
    }
    p << "\"/>\n";
    if (pts >= 2) body_ += p.str();
}

void SvgPlot::add_cylinder_curve(const std::vector<double>& x_lifted, const std::vector<double>& y,
                                 double period, const std::string& color, double stroke_width,
                                 const std::string& dash) {
    std::vector<double> xs, ys;
    double prev_wind = 0;
    for (std::size_t i = 0; i < x_lifted.size(); ++i) {
        double wind = std::floor(x_lifted[i] / period);
        if (i > 0 && wind != prev_wind) {
            add_curve(xs, ys, color, stroke_width, dash);
            xs.clear();
            ys.clear();
        }
        prev_wind = wind;
        xs.push_back(wrap_mod(x_lifted[i], period));
        ys.push_back(y[i]);
    }
    add_curve(xs, ys, color, stroke_width, dash);
}

void SvgPlot::add_legend(const std::vector<std::pair<std::string, std::string>>& label_color) {
    legend_ = label_color;
}

std::string SvgPlot::render() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
        << height_ << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n";
    out << "<rect width=\"" << width_ << "\" height=\"" << height_ << "\" fill=\"white\"/>\n";
    // frame
    out << "<rect x=\"" << margin_ << "\" y=\"" << margin_ << "\" width=\"" << width_ - 2 * margin_
        << "\" height=\"" << height_ - 2 * margin_
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    // ticks
    const int nticks = 6;
    for (int i = 0; i <= nticks; ++i) {
        double xv = x_lo_ + (x_hi_ - x_lo_) * i / nticks;
        double yv = y_lo_ + (y_hi_ - y_lo_) * i / nticks;
        double px = map_x(xv), py = map_y(yv);
        out << "<line x1=\"" << fmt(px) << "\" y1=\"" << height_ - margin_ << "\" x2=\"" << fmt(px)
            << "\" y2=\"" << height_ - margin_ + 6 << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << fmt(px) << "\" y=\"" << height_ - margin_ + 20
            << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
            << fmt_tick(xv) << "</text>\n";
        out << "<line x1=\"" << margin_ - 6 << "\" y1=\"" << fmt(py) << "\" x2=\"" << margin_
            << "\" y2=\"" << fmt(py) << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << margin_ - 10 << "\" y=\"" << fmt(py + 4)
            << "\" font-size=\"12\" text-anchor=\"end\" font-family=\"sans-serif\">" << fmt_tick(yv)
            << "</text>\n";
    }
    out << "<text x=\"" << width_ / 2 << "\" y=\"" << height_ - 12
        << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">s</text>\n";
    out << "<text x=\"16\" y=\"" << height_ / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 16 "
        << height_ / 2 << ")\">ds/dt</text>\n";
    if (!title_.empty())
        out << "<text x=\"" << width_ / 2 << "\" y=\"" << margin_ - 16
            << "\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title_
            << "</text>\n";
    // clip curves to the frame
    out << "<clipPath id=\"frame\"><rect x=\"" << margin_ << "\" y=\"" << margin_ << "\" width=\""
        << width_ - 2 * margin_ << "\" height=\"" << height_ - 2 * margin_ << "\"/></clipPath>\n";
    out << "<g clip-path=\"url(#frame)\">\n" << body_ << "</g>\n";
    int ly = margin_ + 14;
    for (const auto& [label, color] : legend_) {
        out << "<line x1=\"" << width_ - margin_ - 150 << "\" y1=\"" << ly << "\" x2=\""
            << width_ - margin_ - 120 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << width_ - margin_ - 112 << "\" y=\"" << ly + 4
            << "\" font-size=\"12\" font-family=\"sans-serif\">" << label << "</text>\n";
        ly += 18;
    }
    out << "</svg>\n";
    return out.str();
}

void SvgPlot::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write SVG file '" + path + "'");
    out << render();
}

}  // namespace vhc
