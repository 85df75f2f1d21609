#pragma once

#include <string>
#include <vector>

namespace vhc {

// Minimal static SVG writer for phase portraits on the cylinder chart
// [0, T) x [sdot range]: polylines on a fixed viewport with axis ticks.
// Curves crossing the seam are split so no polyline wraps across the chart.
class SvgPlot {
public:
    SvgPlot(double x_lo, double x_hi, double y_lo, double y_hi, int width = 900, int height = 620);

    void add_curve(const std::vector<double>& x, const std::vector<double>& y,
                   const std::string& color, double stroke_width = 1.0,
                   const std::string& dash = "");
    // splits at wrap seams of period T before drawing
    void add_cylinder_curve(const std::vector<double>& x_lifted, const std::vector<double>& y,
                            double period, const std::string& color, double stroke_width = 1.0,
                            const std::string& dash = "");
    void add_legend(const std::vector<std::pair<std::string, std::string>>& label_color);
    void set_title(const std::string& title) { title_ = title; }

    std::string render() const;
    void write(const std::string& path) const;

private:
    double map_x(double x) const;
    double map_y(double y) const;

    double x_lo_, x_hi_, y_lo_, y_hi_;
    int width_, height_;
    int margin_ = 56;
    std::string title_;
    std::string body_;
    std::vector<std::pair<std::string, std::string>> legend_;
};

}  // namespace vhc
