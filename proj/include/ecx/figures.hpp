#pragma once

#include <span>
#include <string>
#include <vector>

#include "ecx/common.hpp"

namespace ecx {

struct GridPoint {
    double x;
    double y;
    double color;
};

// 2-D binned means with masked Gaussian smoothing. Cells no firm falls into
// stay empty; smoothing redistributes weight over occupied cells only.
struct FigureGrid {
    int nx = 0;
    int ny = 0;
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    double sigma = 0.0;
    std::vector<int> count;    // nx * ny, row-major in x
    std::vector<double> value; // defined only where count > 0

    int occupied_cells() const;
};

FigureGrid emit_heatmap(std::span<const GridPoint> points, int nx, int ny, double sigma = 3.0);

// Nadaraya-Watson local mean of y over an evenly spaced x grid with a Gaussian
// kernel. bandwidth <= 0 selects the Silverman plug-in rule.
struct Curve {
    std::vector<double> x;
    std::vector<double> y;
    double bandwidth = 0.0;
    std::size_t n_points = 0;
};

Curve emit_nonparametric_curve(std::span<const double> x, std::span<const double> y,
                               double bandwidth = 0.0, int grid_size = 100);

void write_heatmap(const FigureGrid& grid, const std::string& path);
void write_curve(const Curve& curve, const std::string& path);

} // namespace ecx
