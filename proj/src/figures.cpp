#include "ecx/figures.hpp"

#include <algorithm>
#include <cmath>

#include "ecx/csv.hpp"

namespace ecx {

int FigureGrid::occupied_cells() const {
    int n = 0;
    for (int c : count)
        if (c > 0) ++n;
    return n;
}

FigureGrid emit_heatmap(std::span<const GridPoint> points, int nx, int ny, double sigma) {
    if (points.empty()) throw ComputeError("emit_heatmap: no points");
    if (nx < 1 || ny < 1) throw ValidationError("emit_heatmap: grid must be at least 1x1");

    FigureGrid grid;
    grid.nx = nx;
    grid.ny = ny;
    grid.sigma = sigma;
    grid.x0 = grid.x1 = points[0].x;
    grid.y0 = grid.y1 = points[0].y;
    for (const auto& p : points) {
        grid.x0 = std::min(grid.x0, p.x);
        grid.x1 = std::max(grid.x1, p.x);
        grid.y0 = std::min(grid.y0, p.y);
        grid.y1 = std::max(grid.y1, p.y);
    }
    const double wx = grid.x1 > grid.x0 ? grid.x1 - grid.x0 : 1.0;
    const double wy = grid.y1 > grid.y0 ? grid.y1 - grid.y0 : 1.0;

    const std::size_t cells = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    grid.count.assign(cells, 0);
    std::vector<double> sum(cells, 0.0);
    for (const auto& p : points) {
        int ix = static_cast<int>((p.x - grid.x0) / wx * nx);
        int iy = static_cast<int>((p.y - grid.y0) / wy * ny);
        ix = std::clamp(ix, 0, nx - 1);
        iy = std::clamp(iy, 0, ny - 1);
        const auto cell = static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix);
        ++grid.count[cell];
        sum[cell] += p.color;
    }
    std::vector<double> mean(cells, 0.0);
    for (std::size_t c = 0; c < cells; ++c)
        if (grid.count[c] > 0) mean[c] = sum[c] / grid.count[c];

    grid.value.assign(cells, 0.0);
    if (sigma <= 0.0) {
        grid.value = mean;
        return grid;
    }

    // Masked Gaussian filter in cell units; the kernel is renormalized over
    // the occupied neighborhood so empty cells neither receive nor leak mass.
    const int radius = std::min(static_cast<int>(std::ceil(4.0 * sigma)), std::max(nx, ny));
    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const auto cell = static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix);
            if (grid.count[cell] == 0) continue;
            double acc = 0.0, norm = 0.0;
            for (int dy = -radius; dy <= radius; ++dy) {
                const int jy = iy + dy;
                if (jy < 0 || jy >= ny) continue;
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int jx = ix + dx;
                    if (jx < 0 || jx >= nx) continue;
                    const auto other = static_cast<std::size_t>(jy) * static_cast<std::size_t>(nx) +
                                       static_cast<std::size_t>(jx);
                    if (grid.count[other] == 0) continue;
                    const double w = std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);
                    acc += w * mean[other];
                    norm += w;
                }
            }
            grid.value[cell] = acc / norm;
        }
    }
    return grid;
}

Curve emit_nonparametric_curve(std::span<const double> x, std::span<const double> y, double bandwidth,
                               int grid_size) {
    if (x.size() != y.size()) throw ComputeError("emit_nonparametric_curve: series lengths differ");
    if (x.size() < 10) throw ComputeError("emit_nonparametric_curve: need at least 10 points");
    if (grid_size < 2) throw ValidationError("emit_nonparametric_curve: grid needs at least 2 points");

    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    if (var <= 0.0) throw ComputeError("emit_nonparametric_curve: x has zero variance");

    Curve curve;
    curve.n_points = x.size();
    if (bandwidth > 0.0) {
        curve.bandwidth = bandwidth;
    } else {
        // Silverman's rule of thumb on the running variable.
        std::vector<double> sorted(x.begin(), x.end());
        std::sort(sorted.begin(), sorted.end());
        const auto quantile = [&](double q) {
            const double pos = q * (n - 1.0);
            const auto lo = static_cast<std::size_t>(pos);
            const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
            const double frac = pos - static_cast<double>(lo);
            return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
        };
        const double iqr = quantile(0.75) - quantile(0.25);
        const double sd = std::sqrt(var);
        const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
        curve.bandwidth = 0.9 * spread * std::pow(n, -0.2);
    }

    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    const double inv_two_h_sq = 1.0 / (2.0 * curve.bandwidth * curve.bandwidth);
    curve.x.resize(static_cast<std::size_t>(grid_size));
    curve.y.resize(static_cast<std::size_t>(grid_size));
    for (int g = 0; g < grid_size; ++g) {
        const double gx = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_size - 1);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - gx;
            const double w = std::exp(-d * d * inv_two_h_sq);
            num += w * y[i];
            den += w;
        }
        curve.x[static_cast<std::size_t>(g)] = gx;
        curve.y[static_cast<std::size_t>(g)] = den > 0.0 ? num / den : 0.0;
    }
    return curve;
}

void write_heatmap(const FigureGrid& grid, const std::string& path) {
    CsvWriter out(path, {"ix", "iy", "x_center", "y_center", "count", "value"});
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const auto cell = static_cast<std::size_t>(iy) * static_cast<std::size_t>(grid.nx) +
                              static_cast<std::size_t>(ix);
            const double xc = grid.x0 + (grid.x1 - grid.x0) * (ix + 0.5) / grid.nx;
            const double yc = grid.y0 + (grid.y1 - grid.y0) * (iy + 0.5) / grid.ny;
            out.row({std::to_string(ix), std::to_string(iy), format_double(xc), format_double(yc),
                     std::to_string(grid.count[cell]),
                     grid.count[cell] > 0 ? format_double(grid.value[cell]) : ""});
        }
    }
    out.close();
}

void write_curve(const Curve& curve, const std::string& path) {
    CsvWriter out(path, {"x", "y"});
    for (std::size_t i = 0; i < curve.x.size(); ++i)
        out.row({format_double(curve.x[i]), format_double(curve.y[i])});
    out.close();
}

} // namespace ecx
