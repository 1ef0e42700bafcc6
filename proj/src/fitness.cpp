#include "ecx/fitness.hpp"

#include <algorithm>
#include <cmath>

#include "ecx/csv.hpp"

namespace ecx {

namespace {

void normalize_mean_one(std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double& x : v) x /= mean;
}

} // namespace

FitnessResult fitness_complexity(const BinaryMatrix& binary, double tol, int max_iter, WarningLog* warnings) {
    FitnessResult out;

    // Compact to rows/cols with at least one link.
    std::vector<int> row_id(static_cast<std::size_t>(binary.m.rows()), -1);
    std::vector<int> col_id(static_cast<std::size_t>(binary.m.cols()), -1);
    std::vector<int> col_degree(static_cast<std::size_t>(binary.m.cols()), 0);
    for (int r = 0; r < binary.m.rows(); ++r)
        for (std::size_t k = binary.m.row_begin(r); k < binary.m.row_end(r); ++k)
            ++col_degree[static_cast<std::size_t>(binary.m.col(k))];
    for (int r = 0; r < binary.m.rows(); ++r) {
        if (binary.m.row_end(r) > binary.m.row_begin(r))
            row_id[static_cast<std::size_t>(r)] = out.rows.intern(binary.rows.name(r));
        else
            ++out.dropped_rows;
    }
    for (int c = 0; c < binary.m.cols(); ++c) {
        if (col_degree[static_cast<std::size_t>(c)] > 0)
            col_id[static_cast<std::size_t>(c)] = out.products.intern(binary.cols.name(c));
        else
            ++out.dropped_cols;
    }
    if ((out.dropped_rows > 0 || out.dropped_cols > 0) && warnings != nullptr)
        warnings->add("fitness_complexity: dropped " + std::to_string(out.dropped_rows) + " empty rows and " +
                      std::to_string(out.dropped_cols) + " empty columns");
    if (out.rows.size() == 0 || out.products.size() == 0)
        throw ComputeError("fitness_complexity: matrix has no links");

    // Compact adjacency.
    std::vector<std::vector<int>> row_links(static_cast<std::size_t>(out.rows.size()));
    for (int r = 0; r < binary.m.rows(); ++r) {
        const int rr = row_id[static_cast<std::size_t>(r)];
        if (rr < 0) continue;
        for (std::size_t k = binary.m.row_begin(r); k < binary.m.row_end(r); ++k)
            row_links[static_cast<std::size_t>(rr)].push_back(col_id[static_cast<std::size_t>(binary.m.col(k))]);
    }

    const std::size_t n_rows = static_cast<std::size_t>(out.rows.size());
    const std::size_t n_cols = static_cast<std::size_t>(out.products.size());
    std::vector<double> fitness(n_rows, 1.0), complexity(n_cols, 1.0);
    std::vector<double> new_fitness(n_rows), inv_fit_sum(n_cols);

    double residual = 0.0;
    int iter = 0;
    for (iter = 1; iter <= max_iter; ++iter) {
        // F~_r = sum_p M_rp Q_p ; Q~_p = 1 / sum_r M_rp / F_r
        inv_fit_sum.assign(n_cols, 0.0);
        for (std::size_t r = 0; r < n_rows; ++r) {
            double acc = 0.0;
            const double inv_f = 1.0 / fitness[r];
            for (int c : row_links[r]) {
                acc += complexity[static_cast<std::size_t>(c)];
                inv_fit_sum[static_cast<std::size_t>(c)] += inv_f;
            }
            new_fitness[r] = acc;
        }
        std::vector<double> new_complexity(n_cols);
        for (std::size_t c = 0; c < n_cols; ++c) new_complexity[c] = 1.0 / inv_fit_sum[c];
        normalize_mean_one(new_fitness);
        normalize_mean_one(new_complexity);

        residual = 0.0;
        for (std::size_t r = 0; r < n_rows; ++r)
            residual = std::max(residual, std::abs(new_fitness[r] - fitness[r]) / fitness[r]);
        for (std::size_t c = 0; c < n_cols; ++c)
            residual = std::max(residual, std::abs(new_complexity[c] - complexity[c]) / complexity[c]);

        fitness.swap(new_fitness);
        complexity.swap(new_complexity);
        if (residual < tol) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged && warnings != nullptr)
        warnings->add("fitness_complexity: not converged after " + std::to_string(max_iter) +
                      " iterations, residual " + format_double(residual));

    out.fitness = std::move(fitness);
    out.complexity = std::move(complexity);
    out.iterations = std::min(iter, max_iter);
    out.residual = residual;
    return out;
}

AvgComplexityTable avg_complexity(const ExportMatrix& firm_exports, const FitnessResult& result,
                                  ComplexityTransform transform, WarningLog* warnings) {
    // Transform, then z-score over the scored product set.
    std::vector<double> score(result.complexity.size());
    for (std::size_t p = 0; p < score.size(); ++p)
        score[p] = transform == ComplexityTransform::Log ? std::log(result.complexity[p]) : result.complexity[p];
    double mean = 0.0;
    for (double v : score) mean += v;
    mean /= static_cast<double>(score.size());
    double var = 0.0;
    for (double v : score) var += (v - mean) * (v - mean);
    var /= static_cast<double>(score.size());
    if (var <= 0.0) throw ComputeError("avg_complexity: complexity scores are all identical");
    const double sd = std::sqrt(var);
    for (double& v : score) v = (v - mean) / sd;

    AvgComplexityTable out;
    out.firms = firm_exports.rows;
    const int n_firms = firm_exports.rows.size();
    out.value.assign(static_cast<std::size_t>(n_firms), 0.0);
    out.defined.assign(static_cast<std::size_t>(n_firms), false);

    std::vector<int> score_id(static_cast<std::size_t>(firm_exports.cols.size()), -1);
    for (int p = 0; p < firm_exports.cols.size(); ++p)
        score_id[static_cast<std::size_t>(p)] = result.products.find(firm_exports.cols.name(p));

    for (int f = 0; f < n_firms; ++f) {
        double acc = 0.0, weight = 0.0, total = 0.0;
        for (std::size_t k = firm_exports.m.row_begin(f); k < firm_exports.m.row_end(f); ++k) {
            total += firm_exports.m.value(k);
            const int sid = score_id[static_cast<std::size_t>(firm_exports.m.col(k))];
            if (sid < 0) continue;
            weight += firm_exports.m.value(k);
            acc += firm_exports.m.value(k) * score[static_cast<std::size_t>(sid)];
        }
        if (weight <= 0.0) {
            if (total > 0.0) {
                ++out.dropped_firms;
                if (warnings != nullptr)
                    warnings->add("avg_complexity: firm " + firm_exports.rows.name(f) +
                                  " has no scored products");
            }
            continue;
        }
        out.value[static_cast<std::size_t>(f)] = acc / weight;
        out.defined[static_cast<std::size_t>(f)] = true;
    }
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ComputeError("pearson: series lengths differ");
    if (x.size() < 3) throw ComputeError("pearson: need at least 3 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw ComputeError("pearson: zero variance series");
    return sxy / std::sqrt(sxx * syy);
}

void write_complexity(const FitnessResult& result, const std::string& path) {
    // z-scored log complexity alongside the raw values.
    std::vector<double> logq(result.complexity.size());
    for (std::size_t p = 0; p < logq.size(); ++p) logq[p] = std::log(result.complexity[p]);
    double mean = 0.0;
    for (double v : logq) mean += v;
    mean /= static_cast<double>(logq.size());
    double var = 0.0;
    for (double v : logq) var += (v - mean) * (v - mean);
    var /= static_cast<double>(logq.size());
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;

    CsvWriter out(path, {"product", "q_raw", "logq_z"});
    for (int p = 0; p < result.products.size(); ++p)
        out.row({result.products.name(p), format_double(result.complexity[static_cast<std::size_t>(p)]),
                 format_double((logq[static_cast<std::size_t>(p)] - mean) / sd)});
    out.close();
}

} // namespace ecx
