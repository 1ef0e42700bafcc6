#pragma once

#include <span>
#include <string>
#include <vector>

#include "ecx/common.hpp"
#include "ecx/matrix.hpp"

namespace ecx {

struct FitnessResult {
    Interner rows;     // exporters with at least one link
    Interner products; // products with at least one link
    std::vector<double> fitness;
    std::vector<double> complexity;
    int iterations = 0;
    double residual = 0.0; // max relative change at the last step
    bool converged = false;
    std::size_t dropped_rows = 0;
    std::size_t dropped_cols = 0;
};

enum class ComplexityTransform { Log, Raw };

struct AvgComplexityTable {
    Interner firms;
    std::vector<double> value; // volume-weighted mean of z-scored (log) complexity
    std::vector<bool> defined;
    std::size_t dropped_firms = 0;
};

// Fixed point of the fitness-complexity map on the binary matrix, both vectors
// renormalized to mean 1 after every step. All-zero rows/columns are dropped
// first with a warning.
FitnessResult fitness_complexity(const BinaryMatrix& binary, double tol = 1e-8, int max_iter = 1000,
                                 WarningLog* warnings = nullptr);

AvgComplexityTable avg_complexity(const ExportMatrix& firm_exports, const FitnessResult& result,
                                  ComplexityTransform transform = ComplexityTransform::Log,
                                  WarningLog* warnings = nullptr);

double pearson(std::span<const double> x, std::span<const double> y);

void write_complexity(const FitnessResult& result, const std::string& path);

} // namespace ecx
