#pragma once

#include <string>
#include <vector>

#include "ecx/common.hpp"
#include "ecx/panel.hpp"

namespace ecx {

// CSR with strictly positive stored values; structural zeros are unstored.
class SparseMatrix {
public:
    SparseMatrix() = default;

    struct Triplet {
        int row;
        int col;
        double value;
    };

    // Duplicate cells are summed; non-positive results are dropped.
    static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t nnz() const { return col_idx_.size(); }

    // Entries of row r as (col, value) pairs via index access.
    std::size_t row_begin(int r) const { return row_ptr_[static_cast<std::size_t>(r)]; }
    std::size_t row_end(int r) const { return row_ptr_[static_cast<std::size_t>(r) + 1]; }
    int col(std::size_t k) const { return col_idx_[k]; }
    double value(std::size_t k) const { return values_[k]; }

    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
    double total() const;

    // Same pattern, transformed values (drops results <= 0).
    SparseMatrix map_values(const std::vector<double>& new_values) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

enum class Resolution { HS6, HS4 };

// Weighted exporter x product matrix plus the labels and aggregation metadata.
// Marginals are cached on construction; every downstream formula reuses them.
struct ExportMatrix {
    SparseMatrix m;
    Interner rows; // firms or countries
    Interner cols; // product codes at `resolution`
    int year_from = 0;
    int year_to = 0;
    Resolution resolution = Resolution::HS6;
    std::vector<double> row_totals;
    std::vector<double> col_totals;
    double grand_total = 0.0;
};

struct RcaMatrix {
    SparseMatrix m; // cells hold RCA values > 0
    Interner rows;
    Interner cols;
    std::size_t dropped_rows = 0; // rows with zero total in the source matrix
};

struct BinaryMatrix {
    SparseMatrix m; // stored cells are exactly 1.0
    Interner rows;
    Interner cols;
    double threshold = 1.0;
};

// Cell (f, p) is the mean over [year_from, year_to] of the yearly export value,
// missing years counting as zero. HS4 resolution sums HS6 values within each
// 4-digit heading per year before averaging.
ExportMatrix aggregate_years(const ExportPanel& panel, int year_from, int year_to,
                             Resolution resolution, const HsMap* hs_map = nullptr);

RcaMatrix rca(const ExportMatrix& matrix, WarningLog* warnings = nullptr);

// Strict inequality: cell is 1 iff RCA > threshold.
BinaryMatrix binarize(const RcaMatrix& rca_matrix, double threshold = 1.0);

// Row sums of the binary matrix: the firm's overall diversification d_f.
std::vector<int> diversification(const BinaryMatrix& binary);

} // namespace ecx
