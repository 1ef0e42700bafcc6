#include "ecx/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace ecx {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });
    SparseMatrix out;
    out.rows_ = rows;
    out.cols_ = cols;
    out.row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
    std::size_t i = 0;
    for (int r = 0; r < rows; ++r) {
        while (i < triplets.size() && triplets[i].row == r) {
            double v = triplets[i].value;
            int c = triplets[i].col;
            std::size_t j = i + 1;
            while (j < triplets.size() && triplets[j].row == r && triplets[j].col == c) {
                v += triplets[j].value;
                ++j;
            }
            i = j;
            if (v > 0.0) {
                out.col_idx_.push_back(c);
                out.values_.push_back(v);
            }
        }
        out.row_ptr_[static_cast<std::size_t>(r) + 1] = out.col_idx_.size();
    }
    return out;
}

std::vector<double> SparseMatrix::row_sums() const {
    std::vector<double> sums(static_cast<std::size_t>(rows_), 0.0);
    for (int r = 0; r < rows_; ++r)
        for (std::size_t k = row_begin(r); k < row_end(r); ++k) sums[static_cast<std::size_t>(r)] += values_[k];
    return sums;
}

std::vector<double> SparseMatrix::col_sums() const {
    std::vector<double> sums(static_cast<std::size_t>(cols_), 0.0);
    for (std::size_t k = 0; k < values_.size(); ++k) sums[static_cast<std::size_t>(col_idx_[k])] += values_[k];
    return sums;
}

double SparseMatrix::total() const {
    double t = 0.0;
    for (double v : values_) t += v;
    return t;
}

SparseMatrix SparseMatrix::map_values(const std::vector<double>& new_values) const {
    SparseMatrix out;
    out.rows_ = rows_;
    out.cols_ = cols_;
    out.row_ptr_.assign(static_cast<std::size_t>(rows_) + 1, 0);
    for (int r = 0; r < rows_; ++r) {
        for (std::size_t k = row_begin(r); k < row_end(r); ++k) {
            if (new_values[k] > 0.0) {
                out.col_idx_.push_back(col_idx_[k]);
                out.values_.push_back(new_values[k]);
            }
        }
        out.row_ptr_[static_cast<std::size_t>(r) + 1] = out.col_idx_.size();
    }
    return out;
}

ExportMatrix aggregate_years(const ExportPanel& panel, int year_from, int year_to,
                             Resolution resolution, const HsMap* hs_map) {
    if (year_from > year_to) throw ValidationError("aggregate_years: empty year range");
    if (resolution == Resolution::HS4 && hs_map == nullptr)
        throw ValidationError("aggregate_years: HS4 resolution requires an HS map");

    ExportMatrix out;
    out.year_from = year_from;
    out.year_to = year_to;
    out.resolution = resolution;
    out.rows = panel.firms();

    const double inv_years = 1.0 / static_cast<double>(year_to - year_from + 1);
    std::vector<SparseMatrix::Triplet> triplets;
    triplets.reserve(panel.records().size());

    if (resolution == Resolution::HS6) {
        out.cols = panel.products();
        for (const auto& r : panel.records()) {
            if (r.year < year_from || r.year > year_to || r.value <= 0.0) continue;
            triplets.push_back({r.firm, r.product, r.value * inv_years});
        }
    } else {
        // Map each HS6 product to its HS4 heading once.
        std::vector<int> hs4_of(static_cast<std::size_t>(panel.products().size()), -1);
        for (int p = 0; p < panel.products().size(); ++p) {
            const std::string& hs6 = panel.products().name(p);
            const HsEntry* e = hs_map->try_resolve(hs6);
            if (e == nullptr)
                throw ValidationError("aggregate_years: HS map does not cover exported code " + hs6);
            hs4_of[static_cast<std::size_t>(p)] = out.cols.intern(e->hs4);
        }
        for (const auto& r : panel.records()) {
            if (r.year < year_from || r.year > year_to || r.value <= 0.0) continue;
            triplets.push_back({r.firm, hs4_of[static_cast<std::size_t>(r.product)], r.value * inv_years});
        }
    }
    out.m = SparseMatrix::from_triplets(out.rows.size(), out.cols.size(), std::move(triplets));
    out.row_totals = out.m.row_sums();
    out.col_totals = out.m.col_sums();
    out.grand_total = out.m.total();
    return out;
}

RcaMatrix rca(const ExportMatrix& matrix, WarningLog* warnings) {
    if (matrix.m.nnz() == 0 || matrix.grand_total <= 0.0)
        throw ComputeError("rca: matrix has no positive entries");

    RcaMatrix out;
    out.rows = matrix.rows;
    out.cols = matrix.cols;

    std::size_t dropped = 0;
    for (int r = 0; r < matrix.m.rows(); ++r)
        if (matrix.row_totals[static_cast<std::size_t>(r)] <= 0.0) ++dropped;
    out.dropped_rows = dropped;
    if (dropped > 0 && warnings != nullptr)
        warnings->add("rca: dropped " + std::to_string(dropped) + " rows with zero total export value");

    std::vector<double> values(matrix.m.nnz());
    const double total = matrix.grand_total;
    for (int r = 0; r < matrix.m.rows(); ++r) {
        const double row_total = matrix.row_totals[static_cast<std::size_t>(r)];
        if (row_total <= 0.0) continue; // row has no stored entries anyway
        for (std::size_t k = matrix.m.row_begin(r); k < matrix.m.row_end(r); ++k) {
            const double world_share = matrix.col_totals[static_cast<std::size_t>(matrix.m.col(k))] / total;
            values[k] = (matrix.m.value(k) / row_total) / world_share;
        }
    }
    out.m = matrix.m.map_values(values);
    return out;
}

BinaryMatrix binarize(const RcaMatrix& rca_matrix, double threshold) {
    if (threshold <= 0.0) throw ValidationError("binarize: threshold must be positive");
    BinaryMatrix out;
    out.rows = rca_matrix.rows;
    out.cols = rca_matrix.cols;
    out.threshold = threshold;
    std::vector<double> values(rca_matrix.m.nnz(), 0.0);
    for (std::size_t k = 0; k < rca_matrix.m.nnz(); ++k) values[k] = rca_matrix.m.value(k) > threshold ? 1.0 : 0.0;
    out.m = rca_matrix.m.map_values(values);
    return out;
}

std::vector<int> diversification(const BinaryMatrix& binary) {
    std::vector<int> d(static_cast<std::size_t>(binary.m.rows()), 0);
    for (int r = 0; r < binary.m.rows(); ++r)
        d[static_cast<std::size_t>(r)] = static_cast<int>(binary.m.row_end(r) - binary.m.row_begin(r));
    return d;
}

} // namespace ecx
