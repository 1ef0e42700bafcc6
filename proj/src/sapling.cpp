#include "ecx/sapling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecx/csv.hpp"
#include "ecx/parallel.hpp"

namespace ecx {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

SimilarityMatrix SimilarityMatrix::from_dense(Interner products, std::vector<double> values) {
    SimilarityMatrix out;
    if (values.size() != static_cast<std::size_t>(products.size()) * static_cast<std::size_t>(products.size()))
        throw ComputeError("SimilarityMatrix::from_dense: values size mismatch");
    out.products_ = std::move(products);
    out.dense_vals_ = std::move(values);
    for (double v : out.dense_vals_)
        if (std::isnan(v)) ++out.undefined_entries_;
    return out;
}

std::size_t SimilarityMatrix::stored_entries() const {
    if (dense_) {
        std::size_t n = 0;
        for (double v : dense_vals_)
            if (!std::isnan(v)) ++n;
        return n;
    }
    return sparse_vals_.size();
}

std::optional<double> SimilarityMatrix::entry(int p, int q) const {
    if (dense_) {
        const double v =
            dense_vals_[static_cast<std::size_t>(p) * static_cast<std::size_t>(size()) + static_cast<std::size_t>(q)];
        if (std::isnan(v)) return std::nullopt;
        return v;
    }
    const auto lo = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[static_cast<std::size_t>(p)]);
    const auto hi = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[static_cast<std::size_t>(p) + 1]);
    const auto it = std::lower_bound(lo, hi, q);
    if (it == hi || *it != q) return std::nullopt;
    return sparse_vals_[static_cast<std::size_t>(it - col_idx_.begin())];
}

CooccurrenceTable cooccurrence(const BinaryMatrix& binary) {
    if (binary.m.rows() == 0 || binary.m.cols() == 0)
        throw ComputeError("cooccurrence: empty binary matrix");

    CooccurrenceTable out;
    out.products = binary.cols;
    out.n_firms = binary.m.rows();
    const auto n_p = static_cast<std::size_t>(binary.m.cols());
    out.degree.assign(n_p, 0);
    out.co.assign(n_p * n_p, 0);

    for (int f = 0; f < binary.m.rows(); ++f) {
        const std::size_t begin = binary.m.row_begin(f);
        const std::size_t end = binary.m.row_end(f);
        for (std::size_t a = begin; a < end; ++a) {
            const auto pa = static_cast<std::size_t>(binary.m.col(a));
            ++out.degree[pa];
            std::int32_t* row = out.co.data() + pa * n_p;
            for (std::size_t b = begin; b < end; ++b) ++row[binary.m.col(b)];
        }
    }
    return out;
}

SimilarityMatrix sapling(const CooccurrenceTable& co, double cutoff, WarningLog* warnings) {
    const int n_p = co.products.size();
    const double n_firms = static_cast<double>(co.n_firms);

    SimilarityMatrix out;
    out.products_ = co.products;
    out.dense_ = cutoff <= 0.0;
    out.cutoff_ = std::max(cutoff, 0.0);

    std::vector<bool> degenerate(static_cast<std::size_t>(n_p));
    for (int p = 0; p < n_p; ++p) {
        const int k = co.degree[static_cast<std::size_t>(p)];
        degenerate[static_cast<std::size_t>(p)] = (k == 0 || k == co.n_firms);
    }

    // Row p against all p'. Each worker owns whole rows, so output is
    // deterministic under any thread count.
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n_p));
    std::vector<std::size_t> undefined_per_row(static_cast<std::size_t>(n_p), 0);
    parallel_for(0, static_cast<std::size_t>(n_p), [&](std::size_t pi) {
        auto& row = rows[pi];
        row.assign(static_cast<std::size_t>(n_p), kNan);
        const int p = static_cast<int>(pi);
        const double k_p = co.degree[pi];
        if (degenerate[pi]) {
            undefined_per_row[pi] = static_cast<std::size_t>(n_p);
            return;
        }
        const double denom = k_p * (1.0 - k_p / n_firms);
        for (int q = 0; q < n_p; ++q) {
            const auto qi = static_cast<std::size_t>(q);
            if (degenerate[qi]) {
                ++undefined_per_row[pi];
                continue;
            }
            const double k_q = co.degree[qi];
            const double c = co.at(p, q);
            const double left = c * (1.0 - c / k_q);
            const double rest = k_p - c;
            const double right = rest * (1.0 - rest / (n_firms - k_q));
            const double f = (left + right) / denom;
            const double b = (c * n_firms) / (k_p * k_q) >= 1.0 ? 1.0 - f : -1.0 + f;
            row[qi] = b;
        }
    });

    std::size_t undefined = 0;
    for (std::size_t v : undefined_per_row) undefined += v;
    out.undefined_entries_ = undefined;
    if (undefined > 0 && warnings != nullptr)
        warnings->add("sapling: " + std::to_string(undefined) +
                      " entries undefined at degenerate degrees (k in {0, N})");

    // Asymmetry diagnostic over defined pairs.
    double asym = 0.0;
    for (int p = 0; p < n_p; ++p)
        for (int q = p + 1; q < n_p; ++q) {
            const double a = rows[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
            const double b = rows[static_cast<std::size_t>(q)][static_cast<std::size_t>(p)];
            if (!std::isnan(a) && !std::isnan(b)) asym = std::max(asym, std::abs(a - b));
        }
    out.max_asymmetry_ = asym;

    if (out.dense_) {
        out.dense_vals_.resize(static_cast<std::size_t>(n_p) * static_cast<std::size_t>(n_p));
        for (std::size_t pi = 0; pi < rows.size(); ++pi)
            std::copy(rows[pi].begin(), rows[pi].end(),
                      out.dense_vals_.begin() + static_cast<std::ptrdiff_t>(pi * static_cast<std::size_t>(n_p)));
    } else {
        out.row_ptr_.assign(static_cast<std::size_t>(n_p) + 1, 0);
        for (std::size_t pi = 0; pi < rows.size(); ++pi) {
            for (int q = 0; q < n_p; ++q) {
                const double v = rows[pi][static_cast<std::size_t>(q)];
                if (!std::isnan(v) && std::abs(v) >= out.cutoff_) {
                    out.col_idx_.push_back(q);
                    out.sparse_vals_.push_back(v);
                }
            }
            out.row_ptr_[pi + 1] = out.col_idx_.size();
            rows[pi].clear();
            rows[pi].shrink_to_fit();
        }
    }
    return out;
}

CoherenceTable coherence(const ExportMatrix& exports, const SimilarityMatrix& sim, WarningLog* warnings) {
    CoherenceTable out;
    out.firms = exports.rows;
    const int n_firms = exports.rows.size();
    out.coherence.assign(static_cast<std::size_t>(n_firms), 0.0);
    out.defined.assign(static_cast<std::size_t>(n_firms), false);
    out.degenerate.assign(static_cast<std::size_t>(n_firms), false);

    // Similarity index per export column, matched by product code.
    std::vector<int> sim_id(static_cast<std::size_t>(exports.cols.size()), -1);
    for (int p = 0; p < exports.cols.size(); ++p)
        sim_id[static_cast<std::size_t>(p)] = sim.products().find(exports.cols.name(p));

    std::vector<std::size_t> undefined_per_firm(static_cast<std::size_t>(n_firms), 0);
    parallel_for(0, static_cast<std::size_t>(n_firms), [&](std::size_t fi) {
        const int f = static_cast<int>(fi);
        const std::size_t begin = exports.m.row_begin(f);
        const std::size_t end = exports.m.row_end(f);
        const std::size_t basket = end - begin;
        if (basket == 0) return;
        if (basket == 1) {
            out.coherence[fi] = 1.0;
            out.defined[fi] = true;
            out.degenerate[fi] = true;
            return;
        }
        double weight_sum = 0.0;
        double weight_sq = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            weight_sum += exports.m.value(k);
            weight_sq += exports.m.value(k) * exports.m.value(k);
        }
        const double denom = weight_sum * weight_sum - weight_sq; // ordered pairs, diagonal excluded
        double num = 0.0;
        std::size_t undefined = 0;
        for (std::size_t a = begin; a < end; ++a) {
            const int pa = sim_id[static_cast<std::size_t>(exports.m.col(a))];
            for (std::size_t b = begin; b < end; ++b) {
                if (a == b) continue;
                const int pb = sim_id[static_cast<std::size_t>(exports.m.col(b))];
                if (pa < 0 || pb < 0) {
                    ++undefined;
                    continue;
                }
                const auto v = sim.entry(pa, pb);
                if (!v) {
                    ++undefined;
                    continue; // undefined or cut off: contributes zero
                }
                num += exports.m.value(a) * exports.m.value(b) * *v;
            }
        }
        undefined_per_firm[fi] = undefined;
        out.coherence[fi] = num / denom;
        out.defined[fi] = true;
    });

    std::size_t undefined = 0;
    for (std::size_t v : undefined_per_firm) undefined += v;
    out.undefined_pairs = undefined;
    if (undefined > 0 && warnings != nullptr)
        warnings->add("coherence: " + std::to_string(undefined) +
                      " product pairs without a similarity value treated as zero");
    return out;
}

void write_similarity(const SimilarityMatrix& sim, const std::string& path) {
    CsvWriter out(path, {"p", "p_prime", "b"});
    for (int p = 0; p < sim.size(); ++p)
        for (int q = 0; q < sim.size(); ++q) {
            const auto v = sim.entry(p, q);
            if (!v) continue;
            out.row({sim.products().name(p), sim.products().name(q), format_double(*v)});
        }
    out.close();
}

void write_coherence(const CoherenceTable& table, const std::string& path) {
    CsvWriter out(path, {"firm_id", "coherence", "degenerate_flag"});
    for (int f = 0; f < table.firms.size(); ++f) {
        if (!table.defined[static_cast<std::size_t>(f)]) continue;
        out.row({table.firms.name(f), format_double(table.coherence[static_cast<std::size_t>(f)]),
                 table.degenerate[static_cast<std::size_t>(f)] ? "1" : "0"});
    }
    out.close();
}

} // namespace ecx
