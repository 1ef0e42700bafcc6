#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecx/common.hpp"
#include "ecx/matrix.hpp"

namespace ecx {

// Co-export counts over the binary matrix: CO[p][p'] firms exporting both.
// Dense storage; the product sets this tool sees fit comfortably in memory.
struct CooccurrenceTable {
    Interner products;
    int n_firms = 0;
    std::vector<int> degree;       // k_p, firms exporting p
    std::vector<std::int32_t> co;  // row-major n_p x n_p, CO[p][p']

    std::int32_t at(int p, int q) const {
        return co[static_cast<std::size_t>(p) * static_cast<std::size_t>(products.size()) +
                  static_cast<std::size_t>(q)];
    }
};

// Product-pair similarity in [-1, 1]. Entries at degenerate degrees
// (k in {0, N}) are undefined and unstored. With a positive cutoff only
// entries |B| >= cutoff are stored (sparse mode), bounding memory.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;

    // Dense values in row-major order; NaN marks undefined entries.
    static SimilarityMatrix from_dense(Interner products, std::vector<double> values);

    int size() const { return products_.size(); }
    const Interner& products() const { return products_; }
    bool dense() const { return dense_; }
    double cutoff() const { return cutoff_; }
    std::size_t undefined_entries() const { return undefined_entries_; }
    std::size_t stored_entries() const;
    double max_asymmetry() const { return max_asymmetry_; } // diagnostic, not asserted

    // nullopt when the entry is undefined or below the sparse cutoff.
    std::optional<double> entry(int p, int q) const;

private:
    friend SimilarityMatrix sapling(const CooccurrenceTable&, double, WarningLog*);

    Interner products_;
    bool dense_ = true;
    double cutoff_ = 0.0;
    std::size_t undefined_entries_ = 0;
    double max_asymmetry_ = 0.0;
    std::vector<double> dense_vals_; // NaN marks undefined
    std::vector<std::size_t> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> sparse_vals_;
};

struct CoherenceTable {
    Interner firms;
    std::vector<double> coherence;
    std::vector<bool> defined;
    std::vector<bool> degenerate;        // single-product firms, C fixed at 1
    std::size_t undefined_pairs = 0;     // similarity entries treated as zero
};

CooccurrenceTable cooccurrence(const BinaryMatrix& binary);

// cutoff <= 0 keeps the full dense matrix.
SimilarityMatrix sapling(const CooccurrenceTable& co, double cutoff = 0.0, WarningLog* warnings = nullptr);

// Export-volume-weighted mean pairwise similarity of each firm's basket,
// diagonal excluded. Single-product firms get C = 1 and the degenerate flag.
CoherenceTable coherence(const ExportMatrix& exports, const SimilarityMatrix& sim,
                         WarningLog* warnings = nullptr);

void write_similarity(const SimilarityMatrix& sim, const std::string& path);
void write_coherence(const CoherenceTable& table, const std::string& path);

} // namespace ecx
