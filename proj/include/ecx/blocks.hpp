#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecx/common.hpp"
#include "ecx/matrix.hpp"
#include "ecx/panel.hpp"

namespace ecx {

// Unweighted firm-product graph taken from a binary matrix. Node indices are
// the matrix indices; degree-0 nodes are carried along but own no edges.
struct BipartiteGraph {
    Interner rows; // firms
    Interner cols; // products
    std::vector<std::vector<int>> row_adj;
    std::vector<std::vector<int>> col_adj;
    std::vector<int> row_degree;
    std::vector<int> col_degree;
    long long edges = 0;

    static BipartiteGraph from_binary(const BinaryMatrix& binary);
};

// Joint firm/product block assignment. Labels are compact 0..n_blocks-1;
// sector partitions use HS section indices 1..21 instead.
struct BlockPartition {
    Interner rows;
    Interner cols;
    std::vector<int> row_label;
    std::vector<int> col_label;
    int n_blocks = 0;
    double modularity = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> sweep_modularity; // Q after each sweep of the winning run
    bool converged = true;
    std::vector<bool> row_tie; // sector partitions: argmax tie, broken to the lowest section
};

struct BlockDiversification {
    Interner firms;
    std::vector<int> d_in;
    std::vector<int> d_out;
    std::vector<int> d_total;
};

struct BrimOptions {
    int max_blocks = 0; // 0: scan candidate block counts, keep the best Q
    int restarts = 32;
    int max_sweeps = 200;
};

// Barber bipartite modularity: Q = (1/m) sum_{f,p} (A_fp - k_f k_p / m) delta(c_f, c_p).
double bipartite_modularity(const BipartiteGraph& graph, const std::vector<int>& row_labels,
                            const std::vector<int>& col_labels);

// Alternating label optimization: fix one side, move every node of the other
// side to its best block, swap, repeat to a fixed point. Deterministic given
// the seed; best of `restarts` random initializations (ties to the lowest
// candidate/restart index). Isolated nodes end up in singleton residual blocks.
BlockPartition brim(const BipartiteGraph& graph, std::uint64_t seed, const BrimOptions& options = {},
                    WarningLog* warnings = nullptr);

BlockDiversification block_diversification(const BinaryMatrix& binary, const BlockPartition& partition);

// Each firm labeled by the HS section holding its largest export value; each
// product by its own section. Ties go to the lowest section index and are flagged.
BlockPartition sector_partition(const ExportMatrix& matrix, const HsMap& hs_map);

// Every HS6 product inherits the block of its HS4 heading. Identity when the
// partition already labels HS6 products.
BlockPartition map_blocks_hs4_to_hs6(const BlockPartition& partition, const HsMap& hs_map,
                                     const Interner& hs6_products);

void write_partition(const BlockPartition& partition, const std::string& path);

// Per block: member counts and top HS sections by product-member share.
std::string block_composition_report(const BlockPartition& partition, const HsMap& hs_map);

} // namespace ecx
