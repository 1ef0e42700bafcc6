#include <cmath>

#include "doctest.h"
#include "ecx/blocks.hpp"
#include "ecx/rng.hpp"
#include "helpers.hpp"

using namespace ecx;

namespace {

// Two (or k) equal, disjoint, complete bipartite blocks.
std::vector<std::vector<int>> disjoint_complete(int blocks, int firms_per_block, int products_per_block) {
    std::vector<std::vector<int>> cells(
        static_cast<std::size_t>(blocks * firms_per_block),
        std::vector<int>(static_cast<std::size_t>(blocks * products_per_block), 0));
    for (int b = 0; b < blocks; ++b)
        for (int f = 0; f < firms_per_block; ++f)
            for (int p = 0; p < products_per_block; ++p)
                cells[static_cast<std::size_t>(b * firms_per_block + f)]
                     [static_cast<std::size_t>(b * products_per_block + p)] = 1;
    return cells;
}

std::vector<int> block_of(int n, int per_block) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i / per_block;
    return labels;
}

HsMap section_map(int products) {
    HsMap map;
    for (int p = 0; p < products; ++p) {
        const std::string hs6 = testutil::hs6_code(p);
        map.insert(hs6, {hs6.substr(0, 4), p % kHsSectionCount + 1, "s"});
    }
    return map;
}

} // namespace

TEST_SUITE("blocks") {

TEST_CASE("everything in one block gives Q = 0") {
    const auto cells = disjoint_complete(2, 3, 4);
    const BipartiteGraph g = BipartiteGraph::from_binary(testutil::make_binary(cells));
    const std::vector<int> rows(static_cast<std::size_t>(g.rows.size()), 0);
    const std::vector<int> cols(static_cast<std::size_t>(g.cols.size()), 0);
    CHECK(std::abs(bipartite_modularity(g, rows, cols)) < 1e-12);
}

TEST_CASE("two equal disjoint complete blocks give Q = 1/2, three give 2/3") {
    for (int blocks : {2, 3}) {
        const auto cells = disjoint_complete(blocks, 4, 5);
        const BipartiteGraph g = BipartiteGraph::from_binary(testutil::make_binary(cells));
        const std::vector<int> rows = block_of(blocks * 4, 4);
        const std::vector<int> cols = block_of(blocks * 5, 5);
        const double q = bipartite_modularity(g, rows, cols);
        const double expected = 1.0 - 1.0 / blocks;
        CHECK(q == doctest::Approx(expected).epsilon(1e-12));
        CHECK(q == doctest::Approx(testutil::modularity_oracle(cells, rows, cols)).epsilon(1e-12));
    }
}

TEST_CASE("bipartite_modularity matches the pair-sum oracle on random partitions") {
    const auto g_struct = testutil::make_planted(30, 20, 4, 0.5, 0.1, 77);
    const BipartiteGraph g = BipartiteGraph::from_binary(g_struct.binary);
    std::vector<std::vector<int>> cells(30, std::vector<int>(20, 0));
    for (int f = 0; f < 30; ++f)
        for (std::size_t k = g_struct.binary.m.row_begin(f); k < g_struct.binary.m.row_end(f); ++k)
            cells[static_cast<std::size_t>(f)][static_cast<std::size_t>(g_struct.binary.m.col(k))] = 1;
    Rng rng(123);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<int> rows(30), cols(20);
        for (auto& l : rows) l = static_cast<int>(rng.uniform_int(5));
        for (auto& l : cols) l = static_cast<int>(rng.uniform_int(5));
        const double q = bipartite_modularity(g, rows, cols);
        CHECK(q == doctest::Approx(testutil::modularity_oracle(cells, rows, cols)).epsilon(1e-12));
        CHECK(q >= -1.0 - 1e-12);
        CHECK(q <= 1.0 + 1e-12);
    }
}

TEST_CASE("modularity on an edgeless graph is fatal") {
    const BipartiteGraph g = BipartiteGraph::from_binary(testutil::make_binary({{0, 0}, {0, 0}}));
    CHECK_THROWS_AS(bipartite_modularity(g, {0, 0}, {0, 0}), ComputeError);
    CHECK_THROWS_AS(brim(g, 1), ComputeError);
}

TEST_CASE("brim recovers a planted 7-block disjoint graph exactly") {
    // Fully disjoint blocks: the closed-form optimum is 1 - sum (m_b/m)^2.
    const auto cells = disjoint_complete(7, 5, 4);
    const BinaryMatrix binary = testutil::make_binary(cells);
    const BipartiteGraph g = BipartiteGraph::from_binary(binary);
    const BlockPartition part = brim(g, 19);
    const double expected = 1.0 - 1.0 / 7.0;
    CHECK(part.modularity == doctest::Approx(expected).epsilon(1e-12));
    CHECK(part.n_blocks == 7);
    const double accuracy =
        testutil::label_accuracy(block_of(35, 5), block_of(28, 4), part);
    CHECK(accuracy == doctest::Approx(1.0));

    SUBCASE("merging two blocks never beats the optimum") {
        for (int a = 1; a < part.n_blocks; ++a) {
            std::vector<int> rows = part.row_label;
            std::vector<int> cols = part.col_label;
            for (auto& l : rows)
                if (l == a) l = 0;
            for (auto& l : cols)
                if (l == a) l = 0;
            CHECK(bipartite_modularity(g, rows, cols) <= part.modularity + 1e-12);
        }
    }
}

TEST_CASE("complete bipartite graph has no block structure") {
    const auto cells = disjoint_complete(1, 8, 6);
    const BlockPartition part = brim(BipartiteGraph::from_binary(testutil::make_binary(cells)), 5);
    CHECK(part.modularity <= 1e-9);
}

TEST_CASE("brim is deterministic for a fixed seed") {
    const auto planted = testutil::make_planted(60, 40, 5, 0.4, 0.03, 404);
    const BipartiteGraph g = BipartiteGraph::from_binary(planted.binary);
    const BlockPartition a = brim(g, 33);
    const BlockPartition b = brim(g, 33);
    CHECK(a.row_label == b.row_label);
    CHECK(a.col_label == b.col_label);
    CHECK(a.modularity == b.modularity);
}

TEST_CASE("returned Q equals a recomputation and the sweep log never decreases") {
    const auto planted = testutil::make_planted(80, 50, 4, 0.35, 0.04, 99);
    const BipartiteGraph g = BipartiteGraph::from_binary(planted.binary);
    const BlockPartition part = brim(g, 7);
    CHECK(part.modularity ==
          doctest::Approx(bipartite_modularity(g, part.row_label, part.col_label)).epsilon(1e-12));
    for (std::size_t s = 1; s < part.sweep_modularity.size(); ++s)
        CHECK(part.sweep_modularity[s] >= part.sweep_modularity[s - 1] - 1e-12);
}

TEST_CASE("isolated nodes land in singleton residual blocks") {
    // Firm 2 and product 2 have no links at all.
    const BinaryMatrix binary = testutil::make_binary({{1, 1, 0}, {1, 1, 0}, {0, 0, 0}});
    const BlockPartition part = brim(BipartiteGraph::from_binary(binary), 3);
    const int isolated_firm = part.row_label[2];
    const int isolated_product = part.col_label[2];
    CHECK(isolated_firm != part.row_label[0]);
    CHECK(isolated_product != part.row_label[0]);
    CHECK(isolated_firm != isolated_product);
}

TEST_CASE("block_diversification splits the row sum by block membership") {
    SUBCASE("all exports inside the firm's block") {
        const BinaryMatrix binary = testutil::make_binary({{1, 1, 1, 0, 0}});
        BlockPartition part;
        part.rows = binary.rows;
        part.cols = binary.cols;
        part.row_label = {4};
        part.col_label = {4, 4, 4, 9, 9};
        const BlockDiversification d = block_diversification(binary, part);
        CHECK(d.d_in[0] == 3);
        CHECK(d.d_out[0] == 0);
    }
    SUBCASE("3 in-block and 2 out-of-block") {
        const BinaryMatrix binary = testutil::make_binary({{1, 1, 1, 1, 1}});
        BlockPartition part;
        part.rows = binary.rows;
        part.cols = binary.cols;
        part.row_label = {0};
        part.col_label = {0, 0, 0, 1, 2};
        const BlockDiversification d = block_diversification(binary, part);
        CHECK(d.d_in[0] == 3);
        CHECK(d.d_out[0] == 2);
        CHECK(d.d_total[0] == 5);
    }
    SUBCASE("random matrix and partition match the cell scan and the row sums") {
        Rng rng(7);
        std::vector<std::vector<int>> cells(15, std::vector<int>(10, 0));
        for (auto& row : cells)
            for (auto& v : row) v = rng.bernoulli(0.4) ? 1 : 0;
        const BinaryMatrix binary = testutil::make_binary(cells);
        BlockPartition part;
        part.rows = binary.rows;
        part.cols = binary.cols;
        part.row_label.resize(15);
        part.col_label.resize(10);
        for (auto& l : part.row_label) l = static_cast<int>(rng.uniform_int(3));
        for (auto& l : part.col_label) l = static_cast<int>(rng.uniform_int(3));
        const BlockDiversification d = block_diversification(binary, part);
        const std::vector<int> total = diversification(binary);
        for (int f = 0; f < 15; ++f) {
            int d_in = 0, d_out = 0;
            for (int p = 0; p < 10; ++p) {
                if (!cells[static_cast<std::size_t>(f)][static_cast<std::size_t>(p)]) continue;
                (part.col_label[static_cast<std::size_t>(p)] == part.row_label[static_cast<std::size_t>(f)] ? d_in
                                                                                                            : d_out)++;
            }
            CHECK(d.d_in[static_cast<std::size_t>(f)] == d_in);
            CHECK(d.d_out[static_cast<std::size_t>(f)] == d_out);
            CHECK(d.d_total[static_cast<std::size_t>(f)] ==
                  total[static_cast<std::size_t>(f)]); // d = d_in + d_out
        }
    }
}

TEST_CASE("block_diversification requires full partition coverage") {
    const BinaryMatrix binary = testutil::make_binary({{1, 1}});
    BlockPartition part; // empty
    CHECK_THROWS_AS(block_diversification(binary, part), ValidationError);
}

TEST_CASE("sector_partition assigns the max-value section with documented ties") {
    const HsMap map = section_map(25);
    SUBCASE("dominant section wins") {
        // Product 4 is section 5; product 1 is section 2.
        const ExportMatrix m = testutil::make_matrix({{0.0, 1.0, 0.0, 0.0, 9.0}});
        const BlockPartition part = sector_partition(m, map);
        CHECK(part.row_label[0] == 5);
        CHECK(!part.row_tie[0]);
        CHECK(part.col_label[4] == 5);
    }
    SUBCASE("exact ties break to the lowest section and are flagged") {
        // Sections 3 (product 2) and 7 (product 6) with equal value.
        const ExportMatrix m = testutil::make_matrix({{0.0, 0.0, 2.5, 0.0, 0.0, 0.0, 2.5}});
        const BlockPartition part = sector_partition(m, map);
        CHECK(part.row_label[0] == 3);
        CHECK(part.row_tie[0]);
    }
    SUBCASE("50 random firms match the brute-force argmax") {
        Rng rng(321);
        testutil::Dense values(50, std::vector<double>(25, 0.0));
        for (auto& row : values)
            for (auto& v : row) v = rng.bernoulli(0.4) ? rng.uniform(0.5, 8.0) : 0.0;
        const ExportMatrix m = testutil::make_matrix(values);
        const BlockPartition part = sector_partition(m, map);
        for (int f = 0; f < 50; ++f) {
            double best = 0.0;
            int label = -1;
            double by_section[kHsSectionCount + 1] = {};
            for (int p = 0; p < 25; ++p)
                by_section[p % kHsSectionCount + 1] += values[static_cast<std::size_t>(f)][static_cast<std::size_t>(p)];
            for (int s = 1; s <= kHsSectionCount; ++s)
                if (by_section[s] > best) {
                    best = by_section[s];
                    label = s;
                }
            CHECK(part.row_label[static_cast<std::size_t>(f)] == label);
        }
    }
}

TEST_CASE("map_blocks_hs4_to_hs6 inherits heading blocks") {
    HsMap map;
    map.insert("010101", {"0101", 1, "s"});
    map.insert("010190", {"0101", 1, "s"});
    map.insert("020230", {"0202", 2, "s"});

    BlockPartition hs4;
    hs4.rows.intern("F0000");
    hs4.row_label = {0};
    hs4.cols.intern("0101");
    hs4.cols.intern("0202");
    hs4.col_label = {2, 5};
    hs4.n_blocks = 6;

    Interner hs6;
    hs6.intern("010101");
    hs6.intern("010190");
    hs6.intern("020230");
    const BlockPartition mapped = map_blocks_hs4_to_hs6(hs4, map, hs6);
    CHECK(mapped.col_label[0] == 2);
    CHECK(mapped.col_label[1] == 2);
    CHECK(mapped.col_label[2] == 5);
    CHECK(mapped.row_label == hs4.row_label);

    SUBCASE("unmapped heading is fatal") {
        Interner missing;
        missing.intern("999999");
        CHECK_THROWS(map_blocks_hs4_to_hs6(hs4, map, missing));
    }
    SUBCASE("identity when the partition is already HS6") {
        BlockPartition already;
        already.rows.intern("F0000");
        already.row_label = {0};
        already.cols.intern("010101");
        already.cols.intern("010190");
        already.cols.intern("020230");
        already.col_label = {3, 4, 5};
        const BlockPartition same = map_blocks_hs4_to_hs6(already, map, hs6);
        CHECK(same.col_label == already.col_label);
    }
}

} // TEST_SUITE
