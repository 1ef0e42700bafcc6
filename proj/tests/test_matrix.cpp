#include <cmath>

#include "doctest.h"
#include "ecx/matrix.hpp"
#include "ecx/rng.hpp"
#include "helpers.hpp"

using namespace ecx;
using testutil::Dense;

namespace {

HsMap two_heading_map() {
    HsMap map;
    map.insert("010101", {"0101", 1, "animals"});
    map.insert("010102", {"0101", 1, "animals"});
    map.insert("020201", {"0202", 2, "meat"});
    return map;
}

Dense random_dense(int rows, int cols, double density, std::uint64_t seed) {
    Rng rng(seed);
    Dense out(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols), 0.0));
    for (auto& row : out)
        for (auto& v : row)
            if (rng.uniform() < density) v = 0.1 + rng.uniform() * 10.0;
    return out;
}

} // namespace

TEST_SUITE("matrix") {

TEST_CASE("aggregate_years averages with missing years as zeros") {
    const ExportPanel panel = testutil::make_panel({{"f", "010101", 2002, 10.0}});
    const ExportMatrix m = aggregate_years(panel, 2000, 2004, Resolution::HS6);
    REQUIRE(m.m.nnz() == 1);
    CHECK(m.m.value(0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("single-year aggregation is the yearly matrix") {
    const ExportPanel panel = testutil::make_panel(
        {{"f", "010101", 2002, 10.0}, {"f", "010101", 2003, 4.0}, {"g", "020201", 2002, 3.0}});
    const ExportMatrix m = aggregate_years(panel, 2002, 2002, Resolution::HS6);
    const Dense d = testutil::to_dense(m.m);
    CHECK(d[static_cast<std::size_t>(m.rows.find("f"))][static_cast<std::size_t>(m.cols.find("010101"))] ==
          doctest::Approx(10.0));
    CHECK(d[static_cast<std::size_t>(m.rows.find("g"))][static_cast<std::size_t>(m.cols.find("020201"))] ==
          doctest::Approx(3.0));
}

TEST_CASE("HS4 resolution sums HS6 values within the heading") {
    const ExportPanel panel =
        testutil::make_panel({{"f", "010101", 2000, 3.0}, {"f", "010102", 2000, 4.0}});
    const HsMap map = two_heading_map();
    const ExportMatrix m = aggregate_years(panel, 2000, 2000, Resolution::HS4, &map);
    REQUIRE(m.cols.size() == 1);
    CHECK(m.cols.name(0) == "0101");
    CHECK(m.m.value(0) == doctest::Approx(7.0));
}

TEST_CASE("HS4 resolution requires full map coverage") {
    const ExportPanel panel = testutil::make_panel({{"f", "999999", 2000, 3.0}});
    const HsMap map = two_heading_map();
    CHECK_THROWS_AS(aggregate_years(panel, 2000, 2000, Resolution::HS4, &map), ValidationError);
    CHECK_THROWS_AS(aggregate_years(panel, 2000, 2000, Resolution::HS4, nullptr), ValidationError);
}

TEST_CASE("rank-one matrix has RCA identically 1") {
    const std::vector<double> a = {2.0, 5.0, 0.25};
    const std::vector<double> b = {1.0, 3.0, 7.0, 0.5};
    Dense e(a.size(), std::vector<double>(b.size()));
    for (std::size_t f = 0; f < a.size(); ++f)
        for (std::size_t p = 0; p < b.size(); ++p) e[f][p] = a[f] * b[p];
    const RcaMatrix r = rca(testutil::make_matrix(e));
    for (std::size_t k = 0; k < r.m.nnz(); ++k) CHECK(r.m.value(k) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("2x2 RCA matches the hand evaluation and the dense oracle") {
    const Dense e = {{2.0, 0.0}, {1.0, 1.0}};
    const RcaMatrix r = rca(testutil::make_matrix(e));
    const Dense got = testutil::to_dense(r.m);
    CHECK(got[0][0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(got[0][1] == doctest::Approx(0.0));
    CHECK(got[1][0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(got[1][1] == doctest::Approx(2.0).epsilon(1e-12));
    const Dense oracle = testutil::rca_oracle(e);
    for (int f = 0; f < 2; ++f)
        for (int p = 0; p < 2; ++p)
            CHECK(got[static_cast<std::size_t>(f)][static_cast<std::size_t>(p)] ==
                  doctest::Approx(oracle[static_cast<std::size_t>(f)][static_cast<std::size_t>(p)])
                      .epsilon(1e-12));
}

TEST_CASE("random RCA matches the dense oracle") {
    const Dense e = random_dense(12, 9, 0.6, 7);
    const RcaMatrix r = rca(testutil::make_matrix(e));
    const Dense got = testutil::to_dense(r.m);
    const Dense oracle = testutil::rca_oracle(e);
    for (std::size_t f = 0; f < e.size(); ++f)
        for (std::size_t p = 0; p < e[0].size(); ++p)
            CHECK(got[f][p] == doctest::Approx(oracle[f][p]).epsilon(1e-12));
}

TEST_CASE("all-zero matrix is fatal for rca") {
    ExportMatrix empty = testutil::make_matrix({{1.0}});
    empty.m = SparseMatrix::from_triplets(1, 1, {});
    empty.grand_total = 0.0;
    CHECK_THROWS_AS(rca(empty), ComputeError);
}

TEST_CASE("rows with zero totals are dropped with a warning") {
    WarningLog warnings;
    const Dense e = {{1.0, 2.0}, {0.0, 0.0}};
    const RcaMatrix r = rca(testutil::make_matrix(e), &warnings);
    CHECK(r.dropped_rows == 1);
    CHECK(warnings.size() == 1);
}

TEST_CASE("rca is invariant under global rescaling") {
    const Dense e = random_dense(8, 6, 0.7, 21);
    Dense scaled = e;
    for (auto& row : scaled)
        for (auto& v : row) v *= 137.25;
    const Dense a = testutil::to_dense(rca(testutil::make_matrix(e)).m);
    const Dense b = testutil::to_dense(rca(testutil::make_matrix(scaled)).m);
    for (std::size_t f = 0; f < a.size(); ++f)
        for (std::size_t p = 0; p < a[0].size(); ++p) CHECK(a[f][p] == doctest::Approx(b[f][p]).epsilon(1e-12));
}

TEST_CASE("world-share weighted mean of RCA is 1 for every product") {
    const Dense e = random_dense(15, 10, 0.8, 3);
    const ExportMatrix m = testutil::make_matrix(e);
    const RcaMatrix r = rca(m);
    const Dense rd = testutil::to_dense(r.m);
    for (std::size_t p = 0; p < e[0].size(); ++p) {
        if (m.col_totals[p] <= 0.0) continue;
        double acc = 0.0;
        for (std::size_t f = 0; f < e.size(); ++f)
            acc += (m.row_totals[f] / m.grand_total) * rd[f][p];
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("binarize uses a strict threshold") {
    Dense e = {{2.0, 0.0}, {1.0, 1.0}};
    const RcaMatrix r = rca(testutil::make_matrix(e));
    const BinaryMatrix b = binarize(r, 1.0);
    const Dense d = testutil::to_dense(b.m);
    CHECK(d[0][0] == 1.0); // RCA 4/3
    CHECK(d[1][0] == 0.0); // RCA 2/3
    CHECK(d[1][1] == 1.0); // RCA 2

    // RCA exactly 1 maps to 0; just above maps to 1.
    SUBCASE("boundary") {
        RcaMatrix exact;
        exact.rows = r.rows;
        exact.cols = r.cols;
        exact.m = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0001}, {1, 0, 0.9999}});
        const Dense dd = testutil::to_dense(binarize(exact, 1.0).m);
        CHECK(dd[0][0] == 0.0);
        CHECK(dd[0][1] == 1.0);
        CHECK(dd[1][0] == 0.0);
    }
}

TEST_CASE("rank-one matrix binarizes to all zeros at threshold 1") {
    const Dense e = {{1.0, 2.0}, {3.0, 6.0}};
    const BinaryMatrix b = binarize(rca(testutil::make_matrix(e)), 1.0);
    CHECK(b.m.nnz() == 0);
}

TEST_CASE("binarize rejects nonpositive thresholds") {
    const RcaMatrix r = rca(testutil::make_matrix({{1.0, 2.0}, {3.0, 1.0}}));
    CHECK_THROWS_AS(binarize(r, 0.0), ValidationError);
}

TEST_CASE("diversification equals a brute-force row scan") {
    CHECK(diversification(testutil::make_binary({{0, 0, 0}}))[0] == 0);
    CHECK(diversification(testutil::make_binary({{1, 1, 1, 0}}))[0] == 3);

    Rng rng(5);
    std::vector<std::vector<int>> cells(20, std::vector<int>(15, 0));
    for (auto& row : cells)
        for (auto& v : row) v = rng.bernoulli(0.3) ? 1 : 0;
    const std::vector<int> d = diversification(testutil::make_binary(cells));
    for (std::size_t f = 0; f < cells.size(); ++f) {
        int expected = 0;
        for (int v : cells[f]) expected += v;
        CHECK(d[f] == expected);
    }
}

} // TEST_SUITE
