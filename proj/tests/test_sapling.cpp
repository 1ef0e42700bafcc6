#include <cmath>
#include <limits>

#include "doctest.h"
#include "ecx/rng.hpp"
#include "ecx/sapling.hpp"
#include "helpers.hpp"

using namespace ecx;

namespace {

std::vector<std::vector<int>> random_cells(int rows, int cols, double density, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<int>> cells(static_cast<std::size_t>(rows),
                                        std::vector<int>(static_cast<std::size_t>(cols), 0));
    for (auto& row : cells)
        for (auto& v : row) v = rng.bernoulli(density) ? 1 : 0;
    return cells;
}

Interner product_set(int n) {
    Interner products;
    for (int p = 0; p < n; ++p) products.intern(testutil::hs6_code(p));
    return products;
}

} // namespace

TEST_SUITE("sapling") {

TEST_CASE("cooccurrence counts match a brute-force pair scan") {
    SUBCASE("identical columns co-occur with their degree") {
        const CooccurrenceTable co = cooccurrence(testutil::make_binary({{1, 1}, {1, 1}, {1, 1}, {0, 0}}));
        CHECK(co.degree[0] == 3);
        CHECK(co.at(0, 1) == 3);
        CHECK(co.at(0, 0) == 3);
    }
    SUBCASE("disjoint columns never co-occur") {
        const CooccurrenceTable co = cooccurrence(testutil::make_binary({{1, 0}, {1, 0}, {0, 1}}));
        CHECK(co.at(0, 1) == 0);
    }
    SUBCASE("random 20x10") {
        const auto cells = random_cells(20, 10, 0.4, 17);
        const CooccurrenceTable co = cooccurrence(testutil::make_binary(cells));
        CHECK(co.n_firms == 20);
        for (int p = 0; p < 10; ++p)
            for (int q = 0; q < 10; ++q) {
                int expected = 0;
                for (int f = 0; f < 20; ++f)
                    expected += cells[static_cast<std::size_t>(f)][static_cast<std::size_t>(p)] &&
                                cells[static_cast<std::size_t>(f)][static_cast<std::size_t>(q)];
                CHECK(co.at(p, q) == expected);
                CHECK(co.at(p, q) == co.at(q, p));
                CHECK(co.at(p, q) <= std::min(co.degree[static_cast<std::size_t>(p)],
                                              co.degree[static_cast<std::size_t>(q)]));
            }
    }
}

TEST_CASE("sapling limit cases from the similarity definition") {
    SUBCASE("subset: every exporter of p also exports p-prime") {
        // CO = k_p = k_p' = 2 with N = 4.
        const CooccurrenceTable co =
            cooccurrence(testutil::make_binary({{1, 1}, {1, 1}, {0, 0}, {0, 0}}));
        const SimilarityMatrix b = sapling(co);
        CHECK(*b.entry(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(*b.entry(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("independence: k_p/N equals CO/k_p-prime") {
        // N=4, k_0=2, k_1=2, CO=1: 2/4 == 1/2.
        const CooccurrenceTable co =
            cooccurrence(testutil::make_binary({{1, 1}, {1, 0}, {0, 1}, {0, 0}}));
        const SimilarityMatrix b = sapling(co);
        CHECK(*b.entry(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("N=4, k_p=1, k_p'=2, CO=1 gives f=2/3 and B=1/3") {
        const CooccurrenceTable co =
            cooccurrence(testutil::make_binary({{1, 1}, {0, 1}, {0, 0}, {0, 0}}));
        const SimilarityMatrix b = sapling(co);
        CHECK(*b.entry(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("sapling stays in [-1, 1] and signs follow the co-occurrence ratio") {
    const auto cells = random_cells(30, 12, 0.35, 23);
    const CooccurrenceTable co = cooccurrence(testutil::make_binary(cells));
    const SimilarityMatrix b = sapling(co);
    const double n = 30.0;
    for (int p = 0; p < 12; ++p) {
        const int kp = co.degree[static_cast<std::size_t>(p)];
        if (kp == 0 || kp == 30) continue;
        CHECK(*b.entry(p, p) == doctest::Approx(1.0).epsilon(1e-12));
        for (int q = 0; q < 12; ++q) {
            const int kq = co.degree[static_cast<std::size_t>(q)];
            if (kq == 0 || kq == 30) continue;
            const double v = *b.entry(p, q);
            CHECK(v >= -1.0 - 1e-12);
            CHECK(v <= 1.0 + 1e-12);
            const double ratio = co.at(p, q) * n / (static_cast<double>(kp) * kq);
            if (ratio > 1.0 + 1e-12) CHECK(v >= -1e-12);
            if (ratio < 1.0 - 1e-12) CHECK(v <= 1e-12);
        }
    }
}

TEST_CASE("degenerate degrees are undefined entries with a warning") {
    // Column 0 exported by everyone (k = N), column 2 by no one (k = 0).
    WarningLog warnings;
    const CooccurrenceTable co =
        cooccurrence(testutil::make_binary({{1, 1, 0}, {1, 0, 0}, {1, 1, 0}}));
    const SimilarityMatrix b = sapling(co, 0.0, &warnings);
    CHECK(!b.entry(0, 1));
    CHECK(!b.entry(1, 0));
    CHECK(!b.entry(2, 1));
    CHECK(b.entry(1, 1));
    CHECK(b.undefined_entries() == 8); // rows/cols 0 and 2 against everything
    CHECK(warnings.size() == 1);
}

TEST_CASE("sparse cutoff stores only large entries but keeps values") {
    const auto cells = random_cells(40, 14, 0.3, 31);
    const CooccurrenceTable co = cooccurrence(testutil::make_binary(cells));
    const SimilarityMatrix dense = sapling(co, 0.0);
    const SimilarityMatrix sparse = sapling(co, 0.2);
    CHECK(dense.dense());
    CHECK(!sparse.dense());
    CHECK(sparse.stored_entries() <= dense.stored_entries());
    for (int p = 0; p < 14; ++p)
        for (int q = 0; q < 14; ++q) {
            const auto dv = dense.entry(p, q);
            const auto sv = sparse.entry(p, q);
            if (sv) {
                REQUIRE(dv);
                CHECK(*sv == doctest::Approx(*dv).epsilon(1e-15));
                CHECK(std::abs(*sv) >= 0.2);
            } else if (dv) {
                CHECK(std::abs(*dv) < 0.2);
            }
        }
}

TEST_CASE("coherence hand examples") {
    Interner products = product_set(2);
    SUBCASE("two products, equal volumes, B = 0.8") {
        const SimilarityMatrix sim =
            SimilarityMatrix::from_dense(products, {1.0, 0.8, 0.8, 1.0});
        const ExportMatrix m = testutil::make_matrix({{5.0, 5.0}});
        const CoherenceTable c = coherence(m, sim);
        CHECK(c.coherence[0] == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(!c.degenerate[0]);
    }
    SUBCASE("unrelated products give coherence 0") {
        const SimilarityMatrix sim = SimilarityMatrix::from_dense(products, {1.0, 0.0, 0.0, 1.0});
        const ExportMatrix m = testutil::make_matrix({{5.0, 2.0}});
        CHECK(coherence(m, sim).coherence[0] == doctest::Approx(0.0));
    }
    SUBCASE("single-product firms are flagged degenerate with C = 1") {
        const SimilarityMatrix sim = SimilarityMatrix::from_dense(products, {1.0, 0.3, 0.3, 1.0});
        const ExportMatrix m = testutil::make_matrix({{5.0, 0.0}});
        const CoherenceTable c = coherence(m, sim);
        CHECK(c.coherence[0] == doctest::Approx(1.0));
        CHECK(c.degenerate[0]);
    }
}

TEST_CASE("coherence equals b when all pairwise similarities equal b") {
    const int n = 5;
    Interner products = product_set(n);
    const double b = -0.35;
    std::vector<double> vals(static_cast<std::size_t>(n) * n, b);
    for (int p = 0; p < n; ++p) vals[static_cast<std::size_t>(p) * n + static_cast<std::size_t>(p)] = 1.0;
    const SimilarityMatrix sim = SimilarityMatrix::from_dense(products, std::move(vals));
    const ExportMatrix m = testutil::make_matrix({{1.0, 2.0, 3.0, 4.0, 5.0}});
    CHECK(coherence(m, sim).coherence[0] == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("coherence is invariant under rescaling a firm's volumes") {
    const auto cells = random_cells(25, 8, 0.45, 41);
    const CooccurrenceTable co = cooccurrence(testutil::make_binary(cells));
    const SimilarityMatrix sim = sapling(co);
    testutil::Dense volumes(25, std::vector<double>(8, 0.0));
    Rng rng(43);
    for (auto& row : volumes)
        for (auto& v : row) v = rng.uniform() < 0.5 ? rng.uniform(1.0, 9.0) : 0.0;
    const CoherenceTable a = coherence(testutil::make_matrix(volumes), sim);
    for (auto& row : volumes)
        for (auto& v : row) v *= 41.5;
    const CoherenceTable b = coherence(testutil::make_matrix(volumes), sim);
    for (std::size_t f = 0; f < 25; ++f) {
        if (!a.defined[f]) continue;
        CHECK(a.coherence[f] == doctest::Approx(b.coherence[f]).epsilon(1e-12));
    }
}

TEST_CASE("undefined similarity entries count as zero and are reported") {
    Interner products = product_set(3);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    // Pair (0,1) defined at 0.5; anything with product 2 undefined.
    const SimilarityMatrix sim = SimilarityMatrix::from_dense(
        products, {1.0, 0.5, nan, 0.5, 1.0, nan, nan, nan, nan});
    const ExportMatrix m = testutil::make_matrix({{1.0, 1.0, 1.0}});
    WarningLog warnings;
    const CoherenceTable c = coherence(m, sim, &warnings);
    // Ordered pairs: (0,1), (1,0) contribute 0.5; pairs with 2 contribute 0.
    CHECK(c.coherence[0] == doctest::Approx(2.0 * 0.5 / 6.0).epsilon(1e-12));
    CHECK(c.undefined_pairs == 4);
    CHECK(warnings.size() == 1);
}

TEST_CASE("asymmetry diagnostic is reported but bounded by construction here") {
    const auto cells = random_cells(30, 9, 0.4, 53);
    const SimilarityMatrix sim = sapling(cooccurrence(testutil::make_binary(cells)));
    CHECK(sim.max_asymmetry() >= 0.0);
    CHECK(sim.max_asymmetry() <= 2.0);
}

} // TEST_SUITE
