#pragma once

// Shared builders and independent brute-force oracles. Oracles deliberately
// avoid the library's computation paths: plain loops over dense arrays.

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ecx/blocks.hpp"
#include "ecx/matrix.hpp"
#include "ecx/panel.hpp"
#include "ecx/rng.hpp"

namespace testutil {

using Dense = std::vector<std::vector<double>>;

inline std::string firm_name(int f) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "F%04d", f);
    return buf;
}

inline std::string hs6_code(int p) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d11", 1000 + p);
    return buf;
}

inline ecx::ExportPanel make_panel(
    const std::vector<std::tuple<std::string, std::string, int, double>>& rows) {
    ecx::Interner firms, products;
    std::vector<ecx::ExportRecord> records;
    for (const auto& [f, p, y, v] : rows) records.push_back({firms.intern(f), products.intern(p), y, v});
    return ecx::ExportPanel(std::move(firms), std::move(products), std::move(records));
}

// Dense firm x product values as a one-year matrix.
inline ecx::ExportMatrix make_matrix(const Dense& values, int year = 2000) {
    std::vector<std::tuple<std::string, std::string, int, double>> rows;
    for (std::size_t f = 0; f < values.size(); ++f)
        for (std::size_t p = 0; p < values[f].size(); ++p)
            if (values[f][p] != 0.0)
                rows.emplace_back(firm_name(static_cast<int>(f)), hs6_code(static_cast<int>(p)), year,
                                  values[f][p]);
    ecx::ExportPanel panel = make_panel(rows);
    // Interners must cover empty rows/columns too.
    ecx::Interner firms, products;
    std::vector<ecx::ExportRecord> records;
    for (std::size_t f = 0; f < values.size(); ++f) firms.intern(firm_name(static_cast<int>(f)));
    std::size_t cols = 0;
    for (const auto& row : values) cols = std::max(cols, row.size());
    for (std::size_t p = 0; p < cols; ++p) products.intern(hs6_code(static_cast<int>(p)));
    for (const auto& r : panel.records())
        records.push_back({firms.intern(panel.firms().name(r.firm)),
                           products.intern(panel.products().name(r.product)), r.year, r.value});
    ecx::ExportPanel full(std::move(firms), std::move(products), std::move(records));
    return ecx::aggregate_years(full, year, year, ecx::Resolution::HS6);
}

inline ecx::BinaryMatrix make_binary(const std::vector<std::vector<int>>& cells) {
    Dense values(cells.size());
    for (std::size_t f = 0; f < cells.size(); ++f) {
        values[f].resize(cells[f].size());
        for (std::size_t p = 0; p < cells[f].size(); ++p) values[f][p] = cells[f][p] ? 1.0 : 0.0;
    }
    const ecx::ExportMatrix m = make_matrix(values);
    ecx::BinaryMatrix binary;
    binary.rows = m.rows;
    binary.cols = m.cols;
    binary.threshold = 0.5;
    binary.m = m.m;
    return binary;
}

inline Dense to_dense(const ecx::SparseMatrix& m) {
    Dense out(static_cast<std::size_t>(m.rows()),
              std::vector<double>(static_cast<std::size_t>(m.cols()), 0.0));
    for (int r = 0; r < m.rows(); ++r)
        for (std::size_t k = m.row_begin(r); k < m.row_end(r); ++k)
            out[static_cast<std::size_t>(r)][static_cast<std::size_t>(m.col(k))] = m.value(k);
    return out;
}

// --- oracles ---------------------------------------------------------------

inline Dense rca_oracle(const Dense& e) {
    const std::size_t nf = e.size(), np = e[0].size();
    std::vector<double> row(nf, 0.0), col(np, 0.0);
    double total = 0.0;
    for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t p = 0; p < np; ++p) {
            row[f] += e[f][p];
            col[p] += e[f][p];
            total += e[f][p];
        }
    Dense out(nf, std::vector<double>(np, 0.0));
    for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t p = 0; p < np; ++p)
            if (row[f] > 0.0 && col[p] > 0.0) out[f][p] = (e[f][p] / row[f]) / (col[p] / total);
    return out;
}

// Q by direct evaluation of the bipartite sum over every (firm, product) pair.
inline double modularity_oracle(const std::vector<std::vector<int>>& adj, const std::vector<int>& row_label,
                                const std::vector<int>& col_label) {
    const std::size_t nf = adj.size(), np = adj[0].size();
    std::vector<double> kf(nf, 0.0), kp(np, 0.0);
    double m = 0.0;
    for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t p = 0; p < np; ++p) {
            kf[f] += adj[f][p];
            kp[p] += adj[f][p];
            m += adj[f][p];
        }
    double q = 0.0;
    for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t p = 0; p < np; ++p)
            if (row_label[f] == col_label[p]) q += adj[f][p] - kf[f] * kp[p] / m;
    return q / m;
}

// Planted bipartite block graph: direct Bernoulli links, no thresholding.
struct PlantedGraph {
    ecx::BinaryMatrix binary;
    std::vector<int> firm_block;
    std::vector<int> product_block;
    double expected_q = 0.0; // closed-form expectation for the planted labels
};

inline PlantedGraph make_planted(int n_f, int n_p, int n_b, double p_in, double p_out,
                                 std::uint64_t seed) {
    PlantedGraph g;
    g.firm_block.resize(static_cast<std::size_t>(n_f));
    g.product_block.resize(static_cast<std::size_t>(n_p));
    for (int f = 0; f < n_f; ++f) g.firm_block[static_cast<std::size_t>(f)] = static_cast<int>(static_cast<long long>(f) * n_b / n_f);
    for (int p = 0; p < n_p; ++p) g.product_block[static_cast<std::size_t>(p)] = static_cast<int>(static_cast<long long>(p) * n_b / n_p);

    ecx::Rng rng(seed);
    std::vector<std::vector<int>> cells(static_cast<std::size_t>(n_f),
                                        std::vector<int>(static_cast<std::size_t>(n_p), 0));
    for (int f = 0; f < n_f; ++f)
        for (int p = 0; p < n_p; ++p) {
            const double prob =
                g.firm_block[static_cast<std::size_t>(f)] == g.product_block[static_cast<std::size_t>(p)] ? p_in
                                                                                                          : p_out;
            cells[static_cast<std::size_t>(f)][static_cast<std::size_t>(p)] = rng.bernoulli(prob) ? 1 : 0;
        }
    g.binary = make_binary(cells);

    // Expected Q with the configured probabilities and actual block sizes.
    std::vector<double> fb(static_cast<std::size_t>(n_b), 0.0), pb(static_cast<std::size_t>(n_b), 0.0);
    for (int b : g.firm_block) fb[static_cast<std::size_t>(b)] += 1.0;
    for (int b : g.product_block) pb[static_cast<std::size_t>(b)] += 1.0;
    double m_in = 0.0, m = 0.0;
    for (int b = 0; b < n_b; ++b) m_in += fb[static_cast<std::size_t>(b)] * pb[static_cast<std::size_t>(b)] * p_in;
    for (int bf = 0; bf < n_b; ++bf)
        for (int bp = 0; bp < n_b; ++bp)
            m += fb[static_cast<std::size_t>(bf)] * pb[static_cast<std::size_t>(bp)] * (bf == bp ? p_in : p_out);
    const double total_p = [&] {
        double s = 0.0;
        for (double v : pb) s += v;
        return s;
    }();
    const double total_f = [&] {
        double s = 0.0;
        for (double v : fb) s += v;
        return s;
    }();
    double null_mass = 0.0;
    for (int b = 0; b < n_b; ++b) {
        const double k_f = pb[static_cast<std::size_t>(b)] * p_in + (total_p - pb[static_cast<std::size_t>(b)]) * p_out;
        const double k_p = fb[static_cast<std::size_t>(b)] * p_in + (total_f - fb[static_cast<std::size_t>(b)]) * p_out;
        null_mass += fb[static_cast<std::size_t>(b)] * k_f * pb[static_cast<std::size_t>(b)] * k_p;
    }
    g.expected_q = (m_in - null_mass / m) / m;
    return g;
}

// Fraction of nodes whose recovered label maps to their planted label under a
// majority vote per recovered block.
inline double label_accuracy(const std::vector<int>& planted_rows, const std::vector<int>& planted_cols,
                             const ecx::BlockPartition& found) {
    std::map<int, std::map<int, int>> votes;
    for (std::size_t f = 0; f < planted_rows.size(); ++f) ++votes[found.row_label[f]][planted_rows[f]];
    for (std::size_t p = 0; p < planted_cols.size(); ++p) ++votes[found.col_label[p]][planted_cols[p]];
    std::map<int, int> mapping;
    for (const auto& [rec, counts] : votes) {
        int best = -1, best_count = -1;
        for (const auto& [planted, count] : counts)
            if (count > best_count) {
                best = planted;
                best_count = count;
            }
        mapping[rec] = best;
    }
    std::size_t hits = 0;
    for (std::size_t f = 0; f < planted_rows.size(); ++f)
        if (mapping[found.row_label[f]] == planted_rows[f]) ++hits;
    for (std::size_t p = 0; p < planted_cols.size(); ++p)
        if (mapping[found.col_label[p]] == planted_cols[p]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(planted_rows.size() + planted_cols.size());
}

// Plain Gauss-Jordan inverse for the OLS sandwich oracle.
inline Dense invert(Dense a) {
    const std::size_t n = a.size();
    Dense inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = a[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double factor = a[r][col];
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= factor * a[col][c];
                inv[r][c] -= factor * inv[col][c];
            }
        }
    }
    return inv;
}

struct OlsOracle {
    std::vector<double> beta;
    std::vector<double> se_hc1;
};

inline OlsOracle ols_hc1_oracle(const Dense& x, const std::vector<double>& y) {
    const std::size_t n = x.size(), k = x[0].size();
    Dense xtx(k, std::vector<double>(k, 0.0));
    std::vector<double> xty(k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < k; ++a) {
            xty[a] += x[i][a] * y[i];
            for (std::size_t b = 0; b < k; ++b) xtx[a][b] += x[i][a] * x[i][b];
        }
    const Dense xtx_inv = invert(xtx);
    OlsOracle out;
    out.beta.assign(k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) out.beta[a] += xtx_inv[a][b] * xty[b];

    std::vector<double> resid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double fit = 0.0;
        for (std::size_t a = 0; a < k; ++a) fit += x[i][a] * out.beta[a];
        resid[i] = y[i] - fit;
    }
    Dense meat(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) meat[a][b] += x[i][a] * resid[i] * resid[i] * x[i][b];
    Dense cov(k, std::vector<double>(k, 0.0));
    const double scale = static_cast<double>(n) / static_cast<double>(n - k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t u = 0; u < k; ++u)
                for (std::size_t v = 0; v < k; ++v) acc += xtx_inv[a][u] * meat[u][v] * xtx_inv[v][b];
            cov[a][b] = scale * acc;
        }
    out.se_hc1.assign(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) out.se_hc1[a] = std::sqrt(cov[a][a]);
    return out;
}

} // namespace testutil
