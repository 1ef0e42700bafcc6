#include "ecx/prody.hpp"

#include <cmath>

#include "ecx/csv.hpp"

namespace ecx {

ProductScoreTable log_prody(const RcaMatrix& country_rca, const GdpTable& gdp, WarningLog* warnings) {
    const int n_products = country_rca.cols.size();

    // ln GDP per country row; every country with RCA entries must have one.
    std::vector<double> log_gdp(static_cast<std::size_t>(country_rca.rows.size()), 0.0);
    for (int c = 0; c < country_rca.rows.size(); ++c) {
        if (country_rca.m.row_end(c) == country_rca.m.row_begin(c)) continue;
        const auto g = gdp.find(country_rca.rows.name(c));
        if (!g)
            throw ValidationError("log_prody: no GDP entry for exporter '" + country_rca.rows.name(c) + "'");
        log_gdp[static_cast<std::size_t>(c)] = std::log(*g);
    }

    std::vector<double> weight_sum(static_cast<std::size_t>(n_products), 0.0);
    std::vector<double> weighted(static_cast<std::size_t>(n_products), 0.0);
    for (int c = 0; c < country_rca.m.rows(); ++c) {
        for (std::size_t k = country_rca.m.row_begin(c); k < country_rca.m.row_end(c); ++k) {
            const auto p = static_cast<std::size_t>(country_rca.m.col(k));
            weight_sum[p] += country_rca.m.value(k);
            weighted[p] += country_rca.m.value(k) * log_gdp[static_cast<std::size_t>(c)];
        }
    }

    ProductScoreTable out;
    std::size_t excluded = 0;
    for (int p = 0; p < n_products; ++p) {
        const auto i = static_cast<std::size_t>(p);
        if (weight_sum[i] <= 0.0) {
            ++excluded;
            if (warnings != nullptr)
                warnings->add("log_prody: product " + country_rca.cols.name(p) +
                              " has zero RCA mass, score undefined");
            continue;
        }
        out.products.intern(country_rca.cols.name(p));
        out.raw.push_back(weighted[i] / weight_sum[i]);
    }
    out.excluded_products = excluded;
    out.z.assign(out.raw.size(), 0.0);
    return out;
}

void zscore(ProductScoreTable& table) {
    const std::size_t n = table.raw.size();
    if (n < 2) throw ComputeError("zscore: need at least 2 scored products");
    double mean = 0.0;
    for (double v : table.raw) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : table.raw) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (var <= 0.0) throw ComputeError("zscore: all product scores identical, standard deviation is zero");
    table.mean = mean;
    table.stddev = std::sqrt(var);
    table.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) table.z[i] = (table.raw[i] - mean) / table.stddev;
}

ExpyTable expy(const ExportMatrix& firm_exports, const ProductScoreTable& scores, ExpyWeighting mode,
               WarningLog* warnings) {
    ExpyTable out;
    out.weighting = mode;
    out.firms = firm_exports.rows;
    const int n_firms = firm_exports.rows.size();
    out.expy.assign(static_cast<std::size_t>(n_firms), 0.0);
    out.coverage.assign(static_cast<std::size_t>(n_firms), 0.0);
    out.defined.assign(static_cast<std::size_t>(n_firms), false);

    // Score id per matrix column; -1 for products without a score.
    std::vector<int> score_id(static_cast<std::size_t>(firm_exports.cols.size()), -1);
    for (int p = 0; p < firm_exports.cols.size(); ++p)
        score_id[static_cast<std::size_t>(p)] = scores.products.find(firm_exports.cols.name(p));

    // RCA weights are computed on the firm-product matrix itself.
    RcaMatrix firm_rca;
    if (mode == ExpyWeighting::Rca) firm_rca = rca(firm_exports, warnings);
    const SparseMatrix& w = mode == ExpyWeighting::Rca ? firm_rca.m : firm_exports.m;

    std::size_t dropped = 0;
    for (int f = 0; f < n_firms; ++f) {
        double total_weight = 0.0;
        double scored_weight = 0.0;
        double acc = 0.0;
        for (std::size_t k = w.row_begin(f); k < w.row_end(f); ++k) {
            total_weight += w.value(k);
            const int sid = score_id[static_cast<std::size_t>(w.col(k))];
            if (sid < 0) continue; // excluded from numerator and denominator
            scored_weight += w.value(k);
            acc += w.value(k) * scores.z[static_cast<std::size_t>(sid)];
        }
        if (scored_weight <= 0.0) {
            if (total_weight > 0.0) {
                ++dropped;
                if (warnings != nullptr)
                    warnings->add("expy: firm " + firm_exports.rows.name(f) +
                                  " has no scored products, EXPY undefined");
            }
            continue;
        }
        out.expy[static_cast<std::size_t>(f)] = acc / scored_weight;
        out.coverage[static_cast<std::size_t>(f)] = total_weight > 0.0 ? scored_weight / total_weight : 0.0;
        out.defined[static_cast<std::size_t>(f)] = true;
    }
    out.dropped_firms = dropped;
    return out;
}

void write_product_scores(const ProductScoreTable& table, const std::string& path) {
    CsvWriter out(path, {"hs6", "logprody_raw", "logprody_z"});
    for (int p = 0; p < table.products.size(); ++p)
        out.row({table.products.name(p), format_double(table.raw[static_cast<std::size_t>(p)]),
                 format_double(table.z[static_cast<std::size_t>(p)])});
    out.close();
}

void write_expy(const ExpyTable& table, const std::string& path) {
    CsvWriter out(path, {"firm_id", "expy", "coverage"});
    for (int f = 0; f < table.firms.size(); ++f) {
        if (!table.defined[static_cast<std::size_t>(f)]) continue;
        out.row({table.firms.name(f), format_double(table.expy[static_cast<std::size_t>(f)]),
                 format_double(table.coverage[static_cast<std::size_t>(f)])});
    }
    out.close();
}

} // namespace ecx
