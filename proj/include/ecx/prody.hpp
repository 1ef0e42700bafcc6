#pragma once

#include <vector>

#include "ecx/common.hpp"
#include "ecx/matrix.hpp"
#include "ecx/panel.hpp"

namespace ecx {

// Per-product income score: RCA-weighted mean of exporters' log GDP per capita,
// plus its z-scored version. Normalization constants are kept so out-of-sample
// products can be scored consistently.
struct ProductScoreTable {
    Interner products;
    std::vector<double> raw;
    std::vector<double> z;
    double mean = 0.0;
    double stddev = 0.0; // population standard deviation
    std::size_t excluded_products = 0;

    // z score of a product by code; nullopt when the product has no score.
    std::optional<double> z_of(std::string_view code) const {
        int id = products.find(code);
        if (id < 0) return std::nullopt;
        return z[static_cast<std::size_t>(id)];
    }
};

enum class ExpyWeighting { Volume, Rca };

struct ExpyTable {
    Interner firms;
    std::vector<double> expy;
    std::vector<double> coverage; // share of a firm's weight carried by scored products
    ExpyWeighting weighting = ExpyWeighting::Volume;
    std::size_t dropped_firms = 0; // zero total weight after coverage filtering
    std::vector<bool> defined;
};

// Raw scores only; z column is filled by zscore().
ProductScoreTable log_prody(const RcaMatrix& country_rca, const GdpTable& gdp,
                            WarningLog* warnings = nullptr);

// Population z-score in place; fatal when fewer than 2 distinct values.
void zscore(ProductScoreTable& table);

ExpyTable expy(const ExportMatrix& firm_exports, const ProductScoreTable& scores,
               ExpyWeighting mode = ExpyWeighting::Volume, WarningLog* warnings = nullptr);

void write_product_scores(const ProductScoreTable& table, const std::string& path);
void write_expy(const ExpyTable& table, const std::string& path);

} // namespace ecx
