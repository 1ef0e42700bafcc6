#pragma once

#include <string>
#include <vector>

#include "ecx/blocks.hpp"
#include "ecx/common.hpp"
#include "ecx/config.hpp"
#include "ecx/panel.hpp"

namespace ecx {

// Planted ground truth for one generated economy. Firms flagged as not
// identified have an undefined covariate (zero in/out diversification or
// nonpositive coherence) and are expected to be dropped by the regression.
struct SynthTruth {
    std::vector<int> firm_block;
    std::vector<int> product_block;
    std::vector<int> firm_section;
    std::vector<double> expy;
    std::vector<double> coherence;
    std::vector<int> d_in;
    std::vector<int> d_out;
    std::vector<double> log_revenue;
    std::vector<double> planted_growth;
    std::vector<double> planted_profit; // symlog scale
    std::vector<bool> identified;
};

struct SynthData {
    ExportPanel exports;      // firm-level, values constant across years
    ExportPanel world_trade;  // country-level, reuses the export schema
    FinancialPanel financials;
    GdpTable gdp;
    HsMap hs_map;
    BlockPartition planted_partition; // over the firm HS6 matrix
    SynthTruth truth;
    SynthConfig config;
};

// Deterministic per seed. Growth and profit are planted through revenue and
// income paths so the full variable construction is exercised downstream.
SynthData generate(const SynthConfig& config);

// Writes exports.csv, world_trade.csv, financials.csv, gdp.csv, hs_map.csv,
// truth.json and truth_firms.csv into `dir` (created if needed).
void write_synth(const SynthData& data, const std::string& dir);

} // namespace ecx
