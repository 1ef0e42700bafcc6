#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ecx/common.hpp"
#include "ecx/matrix.hpp"
#include "ecx/prody.hpp"

namespace ecx {

// Sectioned key = value text file; # and ; start comments.
class IniFile {
public:
    static IniFile parse_file(const std::string& path);
    static IniFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long long get_int(const std::string& section, const std::string& key, long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    // Every (section, key) pair must appear in `allowed` ("section.key").
    void require_known_keys(const std::vector<std::string>& allowed) const;

private:
    std::string origin_;
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct RunConfig {
    // [inputs]
    std::string exports_path;
    std::string world_trade_path;
    std::string financials_path;
    std::string gdp_path;
    std::string hs_map_path;
    // [years]
    int year_start = 1995;
    int year_end = 2019;
    // [indicators]
    double rca_threshold = 1.0;
    ExpyWeighting expy_weighting = ExpyWeighting::Volume;
    double similarity_cutoff = 0.0;
    bool log1p_diversification = false;
    // [blocks]
    Resolution block_resolution = Resolution::HS4;
    int block_restarts = 32;
    int block_max_blocks = 0; // 0: scan
    int block_max_sweeps = 200;
    std::uint64_t seed = 42;
    // [regression]
    int t_star = 2015;
    int delta_t = 4;
    bool model_growth = true;
    bool model_profit = true;
    bool include_avg_complexity = false;
    // [figures]
    int heatmap_bins = 40;
    double heatmap_sigma = 3.0;
    double curve_bandwidth = 0.0; // 0: plug-in rule
    int curve_grid = 100;
    // [output]
    std::string output_dir = "out";
    bool emit_similarity = false;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_ini(const IniFile& ini);

    // Full check before any compute: files exist, years consistent with t* +- dt.
    void validate() const;
};

struct SynthConfig {
    int firms = 12852;
    int products = 5203;
    int blocks = 7;
    double intra_block_p = 0.03; // keeps the default-scale graph at realistic density
    double inter_block_p = 0.0005;
    double value_mu = 10.0; // lognormal export values
    double value_sigma = 1.0;
    int countries = 40;
    double gdp_log_min = 8.0;
    double gdp_log_max = 12.0;
    double revenue_mu = 14.0; // lognormal operating revenue
    double revenue_sigma = 1.2;
    // Planted cross-sectional model for growth and profit per employee.
    double intercept = 0.0;
    double beta_revenue = 0.039;
    double beta_coherence = 0.0;
    double beta_expy = 0.05;
    double beta_d_out = 0.016;
    double beta_d_in = -0.014;
    double noise = 0.05;
    double similarity_cutoff = 0.0; // must match the run that consumes the data
    int year_start = 1995;
    int year_end = 2019;
    int t_star = 2015;
    int delta_t = 4;
    std::uint64_t seed = 1;

    static SynthConfig from_ini(const IniFile& ini);
    void validate() const;
};

} // namespace ecx
