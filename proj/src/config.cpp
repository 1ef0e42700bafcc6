#include "ecx/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecx/csv.hpp"

namespace ecx {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

IniFile IniFile::parse_string(const std::string& text, const std::string& origin) {
    IniFile ini;
    ini.origin_ = origin;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t comment = raw.find_first_of("#;");
        std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError(origin + ":" + std::to_string(line_no) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ValidationError(origin + ":" + std::to_string(line_no) + ": empty section name");
            ini.sections_[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ValidationError(origin + ":" + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ValidationError(origin + ":" + std::to_string(line_no) + ": key outside any [section]");
        auto& sec = ini.sections_[section];
        if (sec.count(key) > 0)
            throw ValidationError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        sec[key] = trim(line.substr(eq + 1));
    }
    return ini;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key, const std::string& fallback) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    const auto parsed = parse_double(v);
    if (!parsed) throw ValidationError(origin_ + ": " + section + "." + key + " is not a number: '" + v + "'");
    return *parsed;
}

long long IniFile::get_int(const std::string& section, const std::string& key, long long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    const auto parsed = parse_int(v);
    if (!parsed) throw ValidationError(origin_ + ": " + section + "." + key + " is not an integer: '" + v + "'");
    return *parsed;
}

bool IniFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key, "");
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ValidationError(origin_ + ": " + section + "." + key + " is not a boolean: '" + v + "'");
}

void IniFile::require_known_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [section, keys] : sections_) {
        for (const auto& [key, value] : keys) {
            const std::string qualified = section + "." + key;
            if (std::find(allowed.begin(), allowed.end(), qualified) == allowed.end())
                throw ValidationError(origin_ + ": unknown config key '" + qualified + "'");
        }
    }
}

namespace {

const std::vector<std::string> kRunKeys = {
    "inputs.exports", "inputs.world_trade", "inputs.financials", "inputs.gdp", "inputs.hs_map",
    "years.start", "years.end",
    "indicators.rca_threshold", "indicators.expy_weighting", "indicators.similarity_cutoff",
    "indicators.log1p_diversification",
    "blocks.resolution", "blocks.restarts", "blocks.max_blocks", "blocks.max_sweeps", "blocks.seed",
    "regression.t_star", "regression.delta_t", "regression.models", "regression.include_avg_complexity",
    "figures.heatmap_bins", "figures.heatmap_sigma", "figures.curve_bandwidth", "figures.curve_grid",
    "output.dir", "output.emit_similarity",
    // a run config may carry a [synth] section for the generator
    "synth.firms", "synth.products", "synth.blocks", "synth.intra_block_p", "synth.inter_block_p",
    "synth.value_mu", "synth.value_sigma", "synth.countries", "synth.gdp_log_min", "synth.gdp_log_max",
    "synth.revenue_mu", "synth.revenue_sigma", "synth.intercept", "synth.beta_revenue",
    "synth.beta_coherence", "synth.beta_expy", "synth.beta_d_out", "synth.beta_d_in", "synth.noise",
    "synth.similarity_cutoff", "synth.year_start", "synth.year_end", "synth.t_star", "synth.delta_t",
    "synth.seed"};

} // namespace

RunConfig RunConfig::from_file(const std::string& path) { return from_ini(IniFile::parse_file(path)); }

RunConfig RunConfig::from_ini(const IniFile& ini) {
    ini.require_known_keys(kRunKeys);
    RunConfig cfg;
    cfg.exports_path = ini.get("inputs", "exports", "");
    cfg.world_trade_path = ini.get("inputs", "world_trade", "");
    cfg.financials_path = ini.get("inputs", "financials", "");
    cfg.gdp_path = ini.get("inputs", "gdp", "");
    cfg.hs_map_path = ini.get("inputs", "hs_map", "");
    cfg.year_start = static_cast<int>(ini.get_int("years", "start", cfg.year_start));
    cfg.year_end = static_cast<int>(ini.get_int("years", "end", cfg.year_end));
    cfg.rca_threshold = ini.get_double("indicators", "rca_threshold", cfg.rca_threshold);
    const std::string weighting = ini.get("indicators", "expy_weighting", "volume");
    if (weighting == "volume")
        cfg.expy_weighting = ExpyWeighting::Volume;
    else if (weighting == "rca")
        cfg.expy_weighting = ExpyWeighting::Rca;
    else
        throw ValidationError("indicators.expy_weighting must be 'volume' or 'rca', got '" + weighting + "'");
    cfg.similarity_cutoff = ini.get_double("indicators", "similarity_cutoff", cfg.similarity_cutoff);
    cfg.log1p_diversification = ini.get_bool("indicators", "log1p_diversification", cfg.log1p_diversification);
    const std::string resolution = ini.get("blocks", "resolution", "hs4");
    if (resolution == "hs4")
        cfg.block_resolution = Resolution::HS4;
    else if (resolution == "hs6")
        cfg.block_resolution = Resolution::HS6;
    else
        throw ValidationError("blocks.resolution must be 'hs4' or 'hs6', got '" + resolution + "'");
    cfg.block_restarts = static_cast<int>(ini.get_int("blocks", "restarts", cfg.block_restarts));
    cfg.block_max_blocks = static_cast<int>(ini.get_int("blocks", "max_blocks", cfg.block_max_blocks));
    cfg.block_max_sweeps = static_cast<int>(ini.get_int("blocks", "max_sweeps", cfg.block_max_sweeps));
    cfg.seed = static_cast<std::uint64_t>(ini.get_int("blocks", "seed", static_cast<long long>(cfg.seed)));
    cfg.t_star = static_cast<int>(ini.get_int("regression", "t_star", cfg.t_star));
    cfg.delta_t = static_cast<int>(ini.get_int("regression", "delta_t", cfg.delta_t));
    const std::string models = ini.get("regression", "models", "growth, profit");
    cfg.model_growth = models.find("growth") != std::string::npos;
    cfg.model_profit = models.find("profit") != std::string::npos;
    if (!cfg.model_growth && !cfg.model_profit)
        throw ValidationError("regression.models must list at least one of 'growth', 'profit'");
    cfg.include_avg_complexity = ini.get_bool("regression", "include_avg_complexity", cfg.include_avg_complexity);
    cfg.heatmap_bins = static_cast<int>(ini.get_int("figures", "heatmap_bins", cfg.heatmap_bins));
    cfg.heatmap_sigma = ini.get_double("figures", "heatmap_sigma", cfg.heatmap_sigma);
    cfg.curve_bandwidth = ini.get_double("figures", "curve_bandwidth", cfg.curve_bandwidth);
    cfg.curve_grid = static_cast<int>(ini.get_int("figures", "curve_grid", cfg.curve_grid));
    cfg.output_dir = ini.get("output", "dir", cfg.output_dir);
    cfg.emit_similarity = ini.get_bool("output", "emit_similarity", cfg.emit_similarity);
    return cfg;
}

void RunConfig::validate() const {
    const std::vector<std::pair<std::string, std::string>> inputs = {
        {"inputs.exports", exports_path},
        {"inputs.world_trade", world_trade_path},
        {"inputs.financials", financials_path},
        {"inputs.gdp", gdp_path},
        {"inputs.hs_map", hs_map_path},
    };
    for (const auto& [key, path] : inputs) {
        if (path.empty()) throw ValidationError("config: " + key + " is required");
        if (!std::filesystem::exists(path))
            throw ValidationError("config: " + key + " file does not exist: " + path);
    }
    if (year_start > year_end) throw ValidationError("config: years.start must not exceed years.end");
    if (delta_t < 1) throw ValidationError("config: regression.delta_t must be >= 1");
    if (t_star + delta_t > year_end)
        throw ValidationError("config: t* + delta_t = " + std::to_string(t_star + delta_t) +
                              " is beyond years.end = " + std::to_string(year_end));
    if (t_star - delta_t < year_start)
        throw ValidationError("config: t* - delta_t = " + std::to_string(t_star - delta_t) +
                              " is before years.start = " + std::to_string(year_start));
    if (t_star - 2 < year_start)
        throw ValidationError("config: backward 3-year windows need years.start <= t* - 2");
    if (rca_threshold <= 0.0) throw ValidationError("config: indicators.rca_threshold must be positive");
    if (block_restarts < 1) throw ValidationError("config: blocks.restarts must be >= 1");
    if (heatmap_bins < 1) throw ValidationError("config: figures.heatmap_bins must be >= 1");
    if (curve_grid < 2) throw ValidationError("config: figures.curve_grid must be >= 2");
    if (output_dir.empty()) throw ValidationError("config: output.dir is required");
}

SynthConfig SynthConfig::from_ini(const IniFile& ini) {
    SynthConfig cfg;
    cfg.firms = static_cast<int>(ini.get_int("synth", "firms", cfg.firms));
    cfg.products = static_cast<int>(ini.get_int("synth", "products", cfg.products));
    cfg.blocks = static_cast<int>(ini.get_int("synth", "blocks", cfg.blocks));
    cfg.intra_block_p = ini.get_double("synth", "intra_block_p", cfg.intra_block_p);
    cfg.inter_block_p = ini.get_double("synth", "inter_block_p", cfg.inter_block_p);
    cfg.value_mu = ini.get_double("synth", "value_mu", cfg.value_mu);
    cfg.value_sigma = ini.get_double("synth", "value_sigma", cfg.value_sigma);
    cfg.countries = static_cast<int>(ini.get_int("synth", "countries", cfg.countries));
    cfg.gdp_log_min = ini.get_double("synth", "gdp_log_min", cfg.gdp_log_min);
    cfg.gdp_log_max = ini.get_double("synth", "gdp_log_max", cfg.gdp_log_max);
    cfg.revenue_mu = ini.get_double("synth", "revenue_mu", cfg.revenue_mu);
    cfg.revenue_sigma = ini.get_double("synth", "revenue_sigma", cfg.revenue_sigma);
    cfg.intercept = ini.get_double("synth", "intercept", cfg.intercept);
    cfg.beta_revenue = ini.get_double("synth", "beta_revenue", cfg.beta_revenue);
    cfg.beta_coherence = ini.get_double("synth", "beta_coherence", cfg.beta_coherence);
    cfg.beta_expy = ini.get_double("synth", "beta_expy", cfg.beta_expy);
    cfg.beta_d_out = ini.get_double("synth", "beta_d_out", cfg.beta_d_out);
    cfg.beta_d_in = ini.get_double("synth", "beta_d_in", cfg.beta_d_in);
    cfg.noise = ini.get_double("synth", "noise", cfg.noise);
    cfg.similarity_cutoff = ini.get_double("synth", "similarity_cutoff", cfg.similarity_cutoff);
    cfg.year_start = static_cast<int>(ini.get_int("synth", "year_start", cfg.year_start));
    cfg.year_end = static_cast<int>(ini.get_int("synth", "year_end", cfg.year_end));
    cfg.t_star = static_cast<int>(ini.get_int("synth", "t_star", cfg.t_star));
    cfg.delta_t = static_cast<int>(ini.get_int("synth", "delta_t", cfg.delta_t));
    cfg.seed = static_cast<std::uint64_t>(ini.get_int("synth", "seed", static_cast<long long>(cfg.seed)));
    return cfg;
}

void SynthConfig::validate() const {
    if (firms < 1 || products < 2) throw ValidationError("synth: need at least 1 firm and 2 products");
    if (blocks < 1) throw ValidationError("synth: blocks must be >= 1");
    if (products < blocks || firms < blocks)
        throw ValidationError("synth: block sizes infeasible, need firms >= blocks and products >= blocks");
    if (products > 8999) throw ValidationError("synth: at most 8999 products (HS headings run out)");
    if (intra_block_p < 0.0 || intra_block_p > 1.0 || inter_block_p < 0.0 || inter_block_p > 1.0)
        throw ValidationError("synth: link probabilities must be in [0, 1]");
    if (countries < 2) throw ValidationError("synth: need at least 2 countries");
    if (gdp_log_min >= gdp_log_max) throw ValidationError("synth: gdp_log_min must be below gdp_log_max");
    if (noise < 0.0) throw ValidationError("synth: noise must be >= 0");
    if (year_start > year_end) throw ValidationError("synth: year_start must not exceed year_end");
    if (t_star + delta_t > year_end || t_star - delta_t < year_start || t_star - 2 < year_start)
        throw ValidationError("synth: t* +- delta_t must fit the year range");
}

} // namespace ecx
