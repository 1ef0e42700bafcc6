#include "ecx/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ecx/csv.hpp"
#include "ecx/fitness.hpp"
#include "ecx/prody.hpp"
#include "ecx/regress.hpp"
#include "ecx/rng.hpp"
#include "ecx/sapling.hpp"

namespace ecx {

namespace {

std::string firm_name(int f) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "F%06d", f);
    return buf;
}

std::string country_name(int c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "C%03d", c);
    return buf;
}

std::string product_code(int p) {
    // One product per HS4 heading: heading 1000+p, item 11.
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d11", 1000 + p);
    return buf;
}

double symlog_inverse(double y) { return y >= 0.0 ? std::expm1(y) : -std::expm1(-y); }

// RNG stream offsets per entity kind, so draws are independent of loop order.
constexpr std::uint64_t kStreamWorld = 1u << 20;
constexpr std::uint64_t kStreamLinks = 2u << 20;
constexpr std::uint64_t kStreamFill = 3u << 20;
constexpr std::uint64_t kStreamFirm = 4u << 20;

} // namespace

SynthData generate(const SynthConfig& cfg) {
    cfg.validate();
    if (cfg.delta_t < 3)
        throw ValidationError("synth: delta_t must be >= 3 so the planted revenue step clears the "
                              "3-year smoothing window");

    SynthData data;
    data.config = cfg;

    const int n_f = cfg.firms;
    const int n_p = cfg.products;
    const int n_b = cfg.blocks;

    // Balanced contiguous blocks on both sides.
    auto product_block = [&](int p) { return static_cast<int>(static_cast<long long>(p) * n_b / n_p); };
    auto firm_block = [&](int f) { return static_cast<int>(static_cast<long long>(f) * n_b / n_f); };
    std::vector<int> block_p_lo(static_cast<std::size_t>(n_b), n_p), block_p_hi(static_cast<std::size_t>(n_b), 0);
    for (int p = 0; p < n_p; ++p) {
        const int b = product_block(p);
        block_p_lo[static_cast<std::size_t>(b)] = std::min(block_p_lo[static_cast<std::size_t>(b)], p);
        block_p_hi[static_cast<std::size_t>(b)] = std::max(block_p_hi[static_cast<std::size_t>(b)], p + 1);
    }
    std::vector<int> block_f_count(static_cast<std::size_t>(n_b), 0);
    for (int f = 0; f < n_f; ++f) ++block_f_count[static_cast<std::size_t>(firm_block(f))];

    // HS map: every product its own heading, sections cycling through 1..21.
    for (int p = 0; p < n_p; ++p) {
        const std::string hs6 = product_code(p);
        const int section = p % kHsSectionCount + 1;
        char label[16];
        std::snprintf(label, sizeof(label), "section-%02d", section);
        data.hs_map.insert(hs6, HsEntry{hs6.substr(0, 4), section, label});
    }

    // Countries and GDP, log-evenly spread.
    {
        Interner countries;
        std::vector<double> gdp;
        for (int c = 0; c < cfg.countries; ++c) {
            countries.intern(country_name(c));
            const double t = cfg.countries == 1 ? 0.0 : static_cast<double>(c) / (cfg.countries - 1);
            gdp.push_back(std::exp(cfg.gdp_log_min + t * (cfg.gdp_log_max - cfg.gdp_log_min)));
        }
        data.gdp = GdpTable(std::move(countries), std::move(gdp));
    }

    // World trade: each product anchored at a GDP rank drawn uniformly; the
    // anchor neighborhood exports it. Products anchored high sit high on the
    // income score.
    std::vector<ExportRecord> world_records;
    {
        Interner world_rows, world_cols;
        const int window = std::max(2, cfg.countries / 6);
        for (int p = 0; p < n_p; ++p) {
            Rng rng = Rng::derive(cfg.seed, kStreamWorld + static_cast<std::uint64_t>(p));
            const int anchor = static_cast<int>(rng.uniform() * (cfg.countries - 1) + 0.5);
            const int c_lo = std::max(0, anchor - window);
            const int c_hi = std::min(cfg.countries - 1, anchor + window);
            const int col = world_cols.intern(product_code(p));
            for (int c = c_lo; c <= c_hi; ++c)
                world_records.push_back({world_rows.intern(country_name(c)), col, cfg.year_start,
                                         rng.lognormal(cfg.value_mu, cfg.value_sigma)});
        }
        data.world_trade = ExportPanel(std::move(world_rows), std::move(world_cols), std::move(world_records));
    }

    // Firm-product links, one draw per pair, values lognormal.
    std::vector<std::vector<std::pair<int, double>>> links(static_cast<std::size_t>(n_f));
    for (int f = 0; f < n_f; ++f) {
        Rng rng = Rng::derive(cfg.seed, kStreamLinks + static_cast<std::uint64_t>(f));
        const int b = firm_block(f);
        auto& mine = links[static_cast<std::size_t>(f)];
        for (int p = 0; p < n_p; ++p) {
            const double prob = product_block(p) == b ? cfg.intra_block_p : cfg.inter_block_p;
            if (prob > 0.0 && rng.uniform() < prob) mine.emplace_back(p, rng.lognormal(cfg.value_mu, cfg.value_sigma));
        }
        // Every firm needs a footprint in its own block.
        int in_block = 0;
        for (const auto& [p, v] : mine)
            if (product_block(p) == b) ++in_block;
        const int lo = block_p_lo[static_cast<std::size_t>(b)];
        const int hi = block_p_hi[static_cast<std::size_t>(b)];
        for (int offset = 0; in_block < std::min(2, hi - lo) && offset < hi - lo; ++offset) {
            const int p = lo + (f + offset) % (hi - lo);
            if (std::none_of(mine.begin(), mine.end(), [p](const auto& e) { return e.first == p; })) {
                mine.emplace_back(p, rng.lognormal(cfg.value_mu, cfg.value_sigma));
                ++in_block;
            }
        }
    }
    // Every product needs at least one exporter.
    {
        std::vector<int> exporter_count(static_cast<std::size_t>(n_p), 0);
        for (const auto& mine : links)
            for (const auto& [p, v] : mine) ++exporter_count[static_cast<std::size_t>(p)];
        std::vector<int> first_firm_of_block(static_cast<std::size_t>(n_b), 0);
        for (int f = n_f - 1; f >= 0; --f) first_firm_of_block[static_cast<std::size_t>(firm_block(f))] = f;
        for (int p = 0; p < n_p; ++p) {
            if (exporter_count[static_cast<std::size_t>(p)] > 0) continue;
            const int b = product_block(p);
            const int f = first_firm_of_block[static_cast<std::size_t>(b)] + p % block_f_count[static_cast<std::size_t>(b)];
            Rng rng = Rng::derive(cfg.seed, kStreamFill + static_cast<std::uint64_t>(p));
            links[static_cast<std::size_t>(f)].emplace_back(p, rng.lognormal(cfg.value_mu, cfg.value_sigma));
        }
    }

    // Single-year panel for the indicator ground truth (exports are constant
    // across years, so one year slice determines every yearly indicator).
    ExportPanel year_panel;
    {
        Interner firms, products;
        std::vector<ExportRecord> records;
        for (int f = 0; f < n_f; ++f) {
            const int row = firms.intern(firm_name(f));
            for (const auto& [p, v] : links[static_cast<std::size_t>(f)])
                records.push_back({row, products.intern(product_code(p)), cfg.year_start, v});
        }
        year_panel = ExportPanel(std::move(firms), std::move(products), std::move(records));
    }

    const ExportMatrix firm_matrix = aggregate_years(year_panel, cfg.year_start, cfg.year_start, Resolution::HS6);
    const RcaMatrix firm_rca = rca(firm_matrix);
    const BinaryMatrix binary = binarize(firm_rca, 1.0);

    // Product income scores from the world side, then firm EXPY.
    const ExportMatrix world_matrix =
        aggregate_years(data.world_trade, cfg.year_start, cfg.year_start, Resolution::HS6);
    ProductScoreTable scores = log_prody(rca(world_matrix), data.gdp);
    zscore(scores);
    const ExpyTable expy_table = expy(firm_matrix, scores, ExpyWeighting::Volume);

    // Coherence through the same similarity stage the pipeline runs.
    const CooccurrenceTable co = cooccurrence(binary);
    const SimilarityMatrix sim = sapling(co, cfg.similarity_cutoff);
    const CoherenceTable coh = coherence(firm_matrix, sim);

    // Planted partition over the firm matrix labels.
    data.planted_partition.rows = firm_matrix.rows;
    data.planted_partition.cols = firm_matrix.cols;
    data.planted_partition.n_blocks = n_b;
    data.planted_partition.row_label.assign(static_cast<std::size_t>(n_f), 0);
    data.planted_partition.col_label.assign(static_cast<std::size_t>(firm_matrix.cols.size()), 0);
    for (int f = 0; f < n_f; ++f) {
        const int id = firm_matrix.rows.find(firm_name(f));
        data.planted_partition.row_label[static_cast<std::size_t>(id)] = firm_block(f);
    }
    for (int p = 0; p < n_p; ++p) {
        const int id = firm_matrix.cols.find(product_code(p));
        if (id >= 0) data.planted_partition.col_label[static_cast<std::size_t>(id)] = product_block(p);
    }
    {
        const BipartiteGraph graph = BipartiteGraph::from_binary(binary);
        data.planted_partition.modularity =
            bipartite_modularity(graph, data.planted_partition.row_label, data.planted_partition.col_label);
    }
    const BlockDiversification bdiv = block_diversification(binary, data.planted_partition);
    const BlockPartition sections = sector_partition(firm_matrix, data.hs_map);

    // Plant the cross-sectional model through revenue and income paths.
    SynthTruth& truth = data.truth;
    truth.firm_block.resize(static_cast<std::size_t>(n_f));
    truth.product_block.resize(static_cast<std::size_t>(n_p));
    truth.firm_section.resize(static_cast<std::size_t>(n_f));
    truth.expy.resize(static_cast<std::size_t>(n_f));
    truth.coherence.resize(static_cast<std::size_t>(n_f));
    truth.d_in.resize(static_cast<std::size_t>(n_f));
    truth.d_out.resize(static_cast<std::size_t>(n_f));
    truth.log_revenue.resize(static_cast<std::size_t>(n_f));
    truth.planted_growth.resize(static_cast<std::size_t>(n_f));
    truth.planted_profit.resize(static_cast<std::size_t>(n_f));
    truth.identified.resize(static_cast<std::size_t>(n_f));
    for (int p = 0; p < n_p; ++p) truth.product_block[static_cast<std::size_t>(p)] = product_block(p);

    std::vector<double> employees(static_cast<std::size_t>(n_f));
    std::vector<double> revenue(static_cast<std::size_t>(n_f));
    std::vector<double> profit_ratio(static_cast<std::size_t>(n_f));

    for (int f = 0; f < n_f; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        Rng rng = Rng::derive(cfg.seed, kStreamFirm + static_cast<std::uint64_t>(f));
        const int row = firm_matrix.rows.find(firm_name(f));
        const auto ri = static_cast<std::size_t>(row);

        employees[fi] = static_cast<double>(5 + rng.uniform_int(496));
        revenue[fi] = rng.lognormal(cfg.revenue_mu, cfg.revenue_sigma);
        const double noise_g = rng.normal();
        const double noise_p = rng.normal();

        truth.firm_block[fi] = firm_block(f);
        truth.firm_section[fi] = sections.row_label[ri];
        truth.expy[fi] = expy_table.expy[ri];
        truth.coherence[fi] = coh.coherence[ri];
        truth.d_in[fi] = bdiv.d_in[ri];
        truth.d_out[fi] = bdiv.d_out[ri];
        truth.log_revenue[fi] = std::log(revenue[fi]);

        const bool identified = expy_table.defined[ri] && coh.defined[ri] && coh.coherence[ri] > 0.0 &&
                                bdiv.d_in[ri] > 0 && bdiv.d_out[ri] > 0 && sections.row_label[ri] >= 1;
        truth.identified[fi] = identified;

        // Undefined terms contribute zero; those firms are dropped downstream.
        double signal = cfg.intercept + cfg.beta_revenue * truth.log_revenue[fi];
        if (expy_table.defined[ri]) signal += cfg.beta_expy * truth.expy[fi];
        if (coh.defined[ri] && coh.coherence[ri] > 0.0) signal += cfg.beta_coherence * std::log(coh.coherence[ri]);
        if (bdiv.d_out[ri] > 0) signal += cfg.beta_d_out * std::log(static_cast<double>(bdiv.d_out[ri]));
        if (bdiv.d_in[ri] > 0) signal += cfg.beta_d_in * std::log(static_cast<double>(bdiv.d_in[ri]));

        truth.planted_growth[fi] = signal + cfg.noise * noise_g;
        truth.planted_profit[fi] = signal + cfg.noise * noise_p;
        profit_ratio[fi] = symlog_inverse(truth.planted_profit[fi]);
    }

    // Expand exports to all years (values constant) and build the financials:
    // revenue steps by exp(G) after t*, so the smoothed log-ratio equals G.
    {
        Interner firms, products;
        std::vector<ExportRecord> records;
        records.reserve(static_cast<std::size_t>(year_panel.records().size()) *
                        static_cast<std::size_t>(cfg.year_end - cfg.year_start + 1));
        for (int f = 0; f < n_f; ++f) firms.intern(firm_name(f));
        for (const auto& r : year_panel.records()) {
            const int row = firms.find(year_panel.firms().name(r.firm));
            const int col = products.intern(year_panel.products().name(r.product));
            for (int t = cfg.year_start; t <= cfg.year_end; ++t) records.push_back({row, col, t, r.value});
        }
        data.exports = ExportPanel(std::move(firms), std::move(products), std::move(records));
    }
    {
        Interner firms;
        std::vector<FinancialRecord> records;
        for (int f = 0; f < n_f; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            const int row = firms.intern(firm_name(f));
            const double stepped = revenue[fi] * std::exp(truth.planted_growth[fi]);
            for (int t = cfg.year_start; t <= cfg.year_end; ++t) {
                FinancialRecord rec;
                rec.firm = row;
                rec.year = t;
                rec.employees = employees[fi];
                rec.operating_revenue = t <= cfg.t_star ? revenue[fi] : stepped;
                rec.net_income = profit_ratio[fi] * employees[fi];
                records.push_back(rec);
            }
        }
        data.financials = FinancialPanel(std::move(firms), std::move(records));
    }
    return data;
}

void write_synth(const SynthData& data, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto path = [&dir](const char* name) { return dir + "/" + name; };

    write_exports(data.exports, path("exports.csv"));
    write_exports(data.world_trade, path("world_trade.csv"));

    {
        CsvWriter out(path("financials.csv"), {"firm_id", "year", "employees", "operating_revenue", "net_income"});
        for (const auto& r : data.financials.records())
            out.row({data.financials.firms().name(r.firm), std::to_string(r.year),
                     r.employees ? format_double(*r.employees) : "",
                     r.operating_revenue ? format_double(*r.operating_revenue) : "",
                     r.net_income ? format_double(*r.net_income) : ""});
        out.close();
    }
    {
        CsvWriter out(path("gdp.csv"), {"country", "gdp_pc"});
        for (int c = 0; c < data.gdp.countries().size(); ++c)
            out.row({data.gdp.countries().name(c), format_double(data.gdp.gdp_pc(c))});
        out.close();
    }
    {
        CsvWriter out(path("hs_map.csv"), {"hs6", "hs4", "section_index", "section_label"});
        for (int p = 0; p < data.config.products; ++p) {
            const std::string hs6 = product_code(p);
            const HsEntry& e = data.hs_map.resolve(hs6);
            out.row({hs6, e.hs4, std::to_string(e.section), e.section_label});
        }
        out.close();
    }
    {
        const SynthConfig& cfg = data.config;
        nlohmann::json truth;
        truth["seed"] = cfg.seed;
        truth["firms"] = cfg.firms;
        truth["products"] = cfg.products;
        truth["blocks"] = cfg.blocks;
        truth["intra_block_p"] = cfg.intra_block_p;
        truth["inter_block_p"] = cfg.inter_block_p;
        truth["noise"] = cfg.noise;
        truth["planted_modularity"] = data.planted_partition.modularity;
        truth["coefficients"] = {{"Constant", cfg.intercept},
                                 {"log Operative Revenue", cfg.beta_revenue},
                                 {"log Coherence", cfg.beta_coherence},
                                 {"EXPY", cfg.beta_expy},
                                 {"log Out-of-block Diversification", cfg.beta_d_out},
                                 {"log In-block Diversification", cfg.beta_d_in}};
        std::ofstream out(path("truth.json"));
        out << truth.dump(2) << "\n";
    }
    {
        CsvWriter out(path("truth_firms.csv"),
                      {"firm_id", "block", "section", "expy", "coherence", "d_in", "d_out", "log_revenue",
                       "planted_growth", "planted_profit", "identified"});
        for (int f = 0; f < data.config.firms; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            out.row({firm_name(f), std::to_string(data.truth.firm_block[fi]),
                     std::to_string(data.truth.firm_section[fi]), format_double(data.truth.expy[fi]),
                     format_double(data.truth.coherence[fi]), std::to_string(data.truth.d_in[fi]),
                     std::to_string(data.truth.d_out[fi]), format_double(data.truth.log_revenue[fi]),
                     format_double(data.truth.planted_growth[fi]), format_double(data.truth.planted_profit[fi]),
                     data.truth.identified[fi] ? "1" : "0"});
        }
        out.close();
    }
}

} // namespace ecx
