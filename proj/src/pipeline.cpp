#include "ecx/pipeline.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "ecx/csv.hpp"

namespace ecx {

namespace fs = std::filesystem;

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file for digest: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ULL; // FNV-1a
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

namespace {

// Owns the output directory for the duration of a run. Rolls back partial
// artifacts when the run dies before commit().
class OutputDir {
public:
    explicit OutputDir(std::string dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {
        if (!enabled_) return;
        fs::create_directories(dir_);
        lock_path_ = dir_ + "/.lock";
        lock_fd_ = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (lock_fd_ < 0)
            throw ValidationError("output directory is locked by another run (remove " + lock_path_ +
                                  " if stale): " + std::strerror(errno));
    }

    ~OutputDir() {
        if (!enabled_) return;
        if (!committed_) {
            for (const auto& f : files_) {
                std::error_code ec;
                fs::remove(f, ec);
            }
        }
        if (lock_fd_ >= 0) {
            ::close(lock_fd_);
            std::error_code ec;
            fs::remove(lock_path_, ec);
        }
    }

    OutputDir(const OutputDir&) = delete;
    OutputDir& operator=(const OutputDir&) = delete;

    bool enabled() const { return enabled_; }
    std::string track(const std::string& name) {
        const std::string path = dir_ + "/" + name;
        files_.push_back(path);
        return path;
    }
    const std::vector<std::string>& files() const { return files_; }
    void commit() { committed_ = true; }

private:
    std::string dir_;
    bool enabled_;
    std::string lock_path_;
    int lock_fd_ = -1;
    std::vector<std::string> files_;
    bool committed_ = false;
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << text;
}

std::string csv_field(std::optional<double> v) { return v ? format_double(*v) : ""; }

} // namespace

PipelineResult run_pipeline(const RunConfig& config, Stage stage, bool write_outputs) {
    config.validate();

    PipelineResult res;
    res.config = config;
    OutputDir out(config.output_dir, write_outputs);

    // --- ingest -----------------------------------------------------------
    CsvSchema schema;
    schema.year_min = config.year_start;
    schema.year_max = config.year_end;
    ExportPanel raw_exports = load_exports(config.exports_path, schema, res.exports_report);
    ExportPanel world = load_exports(config.world_trade_path, schema, res.world_report);
    FinancialPanel financials = load_financials(config.financials_path, schema, res.financials_report);
    LoadReport gdp_report, hs_report;
    GdpTable gdp = load_gdp(config.gdp_path, schema, gdp_report);
    HsMap hs_map = load_hs_map(config.hs_map_path, hs_report);

    for (int p = 0; p < raw_exports.products().size(); ++p)
        if (hs_map.try_resolve(raw_exports.products().name(p)) == nullptr)
            throw ValidationError("HS map does not cover exported product " + raw_exports.products().name(p));

    res.firms_before_filter = raw_exports.firms().size();
    res.exports = filter_persistent_firms(raw_exports, config.year_start, config.year_end);
    if (res.exports.empty()) throw ComputeError("no firm exported in every year of the range");
    res.warnings.add("persistent-firm filter kept " + std::to_string(res.exports.firms().size()) + " of " +
                     std::to_string(res.firms_before_filter) + " firms");
    if (stage == Stage::Ingest) {
        out.commit();
        return res;
    }

    // --- block structure ---------------------------------------------------
    const ExportMatrix block_matrix = aggregate_years(res.exports, config.year_start, config.year_end,
                                                      config.block_resolution, &hs_map);
    const BinaryMatrix block_binary = binarize(rca(block_matrix, &res.warnings), config.rca_threshold);
    const BipartiteGraph graph = BipartiteGraph::from_binary(block_binary);
    BrimOptions brim_options;
    brim_options.max_blocks = config.block_max_blocks;
    brim_options.restarts = config.block_restarts;
    brim_options.max_sweeps = config.block_max_sweeps;
    const BlockPartition detected = brim(graph, config.seed, brim_options, &res.warnings);
    res.partition = config.block_resolution == Resolution::HS4
                        ? map_blocks_hs4_to_hs6(detected, hs_map, res.exports.products())
                        : detected;
    res.block_report = block_composition_report(res.partition, hs_map);

    if (out.enabled()) {
        write_partition(res.partition, out.track("partition.csv"));
        write_text(out.track("block_report.txt"), res.block_report);
    }
    if (stage == Stage::Blocks) {
        out.commit();
        return res;
    }

    // --- product scores (world side) ---------------------------------------
    const ExportMatrix world_matrix = aggregate_years(world, config.year_start, config.year_end, Resolution::HS6);
    const RcaMatrix world_rca = rca(world_matrix, &res.warnings);
    res.product_scores = log_prody(world_rca, gdp, &res.warnings);
    zscore(res.product_scores);
    res.fitness = fitness_complexity(binarize(world_rca, config.rca_threshold), 1e-8, 1000, &res.warnings);

    // Income score vs complexity diagnostic over the common product set.
    {
        std::vector<double> x, y;
        for (int p = 0; p < res.product_scores.products.size(); ++p) {
            const int q = res.fitness.products.find(res.product_scores.products.name(p));
            if (q < 0) continue;
            x.push_back(res.product_scores.raw[static_cast<std::size_t>(p)]);
            y.push_back(std::log(res.fitness.complexity[static_cast<std::size_t>(q)]));
        }
        if (x.size() >= 3) {
            res.logprody_complexity_r = pearson(x, y);
        } else {
            res.warnings.add("logPRODY/complexity correlation skipped: fewer than 3 common products");
        }
    }

    // --- yearly indicators and the variable panel ---------------------------
    const int n_firms = res.exports.firms().size();
    res.variables.firms = res.exports.firms();
    res.variables.vars.assign(static_cast<std::size_t>(n_firms), FirmVariables{});
    for (auto& v : res.variables.vars) {
        v.revenue = YearSeries(config.year_start, config.year_end);
        v.profit_ratio = YearSeries(config.year_start, config.year_end);
        v.expy = YearSeries(config.year_start, config.year_end);
        v.coherence = YearSeries(config.year_start, config.year_end);
        v.d_in = YearSeries(config.year_start, config.year_end);
        v.d_out = YearSeries(config.year_start, config.year_end);
        v.avg_complexity = YearSeries(config.year_start, config.year_end);
    }

    const ExportMatrix full_hs6 = aggregate_years(res.exports, config.year_start, config.year_end, Resolution::HS6);
    const BlockPartition sections = sector_partition(full_hs6, hs_map);
    res.variables.section.assign(static_cast<std::size_t>(n_firms), -1);
    for (int f = 0; f < n_firms; ++f)
        res.variables.section[static_cast<std::size_t>(f)] = sections.row_label[static_cast<std::size_t>(f)];

    for (int t = config.t_star - 2; t <= config.t_star; ++t) {
        const ExportMatrix year_matrix = aggregate_years(res.exports, t, t, Resolution::HS6);
        const RcaMatrix year_rca = rca(year_matrix, &res.warnings);
        const BinaryMatrix year_binary = binarize(year_rca, config.rca_threshold);

        const ExpyTable expy_t = expy(year_matrix, res.product_scores, config.expy_weighting, &res.warnings);
        const CooccurrenceTable co_t = cooccurrence(year_binary);
        const SimilarityMatrix sim_t = sapling(co_t, config.similarity_cutoff, &res.warnings);
        const CoherenceTable coh_t = coherence(year_matrix, sim_t, &res.warnings);
        const BlockDiversification bdiv_t = block_diversification(year_binary, res.partition);
        const AvgComplexityTable cx_t = avg_complexity(year_matrix, res.fitness, ComplexityTransform::Log,
                                                       &res.warnings);

        for (int f = 0; f < n_firms; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            auto& v = res.variables.vars[fi];
            if (expy_t.defined[fi]) v.expy.set(t, expy_t.expy[fi]);
            if (coh_t.defined[fi]) v.coherence.set(t, coh_t.coherence[fi]);
            v.d_in.set(t, static_cast<double>(bdiv_t.d_in[fi]));
            v.d_out.set(t, static_cast<double>(bdiv_t.d_out[fi]));
            if (cx_t.defined[fi]) v.avg_complexity.set(t, cx_t.value[fi]);
        }
        if (t == config.t_star) {
            res.coherence_at_t_star = coh_t;
            res.similarity_at_t_star = sim_t;
        }
    }

    for (int f = 0; f < n_firms; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        auto& v = res.variables.vars[fi];
        const std::string& name = res.exports.firms().name(f);
        for (int t = config.year_start; t <= config.year_end; ++t) {
            const FinancialRecord* rec = financials.find(name, t);
            if (rec == nullptr) continue;
            if (rec->operating_revenue) v.revenue.set(t, *rec->operating_revenue);
            if (rec->employees && rec->net_income) v.profit_ratio.set(t, *rec->net_income / *rec->employees);
        }
    }

    if (out.enabled()) {
        write_product_scores(res.product_scores, out.track("product_scores.csv"));
        write_complexity(res.fitness, out.track("complexity.csv"));
        write_coherence(res.coherence_at_t_star, out.track("coherence.csv"));
        if (config.emit_similarity) write_similarity(res.similarity_at_t_star, out.track("similarity.csv"));

        CsvWriter indicators(out.track("indicators.csv"),
                             {"firm_id", "year", "expy", "coherence", "d_in", "d_out", "avg_complexity"});
        for (int f = 0; f < n_firms; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            const auto& v = res.variables.vars[fi];
            for (int t = config.t_star - 2; t <= config.t_star; ++t)
                indicators.row({res.exports.firms().name(f), std::to_string(t), csv_field(v.expy.at(t)),
                                csv_field(v.coherence.at(t)), csv_field(v.d_in.at(t)), csv_field(v.d_out.at(t)),
                                csv_field(v.avg_complexity.at(t))});
        }
        indicators.close();

        // Backward means at t*: the per-firm indicator frame the models consume.
        CsvWriter frame(out.track("indicator_frame.csv"),
                        {"firm_id", "section", "expy", "coherence", "d_in", "d_out", "d_total",
                         "avg_complexity", "operating_revenue"});
        for (int f = 0; f < n_firms; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            const auto& v = res.variables.vars[fi];
            const auto din = backward_mean(v.d_in, 3).at(config.t_star);
            const auto dout = backward_mean(v.d_out, 3).at(config.t_star);
            std::optional<double> dtot;
            if (din && dout) dtot = *din + *dout;
            frame.row({res.exports.firms().name(f), std::to_string(res.variables.section[fi]),
                       csv_field(backward_mean(v.expy, 3).at(config.t_star)),
                       csv_field(backward_mean(v.coherence, 3).at(config.t_star)), csv_field(din),
                       csv_field(dout), csv_field(dtot),
                       csv_field(backward_mean(v.avg_complexity, 3).at(config.t_star)),
                       csv_field(backward_mean(v.revenue, 3).at(config.t_star))});
        }
        frame.close();
    }
    if (stage == Stage::Indicators) {
        out.commit();
        return res;
    }

    // --- regressions ---------------------------------------------------------
    std::vector<Design> designs;
    if (config.model_growth) {
        RegressionSpec spec;
        spec.dependent = Dependent::Growth;
        spec.include_avg_complexity = config.include_avg_complexity;
        spec.t_star = config.t_star;
        spec.delta_t = config.delta_t;
        spec.log1p_diversification = config.log1p_diversification;
        spec.label = "Growth";
        designs.push_back(assemble_design(res.variables, spec));
        RegressionResult r = ols_hc1(designs.back().y, designs.back().X, designs.back().columns);
        r.label = spec.label;
        r.deletions = designs.back().deletions;
        r.reference_section = designs.back().reference_section;
        res.regressions.push_back(std::move(r));
    }
    if (config.model_profit) {
        RegressionSpec spec;
        spec.dependent = Dependent::ProfitPerEmployee;
        spec.include_avg_complexity = config.include_avg_complexity;
        spec.t_star = config.t_star;
        spec.delta_t = config.delta_t;
        spec.log1p_diversification = config.log1p_diversification;
        spec.label = "Profit per Employee";
        designs.push_back(assemble_design(res.variables, spec));
        RegressionResult r = ols_hc1(designs.back().y, designs.back().X, designs.back().columns);
        r.label = spec.label;
        r.deletions = designs.back().deletions;
        r.reference_section = designs.back().reference_section;
        res.regressions.push_back(std::move(r));
    }
    res.regression_text = regression_table(res.regressions);
    if (out.enabled()) {
        write_text(out.track("regressions.txt"), res.regression_text);
        write_regression_csv(res.regressions, out.track("regressions.csv"));
    }
    if (stage == Stage::Regress) {
        out.commit();
        return res;
    }

    // --- figures --------------------------------------------------------------
    // Growth in the EXPY x size plane, and growth against the out-of-block share.
    {
        const Design* growth_design = nullptr;
        for (std::size_t i = 0; i < designs.size(); ++i)
            if (res.regressions[i].label == "Growth") growth_design = &designs[i];
        if (growth_design != nullptr) {
            std::vector<GridPoint> points;
            std::vector<double> share_x, share_y;
            std::size_t zero_d_in = 0;
            for (Eigen::Index i = 0; i < growth_design->X.rows(); ++i) {
                GridPoint pt;
                pt.x = growth_design->X(i, 3); // EXPY column
                pt.y = growth_design->X(i, 1); // log revenue column
                pt.color = growth_design->y(i);
                points.push_back(pt);

                const int f = growth_design->firm_ids[static_cast<std::size_t>(i)];
                const auto& v = res.variables.vars[static_cast<std::size_t>(f)];
                const auto din = backward_mean(v.d_in, 3).at(config.t_star);
                const auto dout = backward_mean(v.d_out, 3).at(config.t_star);
                if (!din || *din <= 0.0) {
                    ++zero_d_in;
                    continue;
                }
                share_x.push_back(std::log((*din + (dout ? *dout : 0.0)) / *din));
                share_y.push_back(growth_design->y(i));
            }
            if (zero_d_in > 0)
                res.warnings.add("figures: " + std::to_string(zero_d_in) + " firms without in-block products "
                                                                           "excluded from the ratio curve");
            res.heatmap = emit_heatmap(points, config.heatmap_bins, config.heatmap_bins, config.heatmap_sigma);
            if (out.enabled()) write_heatmap(res.heatmap, out.track("heatmap_expy_size_growth.csv"));
            if (share_x.size() >= 10) {
                res.curve = emit_nonparametric_curve(share_x, share_y, config.curve_bandwidth, config.curve_grid);
                res.curve_emitted = true;
                if (out.enabled()) write_curve(res.curve, out.track("curve_out_share_growth.csv"));
            } else {
                res.warnings.add("figures: too few points for the nonparametric curve");
            }
        }
    }
    if (stage == Stage::Figures) {
        out.commit();
        return res;
    }

    // --- manifest ---------------------------------------------------------------
    {
        nlohmann::json m;
        m["version"] = "ecx 1.0";
        m["inputs"] = {{"exports", {{"path", config.exports_path}, {"digest", file_digest(config.exports_path)}}},
                       {"world_trade",
                        {{"path", config.world_trade_path}, {"digest", file_digest(config.world_trade_path)}}},
                       {"financials",
                        {{"path", config.financials_path}, {"digest", file_digest(config.financials_path)}}},
                       {"gdp", {{"path", config.gdp_path}, {"digest", file_digest(config.gdp_path)}}},
                       {"hs_map", {{"path", config.hs_map_path}, {"digest", file_digest(config.hs_map_path)}}}};
        m["years"] = {{"start", config.year_start}, {"end", config.year_end}};
        m["seed"] = config.seed;
        m["rca_threshold"] = config.rca_threshold;
        m["expy_weighting"] = config.expy_weighting == ExpyWeighting::Volume ? "volume" : "rca";
        m["similarity_cutoff"] = config.similarity_cutoff;
        m["block_resolution"] = config.block_resolution == Resolution::HS4 ? "hs4" : "hs6";
        m["block_restarts"] = config.block_restarts;
        m["t_star"] = config.t_star;
        m["delta_t"] = config.delta_t;
        m["load"] = {{"exports",
                      {{"rows", res.exports_report.rows_total},
                       {"accepted", res.exports_report.rows_accepted},
                       {"rejected", res.exports_report.rows_rejected}}},
                     {"world_trade",
                      {{"rows", res.world_report.rows_total},
                       {"accepted", res.world_report.rows_accepted},
                       {"rejected", res.world_report.rows_rejected}}},
                     {"financials",
                      {{"rows", res.financials_report.rows_total},
                       {"accepted", res.financials_report.rows_accepted},
                       {"rejected", res.financials_report.rows_rejected}}}};
        m["firms"] = {{"before_filter", res.firms_before_filter}, {"persistent", res.exports.firms().size()}};
        m["blocks"] = {{"count", res.partition.n_blocks},
                       {"modularity", res.partition.modularity},
                       {"converged", res.partition.converged},
                       {"sweeps", res.partition.sweep_modularity.size()}};
        m["fitness"] = {{"iterations", res.fitness.iterations},
                        {"residual", res.fitness.residual},
                        {"converged", res.fitness.converged}};
        m["logprody_logcomplexity_pearson_r"] = res.logprody_complexity_r;
        for (const auto& r : res.regressions)
            m["models"][r.label] = {{"observations", r.n},
                                    {"adjusted_r_squared", r.adj_r2},
                                    {"deletions", r.deletions},
                                    {"reference_section", r.reference_section}};
        if (res.curve_emitted)
            m["figures"] = {{"heatmap_occupied_cells", res.heatmap.occupied_cells()},
                            {"heatmap_sigma", config.heatmap_sigma},
                            {"curve_bandwidth", res.curve.bandwidth},
                            {"curve_points", res.curve.n_points}};
        m["warnings"] = res.warnings.messages();
        res.manifest = m.dump(2) + "\n";
        if (out.enabled()) write_text(out.track("manifest.json"), res.manifest);
    }

    res.written_files = out.files();
    out.commit();
    return res;
}

std::string run_report(const PipelineResult& res) {
    std::string rep;
    rep += "inputs: " + std::to_string(res.exports_report.rows_accepted) + " export rows accepted, " +
           std::to_string(res.exports_report.rows_rejected) + " rejected\n";
    rep += "firms: " + std::to_string(res.exports.firms().size()) + " persistent of " +
           std::to_string(res.firms_before_filter) + "\n";
    rep += "blocks: " + std::to_string(res.partition.n_blocks) + ", Q = " +
           format_fixed(res.partition.modularity, 4) + "\n";
    rep += "logPRODY vs log complexity: r = " + format_fixed(res.logprody_complexity_r, 3) + "\n";
    rep += "\n" + res.block_report + "\n" + res.regression_text;
    if (!res.warnings.empty()) {
        rep += "\nwarnings (" + std::to_string(res.warnings.size()) + "):\n";
        for (const auto& w : res.warnings.messages()) rep += "  - " + w + "\n";
    }
    return rep;
}

} // namespace ecx
