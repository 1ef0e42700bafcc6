#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ecx/parallel.hpp"
#include "ecx/pipeline.hpp"
#include "ecx/synth.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::int64_t seed = -1;
    std::string out_dir;
    int threads = 0;
};

ecx::RunConfig load_run_config(const CommonOptions& opt) {
    ecx::RunConfig cfg = ecx::RunConfig::from_file(opt.config_path);
    if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& opt, bool config_required = true) {
    cmd->add_option("--config", opt.config_path, "run configuration file")->required(config_required);
    cmd->add_option("--seed", opt.seed, "override the configured seed");
    cmd->add_option("--out", opt.out_dir, "override the output directory");
    cmd->add_option("--threads", opt.threads, "worker threads (0 = all cores)");
}

int run_stage(const CommonOptions& opt, ecx::Stage stage) {
    ecx::set_thread_count(opt.threads);
    const ecx::RunConfig cfg = load_run_config(opt);
    const ecx::PipelineResult result = ecx::run_pipeline(cfg, stage, stage != ecx::Stage::Ingest);
    if (stage == ecx::Stage::Ingest) {
        std::cout << "exports: " << result.exports_report.rows_accepted << " rows accepted, "
                  << result.exports_report.rows_rejected << " rejected\n";
        for (const auto& r : result.exports_report.rejections)
            std::cout << "  line " << r.line << ": " << r.reason << "\n";
        std::cout << "world trade: " << result.world_report.rows_accepted << " rows accepted, "
                  << result.world_report.rows_rejected << " rejected\n";
        std::cout << "financials: " << result.financials_report.rows_accepted << " rows accepted, "
                  << result.financials_report.rows_rejected << " rejected\n";
        std::cout << "persistent firms: " << result.exports.firms().size() << " of "
                  << result.firms_before_filter << "\n";
    } else {
        std::cout << ecx::run_report(result);
        std::cout << "\nartifacts in " << cfg.output_dir << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"firm-level economic complexity indicators and growth regressions"};
    app.require_subcommand(1);

    CommonOptions opt;
    struct SynthOptions {
        std::string config_path;
        std::string out_dir = "synth_data";
        std::int64_t seed = -1;
        int firms = -1;
        int products = -1;
        int blocks = -1;
        double noise = -1.0;
        int threads = 0;
    } synth_opt;

    CLI::App* run = app.add_subcommand("run", "full pipeline: ingest through figures and manifest");
    add_common(run, opt);
    CLI::App* ingest = app.add_subcommand("ingest", "load and validate the inputs, print a report");
    add_common(ingest, opt);
    CLI::App* blocks = app.add_subcommand("blocks", "detect firm-product blocks and write the partition");
    add_common(blocks, opt);
    CLI::App* indicators = app.add_subcommand("indicators", "compute per-firm indicator tables");
    add_common(indicators, opt);
    CLI::App* regress = app.add_subcommand("regress", "estimate the growth and profit models");
    add_common(regress, opt);
    CLI::App* figures = app.add_subcommand("figures", "emit heatmap and curve data");
    add_common(figures, opt);

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic economy with planted structure");
    synth->add_option("--config", synth_opt.config_path, "config file with a [synth] section");
    synth->add_option("--out", synth_opt.out_dir, "output directory for the generated files");
    synth->add_option("--seed", synth_opt.seed, "generator seed");
    synth->add_option("--firms", synth_opt.firms, "number of firms");
    synth->add_option("--products", synth_opt.products, "number of products");
    synth->add_option("--blocks", synth_opt.blocks, "number of planted blocks");
    synth->add_option("--noise", synth_opt.noise, "growth noise scale");
    synth->add_option("--threads", synth_opt.threads, "worker threads (0 = all cores)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_stage(opt, ecx::Stage::Full);
        if (ingest->parsed()) return run_stage(opt, ecx::Stage::Ingest);
        if (blocks->parsed()) return run_stage(opt, ecx::Stage::Blocks);
        if (indicators->parsed()) return run_stage(opt, ecx::Stage::Indicators);
        if (regress->parsed()) return run_stage(opt, ecx::Stage::Regress);
        if (figures->parsed()) return run_stage(opt, ecx::Stage::Figures);
        if (synth->parsed()) {
            ecx::set_thread_count(synth_opt.threads);
            ecx::SynthConfig cfg;
            if (!synth_opt.config_path.empty())
                cfg = ecx::SynthConfig::from_ini(ecx::IniFile::parse_file(synth_opt.config_path));
            if (synth_opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(synth_opt.seed);
            if (synth_opt.firms > 0) cfg.firms = synth_opt.firms;
            if (synth_opt.products > 0) cfg.products = synth_opt.products;
            if (synth_opt.blocks > 0) cfg.blocks = synth_opt.blocks;
            if (synth_opt.noise >= 0.0) cfg.noise = synth_opt.noise;
            const ecx::SynthData data = ecx::generate(cfg);
            ecx::write_synth(data, synth_opt.out_dir);
            std::cout << "wrote " << cfg.firms << " firms x " << cfg.products << " products x "
                      << (cfg.year_end - cfg.year_start + 1) << " years to " << synth_opt.out_dir
                      << " (seed " << cfg.seed << ", planted Q = " << data.planted_partition.modularity
                      << ")\n";
            return 0;
        }
    } catch (const ecx::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
