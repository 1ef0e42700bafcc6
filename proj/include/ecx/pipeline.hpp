#pragma once

#include <string>
#include <vector>

#include "ecx/blocks.hpp"
#include "ecx/common.hpp"
#include "ecx/config.hpp"
#include "ecx/figures.hpp"
#include "ecx/fitness.hpp"
#include "ecx/matrix.hpp"
#include "ecx/panel.hpp"
#include "ecx/prody.hpp"
#include "ecx/regress.hpp"
#include "ecx/sapling.hpp"

namespace ecx {

enum class Stage { Ingest, Blocks, Indicators, Regress, Figures, Full };

// Everything a run produces, kept in memory for the CLI writers and the tests.
struct PipelineResult {
    RunConfig config;
    WarningLog warnings;

    LoadReport exports_report;
    LoadReport world_report;
    LoadReport financials_report;
    ExportPanel exports; // persistent firms only
    int firms_before_filter = 0;

    BlockPartition partition; // over HS6 products
    std::string block_report;

    ProductScoreTable product_scores;
    FitnessResult fitness;
    double logprody_complexity_r = 0.0; // Pearson diagnostic
    VariablePanel variables;
    CoherenceTable coherence_at_t_star;
    SimilarityMatrix similarity_at_t_star;

    std::vector<RegressionResult> regressions;
    std::string regression_text;

    FigureGrid heatmap;
    Curve curve;
    bool curve_emitted = false;

    std::vector<std::string> written_files;
    std::string manifest;
};

// Executes ingest -> matrices -> blocks -> indicators -> variables ->
// regressions -> figures up to `stage`, writing the stage artifacts and (for
// full runs) a manifest into config.output_dir. Partial outputs are removed
// when a stage fails. `write_outputs = false` keeps everything in memory.
PipelineResult run_pipeline(const RunConfig& config, Stage stage = Stage::Full, bool write_outputs = true);

// Human-readable run summary; every figure it quotes also lands in a machine
// output.
std::string run_report(const PipelineResult& result);

std::string file_digest(const std::string& path);

} // namespace ecx
