#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gsdcheck/consistency.hpp"
#include "gsdcheck/diagnostics.hpp"
#include "gsdcheck/gof.hpp"
#include "gsdcheck/ingest.hpp"

namespace gsdcheck {

inline constexpr const char* kToolVersion = "1.0.0";

struct AnalysisConfig {
    GofConfig gof;
    VerdictConfig verdict;
    unsigned workers = 1;
};

struct FlaggedRow {
    StimulusResult result;
    std::vector<ShapeTag> tags;
};

struct ExperimentReport {
    std::string experiment_id;
    std::vector<StimulusResult> results;  // stimulus-id order
    std::vector<BatchOutcome> failures;
    PPPlotData ppplot;
    ConsistencyVerdict verdict;
    std::vector<FlaggedRow> flagged;  // ascending p-value
};

/// Fit, bootstrap, P-P plot and verdict for one experiment.
/// Throws std::runtime_error if no stimulus produced a p-value.
ExperimentReport analyze_experiment(const ExperimentData& data, const Estimator& estimator,
                                    const AnalysisConfig& config);

struct OutputOptions {
    bool svg = true;
    bool csv = true;
};

/// Writes <dir>/{results.csv, ppplot.svg, ppplot.csv, verdict.json, flagged.csv}
/// (plus errors.csv when some stimuli failed).
void write_experiment_outputs(const ExperimentReport& report, const std::filesystem::path& dir,
                              const OutputOptions& options, const AnalysisConfig& config);

/// Single-line JSON record of a verdict.
std::string verdict_json(const ExperimentReport& report, const AnalysisConfig& config);

/// Experiment ids become directory names; keep [A-Za-z0-9._-] and replace
/// everything else with '_'.
std::string sanitize_path_component(const std::string& id);

/// Loads the grid from path when present, otherwise builds and saves it.
ParamGrid load_or_build_grid(const std::filesystem::path& path);

}  // namespace gsdcheck
