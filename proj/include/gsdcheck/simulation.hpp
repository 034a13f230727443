#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gsdcheck/gsd.hpp"
#include "gsdcheck/ingest.hpp"

namespace gsdcheck {

enum class AtypicalClass { bimodal, random_answers, sudden_cutoff, hate_or_love };

std::string_view to_string(AtypicalClass c);
AtypicalClass atypical_class_from_string(std::string_view name);  // throws std::invalid_argument

/// Knobs of the contamination generators.
struct ContaminationShape {
    double bimodal_offset = 1.0;       // component means psi -/+ offset (clipped to [1, 5])
    double bimodal_rho = 0.9;
    double random_rho = 0.9;
    double random_replace_prob = 0.08;  // chance a draw is replaced by a uniform score
    double cutoff_rho = 0.8;
    double hate_love_rho = 0.7;
    double hate_love_share = 0.6;       // share of draws from the 1-or-5 mixture
};

/// Score distribution a contaminated stimulus is drawn from:
///  bimodal         0.5 GSD(psi - d, rho_b) + 0.5 GSD(psi + d, rho_b)
///  random_answers  (1 - q) GSD(psi, rho_r) + q Uniform{1..5}
///  sudden_cutoff   GSD(psi, rho_c) with one scale-interior neighbour of the
///                  mode (the lighter one if both qualify) zeroed, its mass
///                  moved to the mode
///  hate_or_love    (1 - h) GSD(psi, rho_h) + h/2 at score 1 + h/2 at score 5
Pmf5 contamination_pmf(AtypicalClass cls, double psi, const ContaminationShape& shape = {});

/// n draws from contamination_pmf, deterministic in seed.
ScoreCounts contaminate(AtypicalClass cls, double psi, int n, std::uint64_t seed,
                        const ContaminationShape& shape = {});

struct Range {
    double lo;
    double hi;
};

struct SimConfig {
    int n_stimuli = 160;
    int n_scores = 24;
    Range psi_range{1.2, 4.8};
    Range rho_range{0.5, 0.95};
    std::vector<std::pair<AtypicalClass, double>> contamination;  // (class, rate)
    ContaminationShape shape;
    std::uint64_t seed = 0;
    std::string experiment_id = "sim";
};

/// Throws std::invalid_argument on bad counts, ranges or rates.
void validate(const SimConfig& config);

struct StimulusLabel {
    std::string stimulus_id;
    bool typical = true;
    AtypicalClass cls = AtypicalClass::bimodal;  // meaningful when !typical
    double psi = 0.0;
    double rho = 0.0;

    std::string truth_class() const { return typical ? "typical" : std::string(to_string(cls)); }
};

struct SimulatedExperiment {
    ExperimentData data;
    std::vector<StimulusLabel> labels;  // in stimulus order
};

/// Stimulus i ("<experiment_id>_0001", ...) draws from
/// Rng(substream_seed(seed, i)): psi, then rho, then its scores. For every
/// class round(rate * n_stimuli) stimuli are contaminated; which ones is
/// decided by a seeded shuffle independent of the per-stimulus streams.
SimulatedExperiment generate_experiment(const SimConfig& config);

/// Labels CSV: stimulus_id,truth_class
void write_labels_csv(std::ostream& os, const std::vector<StimulusLabel>& labels);

}  // namespace gsdcheck
