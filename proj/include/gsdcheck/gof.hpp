#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsdcheck/estimation.hpp"

namespace gsdcheck {

enum class PValueConvention {
    count_over_t,        // #{G_t >= G_obs} / T
    plus_one_smoothing,  // (1 + #{G_t >= G_obs}) / (1 + T)
};

struct GofConfig {
    int bootstrap_iterations = 10000;
    std::uint64_t seed = 0;
    PValueConvention pvalue_convention = PValueConvention::count_over_t;
};

/// Throws std::domain_error when T < 100.
void validate(const GofConfig& config);

/// Bootstrap replicates are generated in fixed-size chunks, chunk c drawing
/// from Rng(substream_seed(stimulus seed, c)). The replicate set therefore
/// depends only on (seed, T), never on the number of worker threads.
inline constexpr int kBootstrapChunk = 512;

struct StimulusResult {
    std::string stimulus_id;
    ScoreCounts counts;
    FitResult fit;
    double g_statistic = 0.0;  // +inf when the sample is impossible under the fit
    double p_value = 1.0;
};

/// G = 2 sum_j k_j ln(k_j / e_j); zero counts contribute nothing. Returns
/// +inf when some k_j > 0 has e_j == 0. Tiny negative round-off is clamped
/// to 0.
double g_statistic(const ScoreCounts& observed, std::span<const double, kCategories> expected);

/// Fraction (or smoothed fraction) of replicate statistics >= g_observed.
/// Comparison allows a relative slack of 1e-10 so that replicates equal to
/// the observed statistic up to round-off count as ties. An infinite
/// g_observed gives 0 under both conventions.
double bootstrap_tail_probability(std::span<const double> replicate_g, double g_observed,
                                  PValueConvention convention);

/// Parametric bootstrap G-test for one stimulus: fit, compute G_obs, then
/// for T replicates draw n scores from the fitted GSD, refit and recompute G.
/// The replicate stream is seeded with config.seed directly.
StimulusResult bootstrap_pvalue(const ScoreCounts& counts, const Estimator& estimator,
                                const GofConfig& config, unsigned workers = 1);

/// Same as above, also returning the replicate G statistics in order.
StimulusResult bootstrap_pvalue(const ScoreCounts& counts, const Estimator& estimator,
                                const GofConfig& config, unsigned workers, std::vector<double>* replicates);

struct BatchItem {
    std::string stimulus_id;
    ScoreCounts counts;
};

struct BatchOutcome {
    std::string stimulus_id;
    std::optional<StimulusResult> result;
    std::string error;  // set when result is empty

    bool ok() const noexcept { return result.has_value(); }
};

/// Runs bootstrap_pvalue for every stimulus with seed
/// stimulus_seed(config.seed, stimulus_id). Output order matches input
/// order; a failing stimulus is reported in place without aborting the rest.
std::vector<BatchOutcome> batch_gof(std::span<const BatchItem> items, const Estimator& estimator,
                                    const GofConfig& config, unsigned workers = 1);

/// CSV header + one row per successful result:
/// stimulus_id,n,k1,k2,k3,k4,k5,psi_hat,rho_hat,g_stat,p_value
/// psi_hat "%.2f", rho_hat "%.4f", g_stat and p_value "%.10g" ("inf" for
/// infinite G).
void write_results_csv(std::ostream& os, std::span<const StimulusResult> results);

std::string format_double(const char* spec, double value);

}  // namespace gsdcheck
