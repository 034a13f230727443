#include "gsdcheck/gof.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "gsdcheck/ingest.hpp"
#include "gsdcheck/parallel.hpp"
#include "gsdcheck/rng.hpp"

namespace gsdcheck {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool at_least(double g_replicate, double g_observed) {
    return g_replicate >= g_observed - 1e-10 * std::max(1.0, g_observed);
}

double to_pvalue(long long hits, long long total, PValueConvention convention) {
    if (convention == PValueConvention::plus_one_smoothing) {
        return static_cast<double>(hits + 1) / static_cast<double>(total + 1);
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

void validate(const GofConfig& config) {
    if (config.bootstrap_iterations < 100) {
        throw std::domain_error("bootstrap_iterations must be at least 100, got " +
                                std::to_string(config.bootstrap_iterations));
    }
}

double g_statistic(const ScoreCounts& observed, std::span<const double, kCategories> expected) {
    double g = 0.0;
    for (int j = 0; j < kCategories; ++j) {
        const int k = observed.k[j];
        if (k == 0) continue;
        if (!(expected[j] > 0.0)) return kInf;
        g += k * std::log(k / expected[j]);
    }
    return std::max(0.0, 2.0 * g);
}

double bootstrap_tail_probability(std::span<const double> replicate_g, double g_observed,
                                  PValueConvention convention) {
    if (replicate_g.empty()) throw std::domain_error("bootstrap_tail_probability: no replicates");
    if (std::isinf(g_observed)) return 0.0;  // impossible under the fit, under either convention
    long long hits = 0;
    for (double g : replicate_g) hits += at_least(g, g_observed) ? 1 : 0;
    return to_pvalue(hits, static_cast<long long>(replicate_g.size()), convention);
}

StimulusResult bootstrap_pvalue(const ScoreCounts& counts, const Estimator& estimator, const GofConfig& config,
                                unsigned workers) {
    return bootstrap_pvalue(counts, estimator, config, workers, nullptr);
}

StimulusResult bootstrap_pvalue(const ScoreCounts& counts, const Estimator& estimator, const GofConfig& config,
                                unsigned workers, std::vector<double>* replicates) {
    validate(config);
    validate_counts(counts);

    StimulusResult result;
    result.counts = counts;
    result.fit = estimator.fit(counts);
    result.g_statistic = g_statistic(counts, result.fit.expected_counts);

    const int n = counts.n();
    const int total = config.bootstrap_iterations;
    if (replicates) replicates->assign(static_cast<std::size_t>(total), 0.0);

    if (std::isinf(result.g_statistic)) {
        // Observation impossible under the fitted model.
        result.p_value = 0.0;
        if (replicates) replicates->clear();
        return result;
    }

    Pmf5 fitted{};
    for (int j = 0; j < kCategories; ++j) fitted[j] = result.fit.expected_counts[j] / n;
    const CategoricalSampler sampler(fitted);

    const int chunks = (total + kBootstrapChunk - 1) / kBootstrapChunk;
    std::vector<long long> hits(static_cast<std::size_t>(chunks), 0);
    const double g_obs = result.g_statistic;

    parallel_for(static_cast<std::size_t>(chunks), workers, [&](std::size_t c) {
        Rng rng(substream_seed(config.seed, c));
        const int begin = static_cast<int>(c) * kBootstrapChunk;
        const int end = std::min(total, begin + kBootstrapChunk);
        long long local = 0;
        for (int t = begin; t < end; ++t) {
            ScoreCounts boot;
            sampler.draw_counts(rng, n, boot.k);
            const FitResult refit = estimator.fit(boot);
            const double g = g_statistic(boot, refit.expected_counts);
            if (replicates) (*replicates)[static_cast<std::size_t>(t)] = g;
            local += at_least(g, g_obs) ? 1 : 0;
        }
        hits[c] = local;
    });

    long long total_hits = 0;
    for (long long h : hits) total_hits += h;
    result.p_value = to_pvalue(total_hits, total, config.pvalue_convention);
    return result;
}

std::vector<BatchOutcome> batch_gof(std::span<const BatchItem> items, const Estimator& estimator,
                                    const GofConfig& config, unsigned workers) {
    validate(config);
    if (items.empty()) throw std::domain_error("batch_gof: no stimuli");

    std::vector<BatchOutcome> out(items.size());
    parallel_for(items.size(), workers, [&](std::size_t i) {
        const BatchItem& item = items[i];
        BatchOutcome& slot = out[i];
        slot.stimulus_id = item.stimulus_id;
        try {
            GofConfig local = config;
            local.seed = stimulus_seed(config.seed, item.stimulus_id);
            StimulusResult r = bootstrap_pvalue(item.counts, estimator, local, 1);
            r.stimulus_id = item.stimulus_id;
            slot.result = std::move(r);
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    });
    return out;
}

std::string format_double(const char* spec, double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, value);
    return buf;
}

void write_results_csv(std::ostream& os, std::span<const StimulusResult> results) {
    os << "stimulus_id,n,k1,k2,k3,k4,k5,psi_hat,rho_hat,g_stat,p_value\n";
    for (const StimulusResult& r : results) {
        os << csv_escape(r.stimulus_id) << ',' << r.counts.n();
        for (int k : r.counts.k) os << ',' << k;
        os << ',' << format_double("%.2f", r.fit.params.psi()) << ',' << format_double("%.4f", r.fit.params.rho())
           << ',' << format_double("%.10g", r.g_statistic) << ',' << format_double("%.10g", r.p_value) << '\n';
    }
}

}  // namespace gsdcheck
