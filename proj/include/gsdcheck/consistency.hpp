#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsdcheck/gsd.hpp"

namespace gsdcheck {

/// Per-stimulus p-values of one experiment.
class PValueSeries {
public:
    using Entry = std::pair<std::string, double>;

    /// Throws std::domain_error when empty or when a p-value is outside [0, 1].
    explicit PValueSeries(std::vector<Entry> entries);
    static PValueSeries from_values(const std::vector<double>& p_values);  // ids "0", "1", ...

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    /// p-values in ascending order.
    const std::vector<double>& sorted() const noexcept { return sorted_; }

private:
    std::vector<Entry> entries_;
    std::vector<double> sorted_;
};

/// Fraction of p-values <= alpha (right-continuous ECDF).
double ecdf(const PValueSeries& series, double alpha);

enum class ZMode {
    two_decimal,  // normal quantile rounded to two decimals (1.64 at beta = 0.05)
    exact,
};

/// z_{1-beta}. Throws std::domain_error unless 0 < beta < 1.
double z_quantile(double beta, ZMode mode = ZMode::two_decimal);

/// f(alpha) = alpha + z * sqrt(alpha (1 - alpha) / n).
double threshold_line(double alpha, std::size_t n, double z);

/// Same, resolving z from beta.
double threshold_line(double alpha, std::size_t n, double beta, ZMode mode);

struct PPPoint {
    double alpha;
    double ecdf;
};

struct ThresholdPoint {
    double alpha;
    double f_alpha;
};

struct PPPlotData {
    std::vector<PPPoint> points;            // one per distinct observed p-value
    std::vector<ThresholdPoint> threshold;  // kThresholdSamples alphas on [0, 1]
    std::size_t n_stimuli = 0;
    double beta = 0.05;
    double z = 1.64;

    static constexpr int kThresholdSamples = 512;
};

PPPlotData build_ppplot(const PValueSeries& series, double beta = 0.05, ZMode mode = ZMode::two_decimal);

enum class ProportionTest {
    normal,          // 1 - Phi((alpha_hat - alpha) / sqrt(alpha (1 - alpha) / n))
    exact_binomial,  // P[Bin(n, alpha) >= count]
    binomial_mid_p,  // P[Bin(n, alpha) > count] + P[Bin(n, alpha) = count] / 2
};

/// One-sided test of "the share of stimuli with p <= alpha is at most
/// alpha". Throws std::domain_error unless 0 < alpha < 1.
double experiment_test(const PValueSeries& series, double alpha, ProportionTest variant = ProportionTest::normal);

/// Same test from a raw count of p-values at or below alpha.
double proportion_test(std::size_t below, std::size_t n, double alpha, ProportionTest variant);

enum class Decision { consistent, inconsistent };

std::string to_string(Decision d);

struct VerdictConfig {
    double beta = 0.05;
    double alpha_cap = 0.2;
    ZMode z_mode = ZMode::two_decimal;
    ProportionTest test = ProportionTest::normal;
};

struct ConsistencyVerdict {
    Decision decision = Decision::consistent;
    std::optional<double> crossing_alpha;
    std::vector<std::string> flagged;  // ascending p-value, ties by id
    double experiment_p_value = 1.0;
    double alpha_used = 0.2;
};

/// Exceedance is checked at every observed p-value in (0, alpha_cap] and at
/// alpha_cap itself: the experiment is inconsistent when ecdf(alpha) >
/// f(alpha) anywhere there. crossing_alpha is the largest such alpha, and
/// the flagged stimuli are those with p < crossing_alpha.
ConsistencyVerdict classify_experiment(const PValueSeries& series, const VerdictConfig& config = {});

enum class PlotFormat { svg, csv };

/// SVG: ECDF points, threshold polyline, x = y reference and axis labels.
/// CSV: header "alpha,ecdf,threshold", one row per ECDF point, "%.17g".
void render_plot(const PPPlotData& data, const std::filesystem::path& path, PlotFormat format);
std::string render_svg(const PPPlotData& data);
std::string render_csv(const PPPlotData& data);

struct PlotCsvRow {
    double alpha;
    double ecdf;
    double threshold;
};

std::vector<PlotCsvRow> parse_plot_csv(const std::string& text);

}  // namespace gsdcheck
