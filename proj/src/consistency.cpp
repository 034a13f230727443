#include "gsdcheck/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

namespace gsdcheck {

namespace {

std::size_t count_at_most(const std::vector<double>& sorted, double alpha) {
    return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), alpha) - sorted.begin());
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

PValueSeries::PValueSeries(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw std::domain_error("PValueSeries: no p-values");
    sorted_.reserve(entries_.size());
    for (const auto& [id, p] : entries_) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::domain_error("PValueSeries: p-value of '" + id + "' outside [0, 1]");
        }
        sorted_.push_back(p);
    }
    std::sort(sorted_.begin(), sorted_.end());
}

PValueSeries PValueSeries::from_values(const std::vector<double>& p_values) {
    std::vector<Entry> entries;
    entries.reserve(p_values.size());
    for (std::size_t i = 0; i < p_values.size(); ++i) entries.emplace_back(std::to_string(i), p_values[i]);
    return PValueSeries(std::move(entries));
}

double ecdf(const PValueSeries& series, double alpha) {
    return static_cast<double>(count_at_most(series.sorted(), alpha)) / static_cast<double>(series.size());
}

double z_quantile(double beta, ZMode mode) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("z_quantile: beta must lie in (0, 1)");
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - beta);
    return mode == ZMode::two_decimal ? std::round(z * 100.0) / 100.0 : z;
}

double threshold_line(double alpha, std::size_t n, double z) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("threshold_line: alpha must lie in [0, 1]");
    if (n == 0) throw std::domain_error("threshold_line: n must be positive");
    return alpha + z * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n));
}

double threshold_line(double alpha, std::size_t n, double beta, ZMode mode) {
    return threshold_line(alpha, n, z_quantile(beta, mode));
}

PPPlotData build_ppplot(const PValueSeries& series, double beta, ZMode mode) {
    PPPlotData data;
    data.n_stimuli = series.size();
    data.beta = beta;
    data.z = z_quantile(beta, mode);

    const auto& sorted = series.sorted();
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        data.points.push_back({sorted[i], static_cast<double>(i + 1) / static_cast<double>(sorted.size())});
    }
    data.threshold.reserve(PPPlotData::kThresholdSamples);
    for (int i = 0; i < PPPlotData::kThresholdSamples; ++i) {
        const double alpha = static_cast<double>(i) / (PPPlotData::kThresholdSamples - 1);
        data.threshold.push_back({alpha, threshold_line(alpha, data.n_stimuli, data.z)});
    }
    return data;
}

double proportion_test(std::size_t below, std::size_t n, double alpha, ProportionTest variant) {
    if (n == 0) throw std::domain_error("experiment_test: no stimuli");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("experiment_test: alpha must lie in (0, 1)");
    if (variant != ProportionTest::normal) {
        const boost::math::binomial_distribution<double> bin(static_cast<double>(n), alpha);
        const double k = static_cast<double>(below);
        const double above = boost::math::cdf(boost::math::complement(bin, k));  // P[X > k]
        const double at = boost::math::pdf(bin, k);
        return variant == ProportionTest::exact_binomial ? above + at : above + 0.5 * at;
    }
    const double nn = static_cast<double>(n);
    const double alpha_hat = static_cast<double>(below) / nn;
    const double z = (alpha_hat - alpha) / std::sqrt(alpha * (1.0 - alpha) / nn);
    return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), z));
}

double experiment_test(const PValueSeries& series, double alpha, ProportionTest variant) {
    return proportion_test(count_at_most(series.sorted(), alpha), series.size(), alpha, variant);
}

std::string to_string(Decision d) { return d == Decision::consistent ? "consistent" : "inconsistent"; }

ConsistencyVerdict classify_experiment(const PValueSeries& series, const VerdictConfig& config) {
    if (!(config.alpha_cap > 0.0 && config.alpha_cap < 1.0)) {
        throw std::domain_error("classify_experiment: alpha_cap must lie in (0, 1)");
    }
    const double z = z_quantile(config.beta, config.z_mode);
    const std::size_t n = series.size();
    const auto& sorted = series.sorted();

    ConsistencyVerdict verdict;
    verdict.alpha_used = config.alpha_cap;

    auto exceeds = [&](double alpha) { return ecdf(series, alpha) > threshold_line(alpha, n, z); };

    std::optional<double> crossing;
    if (exceeds(config.alpha_cap)) {
        crossing = config.alpha_cap;
    } else {
        for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
            const double alpha = *it;
            if (alpha > config.alpha_cap || alpha <= 0.0) continue;
            if (exceeds(alpha)) {
                crossing = alpha;
                break;
            }
        }
    }

    if (crossing) {
        verdict.decision = Decision::inconsistent;
        verdict.crossing_alpha = crossing;
        std::vector<std::pair<double, std::string>> picked;
        for (const auto& [id, p] : series.entries()) {
            if (p < *crossing) picked.emplace_back(p, id);
        }
        std::sort(picked.begin(), picked.end());
        for (auto& [p, id] : picked) verdict.flagged.push_back(std::move(id));
    }
    verdict.experiment_p_value = experiment_test(series, config.alpha_cap, config.test);
    return verdict;
}

std::string render_csv(const PPPlotData& data) {
    std::ostringstream os;
    os << "alpha,ecdf,threshold\n";
    for (const PPPoint& p : data.points) {
        os << fmt("%.17g", p.alpha) << ',' << fmt("%.17g", p.ecdf) << ','
           << fmt("%.17g", threshold_line(p.alpha, data.n_stimuli, data.z)) << '\n';
    }
    return os.str();
}

std::vector<PlotCsvRow> parse_plot_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "alpha,ecdf,threshold") {
        throw std::runtime_error("plot CSV: unexpected header");
    }
    std::vector<PlotCsvRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        PlotCsvRow row{};
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &row.alpha, &row.ecdf, &row.threshold) != 3) {
            throw std::runtime_error("plot CSV: malformed row '" + line + "'");
        }
        rows.push_back(row);
    }
    return rows;
}

std::string render_svg(const PPPlotData& data) {
    constexpr double width = 480, height = 480, margin = 60;
    constexpr double plot = width - 2 * margin;
    auto sx = [&](double a) { return margin + a * plot; };
    auto sy = [&](double v) { return height - margin - std::min(1.0, std::max(0.0, v)) * plot; };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
       << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
       << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot << "\" height=\"" << plot
       << "\" fill=\"none\" stroke=\"#444\"/>\n";

    for (int i = 0; i <= 10; ++i) {
        const double t = i / 10.0;
        os << "  <text x=\"" << fmt("%.2f", sx(t)) << "\" y=\"" << height - margin + 16
           << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt("%.1f", t) << "</text>\n"
           << "  <text x=\"" << margin - 6 << "\" y=\"" << fmt("%.2f", sy(t) + 3)
           << "\" font-size=\"10\" text-anchor=\"end\">" << fmt("%.1f", t) << "</text>\n";
    }

    os << "  <line id=\"diagonal\" x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(1) << "\" y2=\""
       << sy(1) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";

    os << "  <polyline id=\"threshold\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < data.threshold.size(); ++i) {
        if (i) os << ' ';
        os << fmt("%.3f", sx(data.threshold[i].alpha)) << ',' << fmt("%.3f", sy(data.threshold[i].f_alpha));
    }
    os << "\"/>\n";

    os << "  <g id=\"ecdf\" fill=\"#1f4e9c\">\n";
    for (const PPPoint& p : data.points) {
        os << "    <circle cx=\"" << fmt("%.3f", sx(p.alpha)) << "\" cy=\"" << fmt("%.3f", sy(p.ecdf))
           << "\" r=\"2\"/>\n";
    }
    os << "  </g>\n";

    os << "  <text x=\"" << width / 2 << "\" y=\"" << height - 18
       << "\" font-size=\"13\" text-anchor=\"middle\">p-value / expected CDF</text>\n"
       << "  <text x=\"18\" y=\"" << height / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << height / 2 << ")\">observed ECDF</text>\n"
       << "  <text x=\"" << width / 2 << "\" y=\"30\" font-size=\"12\" text-anchor=\"middle\">n = " << data.n_stimuli
       << ", z = " << fmt("%.4g", data.z) << "</text>\n"
       << "</svg>\n";
    return os.str();
}

void render_plot(const PPPlotData& data, const std::filesystem::path& path, PlotFormat format) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open plot output: " + path.string());
    os << (format == PlotFormat::svg ? render_svg(data) : render_csv(data));
    if (!os) throw std::runtime_error("failed writing plot output: " + path.string());
}

}  // namespace gsdcheck
