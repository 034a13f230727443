#include "gsdcheck/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gsdcheck {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc | std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << text;
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

nlohmann::json nullable(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

ExperimentReport analyze_experiment(const ExperimentData& data, const Estimator& estimator,
                                    const AnalysisConfig& config) {
    std::vector<BatchItem> items;
    items.reserve(data.stimuli.size());
    for (const auto& [id, counts] : data.stimuli) items.push_back({id, counts});

    ExperimentReport report;
    report.experiment_id = data.experiment_id;
    for (BatchOutcome& outcome : batch_gof(items, estimator, config.gof, config.workers)) {
        if (outcome.ok()) {
            report.results.push_back(std::move(*outcome.result));
        } else {
            report.failures.push_back(std::move(outcome));
        }
    }
    if (report.results.empty()) {
        throw std::runtime_error("experiment '" + data.experiment_id + "': no stimulus could be analysed");
    }

    std::vector<PValueSeries::Entry> entries;
    entries.reserve(report.results.size());
    for (const StimulusResult& r : report.results) entries.emplace_back(r.stimulus_id, r.p_value);
    const PValueSeries series(std::move(entries));

    report.ppplot = build_ppplot(series, config.verdict.beta, config.verdict.z_mode);
    report.verdict = classify_experiment(series, config.verdict);

    for (const std::string& id : report.verdict.flagged) {
        const auto it = std::find_if(report.results.begin(), report.results.end(),
                                     [&](const StimulusResult& r) { return r.stimulus_id == id; });
        report.flagged.push_back({*it, tag_stimulus(it->counts)});
    }
    return report;
}

std::string verdict_json(const ExperimentReport& report, const AnalysisConfig& config) {
    const ConsistencyVerdict& v = report.verdict;
    nlohmann::ordered_json j;
    j["experiment_id"] = report.experiment_id;
    j["decision"] = to_string(v.decision);
    j["crossing_alpha"] = nullable(v.crossing_alpha);
    j["flagged"] = v.flagged;
    j["n_flagged"] = v.flagged.size();
    j["experiment_p_value"] = v.experiment_p_value;
    j["alpha_used"] = v.alpha_used;
    j["n_stimuli"] = report.results.size();
    j["n_failed"] = report.failures.size();
    j["beta"] = config.verdict.beta;
    j["z"] = report.ppplot.z;
    return j.dump();
}

void write_experiment_outputs(const ExperimentReport& report, const std::filesystem::path& dir,
                              const OutputOptions& options, const AnalysisConfig& config) {
    std::filesystem::create_directories(dir);

    {
        std::ostringstream os;
        write_results_csv(os, report.results);
        write_file(dir / "results.csv", os.str());
    }
    if (options.svg) write_file(dir / "ppplot.svg", render_svg(report.ppplot));
    if (options.csv) write_file(dir / "ppplot.csv", render_csv(report.ppplot));
    write_file(dir / "verdict.json", nlohmann::json::parse(verdict_json(report, config)).dump(2) + "\n");

    {
        std::ostringstream os;
        os << "stimulus_id,n,k1,k2,k3,k4,k5,p_value,tags\n";
        for (const FlaggedRow& row : report.flagged) {
            os << csv_escape(row.result.stimulus_id) << ',' << row.result.counts.n();
            for (int k : row.result.counts.k) os << ',' << k;
            os << ',' << format_double("%.10g", row.result.p_value) << ',' << join_tags(row.tags) << '\n';
        }
        write_file(dir / "flagged.csv", os.str());
    }
    if (!report.failures.empty()) {
        std::ostringstream os;
        os << "stimulus_id,error\n";
        for (const BatchOutcome& f : report.failures) os << csv_escape(f.stimulus_id) << ',' << csv_escape(f.error) << '\n';
        write_file(dir / "errors.csv", os.str());
    }
}

std::string sanitize_path_component(const std::string& id) {
    std::string out;
    for (char c : id) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                          c == '_' || c == '-';
        out += keep ? c : '_';
    }
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

ParamGrid load_or_build_grid(const std::filesystem::path& path) {
    if (std::filesystem::exists(path)) return load_grid(path);
    ParamGrid grid = ParamGrid::build();
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    save_grid(grid, path);
    return grid;
}

}  // namespace gsdcheck
