// gsdcheck: command-line front end.
//
//   gsdcheck grid build|verify   build or verify the (psi, rho) grid cache
//   gsdcheck analyze <csv>       per-experiment p-values, P-P plot and verdict
//   gsdcheck simulate            synthetic experiments, optionally self-analysed
//
// Exit codes: 0 success, 1 usage error, 2 data or grid integrity error.
// Verdicts never change the exit code.

#include <cstdint>
#include <cstring>
#include <set>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gsdcheck/pipeline.hpp"
#include "gsdcheck/rng.hpp"
#include "gsdcheck/simulation.hpp"

namespace fs = std::filesystem;
using namespace gsdcheck;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct CommonOptions {
    std::string grid_path = "gsd_grid.bin";
    int bootstrap_iters = 10000;
    std::uint64_t seed = 0;
    double beta = 0.05;
    double alpha_cap = 0.2;
    unsigned workers = 0;
    std::string out = "gsdcheck_out";
    std::string format = "svg,csv";
    bool z_exact = false;
    bool binomial_test = false;
    std::string pvalue_convention = "count";
    std::string scan = "full";
};

void add_grid_option(CLI::App& cmd, CommonOptions& o) {
    cmd.add_option("--grid-path", o.grid_path, "Grid cache file")->envname("GSDCHECK_GRID_PATH")->capture_default_str();
}

void add_analysis_options(CLI::App& cmd, CommonOptions& o) {
    add_grid_option(cmd, o);
    cmd.add_option("--bootstrap-iters", o.bootstrap_iters, "Bootstrap replicates per stimulus (>= 100)")
        ->envname("GSDCHECK_BOOTSTRAP_ITERS")
        ->capture_default_str();
    cmd.add_option("--seed", o.seed, "Master seed")->envname("GSDCHECK_SEED")->capture_default_str();
    cmd.add_option("--beta", o.beta, "Significance level of the threshold line")
        ->envname("GSDCHECK_BETA")
        ->capture_default_str();
    cmd.add_option("--alpha-cap", o.alpha_cap, "Largest alpha inspected for exceedance")
        ->envname("GSDCHECK_ALPHA_CAP")
        ->capture_default_str();
    cmd.add_option("--workers", o.workers, "Worker threads (0 = all cores)")
        ->envname("GSDCHECK_WORKERS")
        ->capture_default_str();
    cmd.add_option("--out", o.out, "Output directory")->envname("GSDCHECK_OUT")->capture_default_str();
    cmd.add_option("--format", o.format, "Plot formats: svg,csv")->envname("GSDCHECK_FORMAT")->capture_default_str();
    cmd.add_flag("--z-exact", o.z_exact, "Use the exact normal quantile instead of the two-decimal one");
    cmd.add_flag("--binomial-test", o.binomial_test, "Exact binomial experiment-level test");
    cmd.add_option("--pvalue-convention", o.pvalue_convention, "count | plus-one")
        ->check(CLI::IsMember({"count", "plus-one"}))
        ->capture_default_str();
    cmd.add_option("--scan", o.scan, "full | coarse")->check(CLI::IsMember({"full", "coarse"}))->capture_default_str();
}

AnalysisConfig to_analysis_config(const CommonOptions& o) {
    AnalysisConfig cfg;
    cfg.gof.bootstrap_iterations = o.bootstrap_iters;
    cfg.gof.seed = o.seed;
    cfg.gof.pvalue_convention =
        o.pvalue_convention == "plus-one" ? PValueConvention::plus_one_smoothing : PValueConvention::count_over_t;
    cfg.verdict.beta = o.beta;
    cfg.verdict.alpha_cap = o.alpha_cap;
    cfg.verdict.z_mode = o.z_exact ? ZMode::exact : ZMode::two_decimal;
    cfg.verdict.test = o.binomial_test ? ProportionTest::exact_binomial : ProportionTest::normal;
    cfg.workers = o.workers;
    validate(cfg.gof);
    z_quantile(cfg.verdict.beta);
    if (!(o.alpha_cap > 0.0 && o.alpha_cap < 1.0)) throw CLI::ValidationError("--alpha-cap", "must lie in (0, 1)");
    return cfg;
}

OutputOptions parse_formats(const std::string& spec) {
    OutputOptions out{false, false};
    for (const std::string& f : split_csv_line(spec)) {
        if (f == "svg") out.svg = true;
        else if (f == "csv") out.csv = true;
        else throw CLI::ValidationError("--format", "unknown format '" + f + "'");
    }
    return out;
}

nlohmann::ordered_json config_json(const CommonOptions& o, const AnalysisConfig& cfg) {
    nlohmann::ordered_json j;
    j["grid_path"] = o.grid_path;
    j["bootstrap_iters"] = cfg.gof.bootstrap_iterations;
    j["seed"] = cfg.gof.seed;
    j["pvalue_convention"] = o.pvalue_convention;
    j["beta"] = cfg.verdict.beta;
    j["z"] = z_quantile(cfg.verdict.beta, cfg.verdict.z_mode);
    j["z_mode"] = o.z_exact ? "exact" : "two_decimal";
    j["alpha_cap"] = cfg.verdict.alpha_cap;
    j["experiment_test"] = o.binomial_test ? "exact_binomial" : "normal";
    j["scan"] = o.scan;
    j["format"] = o.format;
    // Worker count is deliberately absent: it never changes results.
    return j;
}

std::string file_fingerprint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(ss.str())));
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc | std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << text;
}

// ---- grid ------------------------------------------------------------------

int cmd_grid(const std::string& action, const CommonOptions& o) {
    if (action == "build") {
        const ParamGrid grid = ParamGrid::build();
        save_grid(grid, o.grid_path);
        std::cout << "grid written to " << o.grid_path << " (checksum " << hex64(grid.checksum()) << ")\n";
        return kExitOk;
    }

    const ParamGrid grid = load_grid(o.grid_path);
    Rng rng(o.seed ^ 0x6772696456ULL);
    for (int t = 0; t < 100; ++t) {
        const int flat = static_cast<int>(rng.below(ParamGrid::kCellCount));
        const GridCell cell = ParamGrid::cell_at(flat);
        const Pmf5 expected = gsd_log_pmf(ParamGrid::params_at(cell));
        const auto stored = grid.log_pmf(cell);
        if (std::memcmp(expected.data(), stored.data(), sizeof(double) * kCategories) != 0) {
            std::cerr << "grid verify: cell (psi=" << ParamGrid::psi_at(cell.psi_index)
                      << ", rho=" << ParamGrid::rho_at(cell.rho_index) << ") differs from recomputation\n";
            return kExitData;
        }
    }
    std::cout << "grid " << o.grid_path << " OK (checksum " << hex64(grid.checksum())
              << ", 100 cells re-derived bit-exactly)\n";
    return kExitOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeRun {
    std::vector<ExperimentReport> reports;
    std::uint64_t grid_checksum = 0;
};

AnalyzeRun run_analysis(const std::map<std::string, ExperimentData>& experiments, const CommonOptions& o,
                        const AnalysisConfig& cfg) {
    const ParamGrid grid = load_or_build_grid(o.grid_path);
    const Estimator estimator(grid, o.scan == "coarse" ? ScanMode::coarse_to_fine : ScanMode::full);
    AnalyzeRun run;
    run.grid_checksum = grid.checksum();
    for (const auto& [id, data] : experiments) run.reports.push_back(analyze_experiment(data, estimator, cfg));
    return run;
}

void write_run_outputs(const AnalyzeRun& run, const fs::path& out, const OutputOptions& formats,
                       const AnalysisConfig& cfg, nlohmann::ordered_json manifest) {
    fs::create_directories(out);
    std::ostringstream verdicts;
    for (const ExperimentReport& report : run.reports) {
        write_experiment_outputs(report, out / sanitize_path_component(report.experiment_id), formats, cfg);
        verdicts << verdict_json(report, cfg) << '\n';
    }
    write_text(out / "verdicts.jsonl", verdicts.str());
    manifest["grid_checksum"] = hex64(run.grid_checksum);
    manifest["tool_version"] = kToolVersion;
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
}

void print_summary(const AnalyzeRun& run) {
    for (const ExperimentReport& r : run.reports) {
        std::cout << r.experiment_id << ": " << to_string(r.verdict.decision)
                  << "  stimuli=" << r.results.size() << "  flagged=" << r.verdict.flagged.size()
                  << "  crossing=" << (r.verdict.crossing_alpha ? format_double("%.4g", *r.verdict.crossing_alpha) : "-")
                  << "  p(alpha=" << r.verdict.alpha_used << ")=" << format_double("%.5g", r.verdict.experiment_p_value);
        if (!r.failures.empty()) std::cout << "  failed=" << r.failures.size();
        std::cout << '\n';
    }
}

int cmd_analyze(const std::string& input, bool counts_input, const std::string& columns, bool strict,
                const CommonOptions& o) {
    const AnalysisConfig cfg = to_analysis_config(o);
    const OutputOptions formats = parse_formats(o.format);

    std::map<std::string, ExperimentData> experiments;
    if (counts_input) {
        experiments = read_counts_csv(fs::path(input));
    } else {
        const ColumnMap map = columns.empty() ? ColumnMap{} : ColumnMap::parse(columns);
        ParseResult parsed = parse_csv(fs::path(input), map, strict);
        for (const RowError& e : parsed.errors) std::cerr << "warning: line " << e.line << ": " << e.message << '\n';
        if (parsed.records.empty()) throw CsvError("no valid score rows in " + input);
        AggregateResult agg = aggregate(parsed.records);
        for (const std::string& w : agg.warnings) std::cerr << "warning: " << w << '\n';
        experiments = std::move(agg.experiments);
    }

    const AnalyzeRun run = run_analysis(experiments, o, cfg);

    nlohmann::ordered_json manifest;
    manifest["command"] = "analyze";
    manifest["input"] = input;
    manifest["input_fnv1a64"] = file_fingerprint(input);
    manifest["input_kind"] = counts_input ? "counts" : "tidy";
    manifest["columns"] = columns;
    manifest["config"] = config_json(o, cfg);
    write_run_outputs(run, o.out, formats, cfg, manifest);
    print_summary(run);
    return kExitOk;
}

// ---- simulate --------------------------------------------------------------

struct SimOptions {
    int n_stimuli = 160;
    int n_scores = 24;
    std::vector<double> psi_range{1.2, 4.8};
    std::vector<double> rho_range{0.5, 0.95};
    std::vector<std::string> contamination;
    int runs = 1;
    bool no_analyze = false;
};

SimConfig to_sim_config(const SimOptions& s, std::uint64_t seed) {
    SimConfig cfg;
    cfg.n_stimuli = s.n_stimuli;
    cfg.n_scores = s.n_scores;
    cfg.psi_range = {s.psi_range.at(0), s.psi_range.at(1)};
    cfg.rho_range = {s.rho_range.at(0), s.rho_range.at(1)};
    for (const std::string& item : s.contamination) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw CLI::ValidationError("--contaminate", "expected class:rate");
        cfg.contamination.emplace_back(atypical_class_from_string(item.substr(0, colon)),
                                       std::stod(item.substr(colon + 1)));
    }
    cfg.seed = seed;
    validate(cfg);
    return cfg;
}

int cmd_simulate(const SimOptions& s, const CommonOptions& o) {
    if (s.runs < 1) throw CLI::ValidationError("--runs", "must be positive");
    const AnalysisConfig cfg = to_analysis_config(o);
    const OutputOptions formats = parse_formats(o.format);
    to_sim_config(s, o.seed);  // validate before any work

    std::optional<ParamGrid> grid;
    std::optional<Estimator> estimator;
    if (!s.no_analyze) {
        grid.emplace(load_or_build_grid(o.grid_path));
        estimator.emplace(*grid, o.scan == "coarse" ? ScanMode::coarse_to_fine : ScanMode::full);
    }

    nlohmann::ordered_json summary;
    summary["runs"] = nlohmann::json::array();
    int consistent_runs = 0;
    long long tp = 0, fp = 0, fn = 0, tn = 0;

    for (int r = 0; r < s.runs; ++r) {
        const std::uint64_t run_seed = s.runs == 1 ? o.seed : substream_seed(o.seed, static_cast<std::uint64_t>(r));
        SimConfig sim_cfg = to_sim_config(s, run_seed);
        char run_name[32];
        std::snprintf(run_name, sizeof(run_name), "run_%03d", r + 1);
        sim_cfg.experiment_id = "sim";
        const SimulatedExperiment sim = generate_experiment(sim_cfg);

        const fs::path run_dir = fs::path(o.out) / run_name;
        fs::create_directories(run_dir);
        {
            std::ostringstream os;
            write_counts_csv(os, {sim.data});
            write_text(run_dir / "counts.csv", os.str());
        }
        {
            std::ostringstream os;
            write_labels_csv(os, sim.labels);
            write_text(run_dir / "labels.csv", os.str());
        }

        nlohmann::ordered_json run_json;
        run_json["run"] = r + 1;
        run_json["seed"] = run_seed;
        if (estimator) {
            AnalysisConfig run_cfg = cfg;
            run_cfg.gof.seed = run_seed;
            const ExperimentReport report = analyze_experiment(sim.data, *estimator, run_cfg);
            write_experiment_outputs(report, run_dir / "sim", formats, run_cfg);

            std::set<std::string> flagged(report.verdict.flagged.begin(), report.verdict.flagged.end());
            long long rtp = 0, rfp = 0, rfn = 0, rtn = 0;
            for (const StimulusLabel& l : sim.labels) {
                const bool f = flagged.count(l.stimulus_id) > 0;
                if (!l.typical) (f ? rtp : rfn)++;
                else (f ? rfp : rtn)++;
            }
            tp += rtp, fp += rfp, fn += rfn, tn += rtn;
            if (report.verdict.decision == Decision::consistent) ++consistent_runs;
            run_json["verdict"] = nlohmann::json::parse(verdict_json(report, run_cfg));
            run_json["confusion"] = {{"flagged_atypical", rtp}, {"flagged_typical", rfp},
                                     {"missed_atypical", rfn}, {"passed_typical", rtn}};
            std::cout << run_name << ": " << to_string(report.verdict.decision)
                      << "  flagged=" << report.verdict.flagged.size() << "  atypical_flagged=" << rtp << "/"
                      << (rtp + rfn) << '\n';
        }
        summary["runs"].push_back(run_json);
    }

    if (estimator) {
        summary["consistent_runs"] = consistent_runs;
        summary["consistent_rate"] = static_cast<double>(consistent_runs) / s.runs;
        summary["confusion"] = {{"flagged_atypical", tp}, {"flagged_typical", fp},
                                {"missed_atypical", fn}, {"passed_typical", tn}};
        std::cout << "consistent verdicts: " << consistent_runs << "/" << s.runs << '\n';
    }
    nlohmann::ordered_json manifest;
    manifest["command"] = "simulate";
    nlohmann::ordered_json sim_json;
    sim_json["n_stimuli"] = s.n_stimuli;
    sim_json["n_scores"] = s.n_scores;
    sim_json["psi_range"] = s.psi_range;
    sim_json["rho_range"] = s.rho_range;
    sim_json["contamination"] = s.contamination;
    sim_json["runs"] = s.runs;
    sim_json["analyze"] = !s.no_analyze;
    manifest["simulation"] = sim_json;
    manifest["config"] = config_json(o, cfg);
    if (grid) manifest["grid_checksum"] = hex64(grid->checksum());
    manifest["tool_version"] = kToolVersion;
    write_text(fs::path(o.out) / "summary.json", summary.dump(2) + "\n");
    write_text(fs::path(o.out) / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subjective experiment consistency check (GSD fit, bootstrapped G-test, p-value P-P plot)"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    CommonOptions grid_opts;
    auto* grid_cmd = app.add_subcommand("grid", "Build or verify the parameter grid cache");
    std::string grid_action;
    grid_cmd->add_option("action", grid_action, "build | verify")->required()->check(CLI::IsMember({"build", "verify"}));
    add_grid_option(*grid_cmd, grid_opts);
    grid_cmd->add_option("--seed", grid_opts.seed, "Seed choosing the cells re-derived by verify");

    CommonOptions analyze_opts;
    auto* analyze_cmd = app.add_subcommand("analyze", "Analyse a tidy score CSV (or a counts CSV)");
    std::string input;
    std::string columns;
    bool counts_input = false;
    bool strict = false;
    analyze_cmd->add_option("input", input, "Input CSV")->required();
    analyze_cmd->add_option("--columns", columns, "Column mapping, e.g. experiment=exp,stimulus=pvs,score=rating")
        ->envname("GSDCHECK_COLUMNS");
    analyze_cmd->add_flag("--counts", counts_input, "Input is a counts CSV (experiment_id,stimulus_id,n,k1..k5)");
    analyze_cmd->add_flag("--strict", strict, "Abort on the first malformed row");
    add_analysis_options(*analyze_cmd, analyze_opts);

    CommonOptions sim_opts;
    SimOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate synthetic experiments and optionally analyse them");
    sim_cmd->add_option("--n-stimuli", sim.n_stimuli)->capture_default_str();
    sim_cmd->add_option("--n-scores", sim.n_scores)->capture_default_str();
    sim_cmd->add_option("--psi-range", sim.psi_range)->expected(2)->delimiter(',')->capture_default_str();
    sim_cmd->add_option("--rho-range", sim.rho_range)->expected(2)->delimiter(',')->capture_default_str();
    sim_cmd->add_option("--contaminate", sim.contamination,
                        "class:rate, class in bimodal|random_answers|sudden_cutoff|hate_or_love (repeatable)");
    sim_cmd->add_option("--runs", sim.runs, "Independent runs (seeds derived from --seed)")->capture_default_str();
    sim_cmd->add_flag("--no-analyze", sim.no_analyze, "Only generate data");
    add_analysis_options(*sim_cmd, sim_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (grid_cmd->parsed()) return cmd_grid(grid_action, grid_opts);
        if (analyze_cmd->parsed()) return cmd_analyze(input, counts_input, columns, strict, analyze_opts);
        if (sim_cmd->parsed()) return cmd_simulate(sim, sim_opts);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
