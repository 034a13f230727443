// Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero when any criterion fails.
//
//   acceptance            run every criterion
//   acceptance 3 7        run only criteria 3 and 7
//
// Criterion 8 needs the published combined score CSV; point GSDCHECK_DATASET
// at it (see README for the optional id and column overrides).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gsdcheck/consistency.hpp"
#include "gsdcheck/diagnostics.hpp"
#include "gsdcheck/estimation.hpp"
#include "gsdcheck/gof.hpp"
#include "gsdcheck/ingest.hpp"
#include "gsdcheck/pipeline.hpp"
#include "gsdcheck/rng.hpp"
#include "gsdcheck/simulation.hpp"
#include "test_support.hpp"

using namespace gsdcheck;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

std::string fmt(const char* spec, double v) { return format_double(spec, v); }

const ParamGrid& grid() { return gsdcheck::testing::shared_grid(); }

const Estimator& estimator() {
    static const Estimator est(grid());
    return est;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---- 1 ---------------------------------------------------------------------

Outcome table_one() {
    const std::vector<std::pair<double, Pmf5>> rows{
        {0.95, {0.061, 0.795, 0.130, 0.013, 0.001}}, {0.88, {0.145, 0.647, 0.173, 0.032, 0.003}},
        {0.81, {0.230, 0.500, 0.215, 0.050, 0.005}}, {0.72, {0.317, 0.370, 0.222, 0.078, 0.013}},
        {0.61, {0.394, 0.285, 0.184, 0.100, 0.037}}, {0.38, {0.532, 0.153, 0.108, 0.096, 0.111}},
    };
    double worst = 0.0;
    for (const auto& [rho, expected] : rows) {
        const Pmf5 p = gsd_pmf({2.1, rho});
        for (int j = 0; j < 5; ++j) worst = std::max(worst, std::abs(p[j] - expected[j]));
    }
    return verdict(worst <= 0.0005, "6 rows at psi=2.1, max |diff| " + fmt("%.6f", worst) + " (tol 0.0005)");
}

// ---- 2 ---------------------------------------------------------------------

Outcome variance_bounds_check() {
    const VarianceBounds a = variance_bounds(1.5), b = variance_bounds(3.0);
    const bool exact = a.v_min == 0.25 && a.v_max == 1.75 && b.v_min == 0.0 && b.v_max == 4.0;
    Rng rng(2);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double psi = rng.uniform(1.0, 5.0);
        const auto [lo, hi] = gsdcheck::testing::two_point_variance_extremes(psi);
        const VarianceBounds v = variance_bounds(psi);
        worst = std::max({worst, std::abs(v.v_min - lo), std::abs(v.v_max - hi)});
    }
    return verdict(exact && worst <= 1e-9, std::string("exact values ") + (exact ? "ok" : "WRONG") +
                                               ", 50 random psi max |diff| vs two-point oracle " + fmt("%.3g", worst));
}

// ---- 3 ---------------------------------------------------------------------

Outcome variance_interpolation() {
    double worst = 0.0;
    for (int flat = 0; flat < ParamGrid::kCellCount; ++flat) {
        const GsdParams p = ParamGrid::params_at(ParamGrid::cell_at(flat));
        const VarianceBounds b = variance_bounds(p.psi());
        const double target = p.rho() * b.v_min + (1 - p.rho()) * b.v_max;
        worst = std::max(worst, std::abs(gsd_moments(p).variance - target));
    }
    return verdict(worst <= 1e-6, "159600 cells, max |var - interpolation| " + fmt("%.3g", worst) + " (tol 1e-6)");
}

// ---- 4 ---------------------------------------------------------------------

Outcome threshold() {
    const double f = threshold_line(0.2, 160, 1.64);
    const double f0 = threshold_line(0.0, 160, 1.64);
    return verdict(std::abs(f - 0.25186) <= 1e-5 && f0 == 0.0,
                   "f(0.2; 160, 1.64) = " + fmt("%.7f", f) + ", f(0) = " + fmt("%g", f0));
}

// ---- 5 ---------------------------------------------------------------------

Outcome recovery() {
    std::vector<double> dpsi, drho;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const ScoreCounts c = sample({2.5, 0.8}, 10000, substream_seed(5, s));
        const FitResult r = fit_mle(c, grid());
        dpsi.push_back(std::abs(r.params.psi() - 2.5));
        drho.push_back(std::abs(r.params.rho() - 0.8));
    }
    const double mp = median(dpsi), mr = median(drho);
    return verdict(mp <= 0.05 && mr <= 0.05,
                   "100 samples n=1e4 from GSD(2.5, 0.8): median |dpsi| " + fmt("%.4f", mp) + ", median |drho| " +
                       fmt("%.4f", mr));
}

// ---- 6 ---------------------------------------------------------------------

Outcome calibration_at(int iterations) {
    int consistent = 0, exceeded = 0;
    for (int run = 0; run < 20; ++run) {
        SimConfig sim;
        sim.seed = substream_seed(6, static_cast<std::uint64_t>(run));
        const SimulatedExperiment e = generate_experiment(sim);
        AnalysisConfig cfg;
        cfg.gof.bootstrap_iterations = iterations;
        cfg.gof.seed = sim.seed;
        cfg.workers = 0;
        const ExperimentReport report = analyze_experiment(e.data, estimator(), cfg);
        if (report.verdict.decision == Decision::consistent) ++consistent;

        // Independent exceedance scan over the P-P points in (0, 0.2].
        bool any = false;
        for (const PPPoint& p : report.ppplot.points) {
            if (p.alpha > 0.0 && p.alpha <= 0.2 && p.ecdf > threshold_line(p.alpha, 160, 1.64)) any = true;
        }
        if (any) ++exceeded;
    }
    return verdict(consistent >= 18 && exceeded <= 2, "T=" + std::to_string(iterations) + ": consistent " +
                                                          std::to_string(consistent) + "/20, exceedance in " +
                                                          std::to_string(exceeded) + "/20 runs");
}

Outcome calibration() {
    const Outcome smoke = calibration_at(1000);
    const Outcome full = calibration_at(10000);
    const bool ok = smoke.status == Status::pass && full.status == Status::pass;
    return verdict(ok, smoke.detail + "; " + full.detail);
}

// ---- 7 ---------------------------------------------------------------------

Outcome spot_checks() {
    struct Case {
        const char* id;
        ScoreCounts counts;
        double published;
        double tol;
    };
    const std::vector<Case> cases{
        {"[0,0,13,5,6]", {{0, 0, 13, 5, 6}}, 0.0014, 0.005},
        {"[0,11,3,0,2]", {{0, 11, 3, 0, 2}}, 0.0002, 0.003},
        {"[2,0,0,9,13]", {{2, 0, 0, 9, 13}}, 0.0021, 0.005},
    };
    bool ok = true;
    std::ostringstream detail;
    for (const Case& c : cases) {
        GofConfig cfg;
        cfg.bootstrap_iterations = 10000;
        cfg.seed = stimulus_seed(7, c.id);
        const double p = bootstrap_pvalue(c.counts, estimator(), cfg, 0).p_value;
        ok = ok && std::abs(p - c.published) <= c.tol;
        detail << c.id << " p=" << fmt("%.4f", p) << " (ref " << c.published << " +/- " << c.tol << ") ";
    }
    return verdict(ok, detail.str());
}

// ---- 8 ---------------------------------------------------------------------

std::map<std::string, std::string> dataset_ids() {
    std::map<std::string, std::string> ids{{"its4s2", "ITS4S2"},
                                           {"its4s_1", "ITS4S_1"},
                                           {"its4s_2", "ITS4S_2"},
                                           {"mm2_lab", "MM2_IRCCyN_lab"},
                                           {"hdtv1", "HDTV1"}};
    if (const char* spec = std::getenv("GSDCHECK_DATASET_IDS")) {
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq != std::string::npos) ids[item.substr(0, eq)] = item.substr(eq + 1);
        }
    }
    return ids;
}

Outcome full_dataset() {
    const char* path = std::getenv("GSDCHECK_DATASET");
    if (!path || !*path) return {Status::skip, "GSDCHECK_DATASET not set; published combined CSV not available"};

    const char* columns = std::getenv("GSDCHECK_DATASET_COLUMNS");
    const ParseResult parsed = parse_csv(std::filesystem::path(path), columns ? ColumnMap::parse(columns) : ColumnMap{});
    const AggregateResult agg = aggregate(parsed.records);

    int iterations = 10000;
    if (const char* t = std::getenv("GSDCHECK_DATASET_ITERS")) iterations = std::atoi(t);
    const double tol = iterations >= 10000 ? 0.01 : 0.02;

    const auto ids = dataset_ids();
    std::map<std::string, ExperimentReport> reports;
    for (const auto& [key, id] : ids) {
        const auto it = agg.experiments.find(id);
        if (it == agg.experiments.end()) {
            std::string known;
            for (const auto& [name, _] : agg.experiments) known += " " + name;
            return {Status::fail, "experiment '" + id + "' (" + key + ") not in dataset; available:" + known};
        }
        AnalysisConfig cfg;
        cfg.gof.bootstrap_iterations = iterations;
        cfg.gof.seed = 8;
        cfg.workers = 0;
        reports.emplace(key, analyze_experiment(it->second, estimator(), cfg));
    }

    const std::map<std::string, double> table{
        {"its4s2", 0.00263}, {"its4s_1", 0.02476}, {"its4s_2", 0.02320}, {"mm2_lab", 0.02634}};
    bool ok = parsed.records.size() == 98282;
    std::ostringstream detail;
    detail << "records " << parsed.records.size() << "; T=" << iterations << "; ";
    for (const auto& [key, ref] : table) {
        const ExperimentReport& r = reports.at(key);
        const double p = r.verdict.experiment_p_value;
        ok = ok && r.verdict.decision == Decision::inconsistent && std::abs(p - ref) <= tol;
        detail << key << " " << to_string(r.verdict.decision) << " p=" << fmt("%.5f", p) << " (ref " << ref << ") ";
    }
    ok = ok && reports.at("hdtv1").verdict.decision == Decision::consistent;
    detail << "hdtv1 " << to_string(reports.at("hdtv1").verdict.decision) << "; ";
    const std::size_t f1 = reports.at("its4s_2").verdict.flagged.size();
    const std::size_t f2 = reports.at("its4s2").verdict.flagged.size();
    ok = ok && std::abs(static_cast<long>(f1) - 54) <= 5 && std::abs(static_cast<long>(f2) - 328) <= 5;
    detail << "flagged its4s " << f1 << " (ref 54), its4s2 " << f2 << " (ref 328)";
    return verdict(ok, detail.str());
}

// ---- 9 ---------------------------------------------------------------------

std::string results_csv(const ExperimentData& data, const Estimator& est, unsigned workers) {
    AnalysisConfig cfg;
    cfg.gof.bootstrap_iterations = 1000;
    cfg.gof.seed = 9;
    cfg.workers = workers;
    const ExperimentReport report = analyze_experiment(data, est, cfg);
    std::ostringstream os;
    write_results_csv(os, report.results);
    os << verdict_json(report, cfg) << '\n' << render_csv(report.ppplot);
    return os.str();
}

Outcome determinism() {
    SimConfig sim;
    sim.seed = 9;
    sim.n_stimuli = 60;
    sim.contamination = {{AtypicalClass::bimodal, 0.2}};
    const ExperimentData data = generate_experiment(sim).data;

    const Estimator cold_a(grid()), cold_b(grid());
    const std::string one = results_csv(data, cold_a, 1);
    const std::string again = results_csv(data, cold_b, 1);
    const std::string many = results_csv(data, Estimator(grid()), 8);
    const std::string warm = results_csv(data, cold_a, 3);
    const bool ok = one == again && one == many && one == warm;
    return verdict(ok, "60 stimuli, T=1000: two runs " + std::string(one == again ? "identical" : "DIFFER") +
                           ", 1 vs 8 workers " + (one == many ? "identical" : "DIFFER") + ", warm cache " +
                           (one == warm ? "identical" : "DIFFER"));
}

// ---- 10 --------------------------------------------------------------------

Outcome diagnostics() {
    const std::vector<std::pair<ScoreCounts, std::string>> cases{
        {{{9, 0, 10, 5, 0}}, "bimodal"},
        {{{1, 11, 11, 0, 1}}, "random_answers"},
        {{{3, 7, 14, 0, 0}}, "sudden_cutoff"},
        {{{0, 12, 12, 0, 0}}, ""},
    };
    bool ok = true;
    std::ostringstream detail;
    for (const auto& [counts, expected] : cases) {
        const std::string got = join_tags(tag_stimulus(counts));
        ok = ok && got == expected;
        detail << to_string(counts) << " -> " << (got.empty() ? "none" : got) << "  ";
    }
    return verdict(ok, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"reference PMF rows", table_one},
        {"variance bounds", variance_bounds_check},
        {"variance interpolation", variance_interpolation},
        {"threshold line", threshold},
        {"estimator recovery", recovery},
        {"calibration under the null", calibration},
        {"bootstrap p-value spot checks", spot_checks},
        {"full-dataset integration", full_dataset},
        {"determinism", determinism},
        {"shape diagnostics", diagnostics},
    };

    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(number)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
        if (o.status == Status::fail) ++failures;
        std::printf("[%s] %2d %s: %s [%.1fs]\n", tag, number, criteria[i].first.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
