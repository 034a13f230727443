#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "gsdcheck/consistency.hpp"
#include "gsdcheck/diagnostics.hpp"
#include "gsdcheck/gof.hpp"
#include "gsdcheck/pipeline.hpp"
#include "gsdcheck/simulation.hpp"

namespace py = pybind11;
using namespace gsdcheck;

namespace {

ScoreCounts to_counts(const std::array<int, 5>& k) { return ScoreCounts{k}; }

// Owns the grid so the estimator's reference stays valid from Python.
class PyEstimator {
public:
    explicit PyEstimator(std::shared_ptr<const ParamGrid> grid, bool coarse)
        : grid_(std::move(grid)), estimator_(*grid_, coarse ? ScanMode::coarse_to_fine : ScanMode::full) {}

    const Estimator& get() const { return estimator_; }
    std::size_t cache_size() const { return estimator_.cache().size(); }

private:
    std::shared_ptr<const ParamGrid> grid_;
    Estimator estimator_;
};

py::dict result_dict(const StimulusResult& r) {
    py::dict d;
    d["stimulus_id"] = r.stimulus_id;
    d["counts"] = r.counts.k;
    d["psi_hat"] = r.fit.params.psi();
    d["rho_hat"] = r.fit.params.rho();
    d["log_likelihood"] = r.fit.log_likelihood;
    d["expected_counts"] = r.fit.expected_counts;
    d["g_statistic"] = r.g_statistic;
    d["p_value"] = r.p_value;
    return d;
}

GofConfig make_config(int iterations, std::uint64_t seed, bool plus_one) {
    GofConfig cfg;
    cfg.bootstrap_iterations = iterations;
    cfg.seed = seed;
    cfg.pvalue_convention = plus_one ? PValueConvention::plus_one_smoothing : PValueConvention::count_over_t;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_gsdcheck, m) {
    m.doc() = "Subjective experiment consistency check: GSD model, bootstrapped G-test, p-value P-P plot";
    m.attr("__version__") = kToolVersion;

    py::register_exception<GridFileError>(m, "GridFileError");
    py::register_exception<CsvError>(m, "CsvError");

    m.def("gsd_pmf", [](double psi, double rho) { return gsd_pmf({psi, rho}); }, py::arg("psi"), py::arg("rho"));
    m.def("gsd_log_pmf", [](double psi, double rho) { return gsd_log_pmf({psi, rho}); }, py::arg("psi"),
          py::arg("rho"));
    m.def("variance_bounds", [](double psi) {
        const auto vb = variance_bounds(psi);
        return py::make_tuple(vb.v_min, vb.v_max);
    });
    m.def("gsd_moments", [](double psi, double rho) {
        const auto mo = gsd_moments({psi, rho});
        return py::make_tuple(mo.mean, mo.variance);
    });
    m.def("sample", [](double psi, double rho, int n, std::uint64_t seed) { return sample({psi, rho}, n, seed).k; },
          py::arg("psi"), py::arg("rho"), py::arg("n"), py::arg("seed"));
    m.def("mos", [](const std::array<int, 5>& k) { return mos(to_counts(k)); });

    py::class_<ParamGrid, std::shared_ptr<ParamGrid>>(m, "ParamGrid")
        .def_static("build", [] { return std::make_shared<ParamGrid>(ParamGrid::build()); })
        .def_static("load", [](const std::filesystem::path& p) { return std::make_shared<ParamGrid>(load_grid(p)); })
        .def("save", [](const ParamGrid& g, const std::filesystem::path& p) { save_grid(g, p); })
        .def("checksum", &ParamGrid::checksum)
        .def("pmf", [](const ParamGrid& g, double psi, double rho) { return g.pmf(ParamGrid::nearest(psi, rho)); })
        .def_property_readonly_static("shape", [](py::object) {
            return py::make_tuple(ParamGrid::kPsiCount, ParamGrid::kRhoCount, kCategories);
        });

    py::class_<PyEstimator>(m, "Estimator")
        .def(py::init<std::shared_ptr<const ParamGrid>, bool>(), py::arg("grid"), py::arg("coarse") = false)
        .def("fit",
             [](const PyEstimator& e, const std::array<int, 5>& k) {
                 const FitResult r = e.get().fit(to_counts(k));
                 return py::make_tuple(r.params.psi(), r.params.rho(), r.log_likelihood, r.expected_counts);
             })
        .def_property_readonly("cache_size", &PyEstimator::cache_size);

    m.def("g_statistic", [](const std::array<int, 5>& k, const std::array<double, 5>& expected) {
        return g_statistic(to_counts(k), expected);
    });

    m.def(
        "bootstrap_pvalue",
        [](const PyEstimator& e, const std::array<int, 5>& k, int iterations, std::uint64_t seed, bool plus_one,
           unsigned workers) {
            StimulusResult r;
            {
                py::gil_scoped_release release;
                r = bootstrap_pvalue(to_counts(k), e.get(), make_config(iterations, seed, plus_one), workers);
            }
            return result_dict(r);
        },
        py::arg("estimator"), py::arg("counts"), py::arg("iterations") = 10000, py::arg("seed") = 0,
        py::arg("plus_one") = false, py::arg("workers") = 1);

    m.def(
        "batch_gof",
        [](const PyEstimator& e, const std::vector<std::pair<std::string, std::array<int, 5>>>& items, int iterations,
           std::uint64_t seed, unsigned workers) {
            std::vector<BatchItem> batch;
            for (const auto& [id, k] : items) batch.push_back({id, to_counts(k)});
            std::vector<BatchOutcome> out;
            {
                py::gil_scoped_release release;
                out = batch_gof(batch, e.get(), make_config(iterations, seed, false), workers);
            }
            py::list rows;
            for (const BatchOutcome& o : out) {
                if (o.ok()) {
                    rows.append(result_dict(*o.result));
                } else {
                    py::dict d;
                    d["stimulus_id"] = o.stimulus_id;
                    d["error"] = o.error;
                    rows.append(d);
                }
            }
            return rows;
        },
        py::arg("estimator"), py::arg("items"), py::arg("iterations") = 10000, py::arg("seed") = 0,
        py::arg("workers") = 1);

    m.def("ecdf", [](const std::vector<double>& p, double alpha) { return ecdf(PValueSeries::from_values(p), alpha); });
    m.def("threshold_line", py::overload_cast<double, std::size_t, double>(&threshold_line), py::arg("alpha"),
          py::arg("n"), py::arg("z") = 1.64);
    m.def(
        "experiment_test",
        [](const std::vector<double>& p, double alpha, bool binomial) {
            return experiment_test(PValueSeries::from_values(p), alpha,
                                   binomial ? ProportionTest::exact_binomial : ProportionTest::normal);
        },
        py::arg("p_values"), py::arg("alpha") = 0.2, py::arg("binomial") = false);

    m.def(
        "classify_experiment",
        [](const std::vector<std::pair<std::string, double>>& entries, double beta, double alpha_cap, bool z_exact) {
            VerdictConfig cfg;
            cfg.beta = beta;
            cfg.alpha_cap = alpha_cap;
            cfg.z_mode = z_exact ? ZMode::exact : ZMode::two_decimal;
            const ConsistencyVerdict v = classify_experiment(PValueSeries(entries), cfg);
            py::dict d;
            d["decision"] = to_string(v.decision);
            d["crossing_alpha"] = v.crossing_alpha ? py::cast(*v.crossing_alpha) : py::none();
            d["flagged"] = v.flagged;
            d["experiment_p_value"] = v.experiment_p_value;
            d["alpha_used"] = v.alpha_used;
            return d;
        },
        py::arg("entries"), py::arg("beta") = 0.05, py::arg("alpha_cap") = 0.2, py::arg("z_exact") = false);

    m.def(
        "ppplot_svg",
        [](const std::vector<double>& p, double beta) { return render_svg(build_ppplot(PValueSeries::from_values(p), beta)); },
        py::arg("p_values"), py::arg("beta") = 0.05);

    m.def("tag_stimulus", [](const std::array<int, 5>& k) {
        std::vector<std::string> out;
        for (ShapeTag t : tag_stimulus(to_counts(k))) out.emplace_back(to_string(t));
        return out;
    });

    m.def(
        "contaminate",
        [](const std::string& cls, double psi, int n, std::uint64_t seed) {
            return contaminate(atypical_class_from_string(cls), psi, n, seed).k;
        },
        py::arg("cls"), py::arg("psi"), py::arg("n"), py::arg("seed"));
}
