#include "gsdcheck/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsdcheck {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct NonZero {
    int count = 0;
    std::array<int, kCategories> index{};
    std::array<double, kCategories> weight{};
};

NonZero nonzero_terms(const ScoreCounts& counts) {
    NonZero nz;
    for (int j = 0; j < kCategories; ++j) {
        if (counts.k[j] > 0) {
            nz.index[nz.count] = j;
            nz.weight[nz.count] = counts.k[j];
            ++nz.count;
        }
    }
    return nz;
}

inline double cell_log_likelihood(const NonZero& nz, const double* row) {
    double ll = 0.0;
    for (int t = 0; t < nz.count; ++t) ll += nz.weight[t] * row[nz.index[t]];
    return ll;
}

// Scans psi in [i0, i1] by step, rho in [j0, j1] by step, in (psi, rho)
// lexicographic order so that strict '>' keeps the smallest-index tie.
struct Best {
    int flat = -1;
    double ll = kNegInf;
};

void scan(const NonZero& nz, const ParamGrid& grid, int i0, int i1, int j0, int j1, int step, Best& best) {
    const double* base = grid.values().data();
    for (int i = i0; i <= i1; i += step) {
        for (int j = j0; j <= j1; j += step) {
            const int flat = i * ParamGrid::kRhoCount + j;
            const double ll = cell_log_likelihood(nz, base + static_cast<std::ptrdiff_t>(flat) * kCategories);
            if (best.flat < 0 || ll > best.ll || (ll == best.ll && flat < best.flat)) {
                best.ll = ll;
                best.flat = flat;
            }
        }
    }
}

FitResult make_result(const ScoreCounts& counts, const ParamGrid& grid, const Best& best) {
    FitResult r;
    r.cell = ParamGrid::cell_at(best.flat);
    r.params = ParamGrid::params_at(r.cell);
    r.log_likelihood = best.ll;
    const int n = counts.n();
    const auto lp = grid.log_pmf(r.cell);
    for (int j = 0; j < kCategories; ++j) r.expected_counts[j] = n * std::exp(lp[j]);
    return r;
}

}  // namespace

double log_likelihood(const ScoreCounts& counts, const ParamGrid& grid, GridCell cell) {
    const NonZero nz = nonzero_terms(counts);
    return cell_log_likelihood(nz, grid.log_pmf(cell).data());
}

FitResult fit_mle(const ScoreCounts& counts, const ParamGrid& grid, ScanMode mode) {
    validate_counts(counts);
    const NonZero nz = nonzero_terms(counts);
    constexpr int last_psi = ParamGrid::kPsiCount - 1;
    constexpr int last_rho = ParamGrid::kRhoCount - 1;

    Best best;
    if (mode == ScanMode::full) {
        scan(nz, grid, 0, last_psi, 0, last_rho, 1, best);
    } else {
        constexpr int step = 10;
        constexpr int radius = 10;
        Best coarse;
        scan(nz, grid, 0, last_psi, 0, last_rho, step, coarse);
        // The coarse lattice misses the top edge (rho = 1, psi = 4.99); include it.
        scan(nz, grid, 0, last_psi, last_rho, last_rho, step, coarse);
        scan(nz, grid, last_psi, last_psi, 0, last_rho, step, coarse);
        const GridCell c = ParamGrid::cell_at(coarse.flat);
        scan(nz, grid, std::max(0, c.psi_index - radius), std::min(last_psi, c.psi_index + radius),
             std::max(0, c.rho_index - radius), std::min(last_rho, c.rho_index + radius), 1, best);
    }
    return make_result(counts, grid, best);
}

FitResult Estimator::fit(const ScoreCounts& counts) const {
    validate_counts(counts);
    return cache_.get_or_compute(counts, [&] { return fit_mle(counts, grid_, mode_); });
}

}  // namespace gsdcheck
