#pragma once

#include <array>
#include <cstddef>
#include <functional>

#include "gsdcheck/grid.hpp"
#include "gsdcheck/gsd.hpp"
#include "gsdcheck/memo_cache.hpp"

template <>
struct std::hash<gsdcheck::ScoreCounts> {
    std::size_t operator()(const gsdcheck::ScoreCounts& c) const noexcept {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (int v : c.k) {
            h ^= static_cast<std::uint32_t>(v);
            h *= 0x100000001B3ULL;
            h ^= h >> 29;
        }
        return static_cast<std::size_t>(h);
    }
};

namespace gsdcheck {

struct FitResult {
    GridCell cell;
    GsdParams params{3.0, 1.0};
    double log_likelihood = 0.0;
    std::array<double, kCategories> expected_counts{};  // n * p_j at the fitted cell
};

/// Multinomial log-likelihood without the multinomial coefficient:
/// sum_j k_j log p_j, with 0 * log 0 = 0 and -inf when k_j > 0 but p_j = 0.
double log_likelihood(const ScoreCounts& counts, const ParamGrid& grid, GridCell cell);

enum class ScanMode {
    full,            // every cell; reference path
    coarse_to_fine,  // every 10th cell, then +/-10 cells around the coarse optimum
};

/// Grid maximum-likelihood estimate. Exact ties go to the smallest psi, then
/// the smallest rho.
FitResult fit_mle(const ScoreCounts& counts, const ParamGrid& grid, ScanMode mode = ScanMode::full);

/// fit_mle with a per-instance memo keyed by the exact counts vector. The
/// grid must outlive the estimator. Safe to share across threads.
class Estimator {
public:
    explicit Estimator(const ParamGrid& grid, ScanMode mode = ScanMode::full,
                       std::size_t cache_entries = std::size_t{1} << 20)
        : grid_(grid), mode_(mode), cache_(cache_entries) {}

    FitResult fit(const ScoreCounts& counts) const;

    const ParamGrid& grid() const noexcept { return grid_; }
    ScanMode mode() const noexcept { return mode_; }
    const MemoCache<ScoreCounts, FitResult>& cache() const noexcept { return cache_; }

private:
    const ParamGrid& grid_;
    ScanMode mode_;
    mutable MemoCache<ScoreCounts, FitResult> cache_;
};

}  // namespace gsdcheck
