#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace gsdcheck {

inline constexpr int kCategories = 5;

/// Parameters of the Generalized Score Distribution.
///
/// `psi` is the true quality and equals the distribution mean; `rho` controls
/// spread, with rho = 1 giving the minimum variance a five-point distribution
/// with mean psi can have and rho -> 0 approaching the maximum. The endpoints
/// psi = 1 and psi = 5 are accepted and yield point masses.
class GsdParams {
public:
    /// Throws std::domain_error unless 1 <= psi <= 5 and 0 < rho <= 1.
    GsdParams(double psi, double rho);

    double psi() const noexcept { return psi_; }
    double rho() const noexcept { return rho_; }

    friend bool operator==(const GsdParams&, const GsdParams&) = default;

private:
    double psi_;
    double rho_;
};

/// Probabilities of scores 1..5 (index 0 holds score 1).
using Pmf5 = std::array<double, kCategories>;

/// Histogram of scores 1..5 for one stimulus.
struct ScoreCounts {
    std::array<int, kCategories> k{};

    int n() const noexcept { return k[0] + k[1] + k[2] + k[3] + k[4]; }

    friend bool operator==(const ScoreCounts&, const ScoreCounts&) = default;
    friend auto operator<=>(const ScoreCounts&, const ScoreCounts&) = default;
};

/// Throws std::domain_error on negative entries or when n == 0.
void validate_counts(const ScoreCounts& counts);

std::string to_string(const ScoreCounts& counts);  // "[k1, k2, k3, k4, k5]"

struct VarianceBounds {
    double v_min;
    double v_max;
};

/// Minimum and maximum variance of a five-point distribution with mean psi.
/// The minimum puts all mass on floor(psi) and floor(psi)+1, the maximum on
/// scores 1 and 5. Throws std::domain_error outside [1, 5].
VarianceBounds variance_bounds(double psi);

/// GSD probability mass function.
///
/// With C(psi) = 3 V_max / (4 (V_max - V_min)), i.e. the rho at which the
/// shifted Binomial(4, (psi-1)/4) sits on the variance line:
///  - rho >= C: mixture of the minimum-variance distribution (weight
///    (rho - C) / (1 - C)) and that binomial;
///  - rho <  C: shifted beta-binomial(4, a, b) with a + b = rho / (C - rho)
///    and mean psi.
/// Both branches have mean psi and variance rho V_min + (1 - rho) V_max.
Pmf5 gsd_pmf(const GsdParams& params);

/// Natural log of gsd_pmf; -inf for impossible scores. The beta-binomial
/// branch is evaluated directly in log space.
Pmf5 gsd_log_pmf(const GsdParams& params);

struct Moments {
    double mean;
    double variance;
};

Moments gsd_moments(const GsdParams& params);
Moments pmf_moments(const Pmf5& pmf);

/// n independent draws from gsd_pmf(params), deterministic in seed.
ScoreCounts sample(const GsdParams& params, int n, std::uint64_t seed);

/// Mean opinion score: sum j * k_j / n. Throws std::domain_error when n == 0.
double mos(const ScoreCounts& counts);

}  // namespace gsdcheck
