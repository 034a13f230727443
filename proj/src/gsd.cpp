#include "gsdcheck/gsd.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gsdcheck/rng.hpp"

namespace gsdcheck {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::array<double, 5> kLogBinom4 = {0.0, 1.3862943611198906, 1.791759469228055,
                                              1.3862943611198906, 0.0};  // log C(4, k)

bool is_integral(double psi) { return psi == std::floor(psi); }

Pmf5 point_mass(double psi) {
    Pmf5 p{};
    p[static_cast<int>(psi) - 1] = 1.0;
    return p;
}

double switch_point(const VarianceBounds& vb) {
    return 0.75 * vb.v_max / (vb.v_max - vb.v_min);
}

// Shifted binomial(4, q) pmf.
Pmf5 binomial_pmf(double q) {
    Pmf5 p{};
    for (int k = 0; k < 5; ++k) {
        p[k] = std::exp(kLogBinom4[k]) * std::pow(q, k) * std::pow(1.0 - q, 4 - k);
    }
    return p;
}

Pmf5 mixture_pmf(double psi, double rho, double c) {
    const double w = (rho - c) / (1.0 - c);
    Pmf5 p = binomial_pmf((psi - 1.0) / 4.0);
    for (double& v : p) v *= (1.0 - w);
    const double lower = std::floor(psi);
    const double frac = psi - lower;
    const int lo = static_cast<int>(lower) - 1;
    p[lo] += w * (1.0 - frac);
    if (frac > 0.0) p[lo + 1] += w * frac;
    return p;
}

// log of C(4,k) * a^(k) * b^(4-k) / s^(4) with rising factorials x^(m).
Pmf5 beta_binomial_log_pmf(double psi, double rho, double c) {
    const double s = rho / (c - rho);
    const double a = s * (psi - 1.0) / 4.0;
    const double b = s - a;
    std::array<double, 5> log_rise_a{}, log_rise_b{};
    for (int m = 1; m < 5; ++m) {
        log_rise_a[m] = log_rise_a[m - 1] + std::log(a + m - 1);
        log_rise_b[m] = log_rise_b[m - 1] + std::log(b + m - 1);
    }
    const double log_den = std::log(s) + std::log(s + 1.0) + std::log(s + 2.0) + std::log(s + 3.0);
    Pmf5 lp{};
    for (int k = 0; k < 5; ++k) lp[k] = kLogBinom4[k] + log_rise_a[k] + log_rise_b[4 - k] - log_den;
    return lp;
}

}  // namespace

GsdParams::GsdParams(double psi, double rho) : psi_(psi), rho_(rho) {
    if (!(psi >= 1.0 && psi <= 5.0)) {
        throw std::domain_error("GsdParams: psi must lie in [1, 5], got " + std::to_string(psi));
    }
    if (!(rho > 0.0 && rho <= 1.0)) {
        throw std::domain_error("GsdParams: rho must lie in (0, 1], got " + std::to_string(rho));
    }
}

void validate_counts(const ScoreCounts& counts) {
    for (int v : counts.k) {
        if (v < 0) throw std::domain_error("score counts must be non-negative: " + to_string(counts));
    }
    if (counts.n() == 0) throw std::domain_error("score counts are empty");
}

std::string to_string(const ScoreCounts& counts) {
    std::ostringstream os;
    os << '[' << counts.k[0];
    for (int j = 1; j < 5; ++j) os << ", " << counts.k[j];
    os << ']';
    return os.str();
}

VarianceBounds variance_bounds(double psi) {
    if (!(psi >= 1.0 && psi <= 5.0)) {
        throw std::domain_error("variance_bounds: psi must lie in [1, 5]");
    }
    const double frac = psi - std::floor(psi);
    return {frac * (1.0 - frac), (psi - 1.0) * (5.0 - psi)};
}

Pmf5 gsd_pmf(const GsdParams& params) {
    const double psi = params.psi();
    const double rho = params.rho();
    if (psi == 1.0 || psi == 5.0) return point_mass(psi);
    if (rho == 1.0 && is_integral(psi)) return point_mass(psi);

    const double c = switch_point(variance_bounds(psi));
    if (rho >= c) return mixture_pmf(psi, rho, c);

    Pmf5 p = beta_binomial_log_pmf(psi, rho, c);
    for (double& v : p) v = std::exp(v);
    return p;
}

Pmf5 gsd_log_pmf(const GsdParams& params) {
    const double psi = params.psi();
    const double rho = params.rho();
    if (psi != 1.0 && psi != 5.0) {
        const double c = switch_point(variance_bounds(psi));
        if (rho < c) return beta_binomial_log_pmf(psi, rho, c);
    }
    Pmf5 p = gsd_pmf(params);
    for (double& v : p) v = v > 0.0 ? std::log(v) : kNegInf;
    return p;
}

Moments pmf_moments(const Pmf5& pmf) {
    double mean = 0.0, second = 0.0;
    for (int j = 0; j < 5; ++j) {
        mean += (j + 1) * pmf[j];
        second += (j + 1) * (j + 1) * pmf[j];
    }
    return {mean, second - mean * mean};
}

Moments gsd_moments(const GsdParams& params) { return pmf_moments(gsd_pmf(params)); }

ScoreCounts sample(const GsdParams& params, int n, std::uint64_t seed) {
    if (n < 1) throw std::domain_error("sample: n must be positive");
    const Pmf5 p = gsd_pmf(params);
    CategoricalSampler sampler(p);
    Rng rng(seed);
    ScoreCounts counts;
    sampler.draw_counts(rng, n, counts.k);
    return counts;
}

double mos(const ScoreCounts& counts) {
    const int n = counts.n();
    if (n <= 0) throw std::domain_error("mos: no scores");
    double total = 0.0;
    for (int j = 0; j < 5; ++j) total += (j + 1) * counts.k[j];
    return total / n;
}

}  // namespace gsdcheck
