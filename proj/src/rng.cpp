#include "gsdcheck/rng.hpp"

#include <numeric>
#include <stdexcept>

namespace gsdcheck {

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

CategoricalSampler::CategoricalSampler(std::span<const double, 5> probabilities) {
    double total = 0.0;
    int last_positive = -1;
    for (int j = 0; j < 5; ++j) {
        if (!(probabilities[j] >= 0.0)) {
            throw std::invalid_argument("CategoricalSampler: negative or NaN probability");
        }
        total += probabilities[j];
        if (probabilities[j] > 0.0) last_positive = j;
    }
    if (last_positive < 0) throw std::invalid_argument("CategoricalSampler: all probabilities are zero");

    double running = 0.0;
    for (int j = 0; j < 5; ++j) {
        running += probabilities[j];
        cdf_[j] = running / total;
    }
    // Rounding must not leave a sliver of [0,1) for trailing zero-mass categories.
    for (int j = last_positive; j < 5; ++j) cdf_[j] = 1.0;
}

}  // namespace gsdcheck
