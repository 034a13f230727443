#include "gsdcheck/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "gsdcheck/rng.hpp"

namespace gsdcheck {

namespace {

constexpr std::uint64_t kAssignmentStream = 0xA5516E3ULL;

double clip_psi(double psi) { return std::clamp(psi, 1.0, 5.0); }

}  // namespace

std::string_view to_string(AtypicalClass c) {
    switch (c) {
        case AtypicalClass::bimodal: return "bimodal";
        case AtypicalClass::random_answers: return "random_answers";
        case AtypicalClass::sudden_cutoff: return "sudden_cutoff";
        case AtypicalClass::hate_or_love: return "hate_or_love";
    }
    return "unknown";
}

AtypicalClass atypical_class_from_string(std::string_view name) {
    for (auto c : {AtypicalClass::bimodal, AtypicalClass::random_answers, AtypicalClass::sudden_cutoff,
                   AtypicalClass::hate_or_love}) {
        if (to_string(c) == name) return c;
    }
    throw std::invalid_argument("unknown atypical class '" + std::string(name) + "'");
}

Pmf5 contamination_pmf(AtypicalClass cls, double psi, const ContaminationShape& shape) {
    Pmf5 p{};
    switch (cls) {
        case AtypicalClass::bimodal: {
            const Pmf5 lo = gsd_pmf({clip_psi(psi - shape.bimodal_offset), shape.bimodal_rho});
            const Pmf5 hi = gsd_pmf({clip_psi(psi + shape.bimodal_offset), shape.bimodal_rho});
            for (int j = 0; j < kCategories; ++j) p[j] = 0.5 * lo[j] + 0.5 * hi[j];
            break;
        }
        case AtypicalClass::random_answers: {
            const Pmf5 base = gsd_pmf({psi, shape.random_rho});
            const double q = shape.random_replace_prob;
            for (int j = 0; j < kCategories; ++j) p[j] = (1.0 - q) * base[j] + q / kCategories;
            break;
        }
        case AtypicalClass::sudden_cutoff: {
            p = gsd_pmf({psi, shape.cutoff_rho});
            const int mode = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
            // Scale-interior categories are scores 2..4 (indices 1..3).
            int cut = -1;
            for (int j : {mode - 1, mode + 1}) {
                if (j < 1 || j > 3) continue;
                if (cut < 0 || p[j] < p[cut]) cut = j;
            }
            p[mode] += p[cut];
            p[cut] = 0.0;
            break;
        }
        case AtypicalClass::hate_or_love: {
            const Pmf5 base = gsd_pmf({psi, shape.hate_love_rho});
            const double h = shape.hate_love_share;
            for (int j = 0; j < kCategories; ++j) p[j] = (1.0 - h) * base[j];
            p[0] += 0.5 * h;
            p[4] += 0.5 * h;
            break;
        }
    }
    return p;
}

ScoreCounts contaminate(AtypicalClass cls, double psi, int n, std::uint64_t seed, const ContaminationShape& shape) {
    if (n < 1) throw std::invalid_argument("contaminate: n must be positive");
    const Pmf5 p = contamination_pmf(cls, psi, shape);
    const CategoricalSampler sampler(p);
    Rng rng(seed);
    ScoreCounts counts;
    sampler.draw_counts(rng, n, counts.k);
    return counts;
}

void validate(const SimConfig& config) {
    if (config.n_stimuli < 1) throw std::invalid_argument("n_stimuli must be positive");
    if (config.n_scores < 1) throw std::invalid_argument("n_scores must be positive");
    const auto& pr = config.psi_range;
    const auto& rr = config.rho_range;
    if (!(pr.lo >= 1.0 && pr.hi <= 5.0 && pr.lo <= pr.hi)) throw std::invalid_argument("psi_range must lie in [1, 5]");
    if (!(rr.lo > 0.0 && rr.hi <= 1.0 && rr.lo <= rr.hi)) throw std::invalid_argument("rho_range must lie in (0, 1]");
    double total = 0.0;
    for (const auto& [cls, rate] : config.contamination) {
        if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("contamination rate must lie in [0, 1]");
        total += rate;
    }
    if (total > 1.0 + 1e-12) throw std::invalid_argument("contamination rates sum above 1");
}

SimulatedExperiment generate_experiment(const SimConfig& config) {
    validate(config);
    const auto n = static_cast<std::size_t>(config.n_stimuli);

    // Class assignment: shuffle the indices once, then hand out consecutive blocks.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(substream_seed(config.seed ^ kAssignmentStream, 0));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    std::vector<std::optional<AtypicalClass>> assigned(n);
    std::size_t next = 0;
    for (const auto& [cls, rate] : config.contamination) {
        const auto quota = std::min(n - next, static_cast<std::size_t>(std::llround(rate * static_cast<double>(n))));
        for (std::size_t q = 0; q < quota; ++q) assigned[order[next++]] = cls;
    }

    SimulatedExperiment sim;
    sim.data.experiment_id = config.experiment_id;
    sim.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        char id[64];
        std::snprintf(id, sizeof(id), "%s_%04zu", config.experiment_id.c_str(), i + 1);
        Rng rng(substream_seed(config.seed, i));
        StimulusLabel label;
        label.stimulus_id = id;
        label.psi = rng.uniform(config.psi_range.lo, config.psi_range.hi);
        label.rho = rng.uniform(config.rho_range.lo, config.rho_range.hi);
        if (label.rho <= 0.0) label.rho = config.rho_range.hi;
        const std::uint64_t score_seed = rng.next();

        ScoreCounts counts;
        if (assigned[i]) {
            label.typical = false;
            label.cls = *assigned[i];
            counts = contaminate(label.cls, label.psi, config.n_scores, score_seed, config.shape);
        } else {
            counts = sample({label.psi, label.rho}, config.n_scores, score_seed);
        }
        sim.data.stimuli.emplace(label.stimulus_id, counts);
        sim.data.total_scores += static_cast<std::size_t>(counts.n());
        sim.labels.push_back(std::move(label));
    }
    return sim;
}

void write_labels_csv(std::ostream& os, const std::vector<StimulusLabel>& labels) {
    os << "stimulus_id,truth_class\n";
    for (const StimulusLabel& l : labels) os << csv_escape(l.stimulus_id) << ',' << l.truth_class() << '\n';
}

}  // namespace gsdcheck
