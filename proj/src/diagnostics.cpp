#include "gsdcheck/diagnostics.hpp"

#include <algorithm>

namespace gsdcheck {

namespace {

constexpr double kMinorShare = 0.10;
constexpr double kMajorShare = 0.25;

bool is_bimodal(const ScoreCounts& c, int n) {
    const double floor = kMinorShare * n;
    for (int i = 0; i < kCategories; ++i) {
        if (c.k[i] <= floor) continue;
        for (int j = i + 2; j < kCategories; ++j) {
            if (c.k[j] <= floor) continue;
            const int dip = *std::min_element(c.k.begin() + i + 1, c.k.begin() + j);
            if (dip < c.k[i] && dip < c.k[j]) return true;
        }
    }
    return false;
}

bool has_random_answers(const ScoreCounts& c, int n) {
    const int peak = *std::max_element(c.k.begin(), c.k.end());
    int far = 0;
    for (int j = 0; j < kCategories; ++j) {
        int distance = kCategories;
        for (int m = 0; m < kCategories; ++m) {
            if (c.k[m] == peak) distance = std::min(distance, std::abs(j - m));
        }
        if (distance >= 2) far += c.k[j];
    }
    return far >= 1 && far <= kMinorShare * n;
}

bool has_sudden_cutoff(const ScoreCounts& c, int n) {
    int lo = 0, hi = kCategories - 1;
    while (lo < kCategories && c.k[lo] == 0) ++lo;
    while (hi >= 0 && c.k[hi] == 0) --hi;
    if (lo > hi || hi - lo + 1 < 3) return false;
    const double major = kMajorShare * n;
    // The zero category just outside the support must exist on the scale.
    return (lo > 0 && c.k[lo] >= major) || (hi < kCategories - 1 && c.k[hi] >= major);
}

}  // namespace

std::string_view to_string(ShapeTag tag) {
    switch (tag) {
        case ShapeTag::bimodal: return "bimodal";
        case ShapeTag::random_answers: return "random_answers";
        case ShapeTag::sudden_cutoff: return "sudden_cutoff";
    }
    return "unknown";
}

std::vector<ShapeTag> tag_stimulus(const ScoreCounts& counts) {
    validate_counts(counts);
    const int n = counts.n();
    std::vector<ShapeTag> tags;
    if (is_bimodal(counts, n)) tags.push_back(ShapeTag::bimodal);
    if (has_random_answers(counts, n)) tags.push_back(ShapeTag::random_answers);
    if (has_sudden_cutoff(counts, n)) tags.push_back(ShapeTag::sudden_cutoff);
    return tags;
}

std::string join_tags(const std::vector<ShapeTag>& tags) {
    std::string out;
    for (ShapeTag t : tags) {
        if (!out.empty()) out += ';';
        out += to_string(t);
    }
    return out;
}

std::vector<TaggedStimulus> tag_flagged_stimuli(const std::vector<std::pair<std::string, ScoreCounts>>& flagged) {
    std::vector<TaggedStimulus> out;
    out.reserve(flagged.size());
    for (const auto& [id, counts] : flagged) out.push_back({id, tag_stimulus(counts)});
    return out;
}

}  // namespace gsdcheck
