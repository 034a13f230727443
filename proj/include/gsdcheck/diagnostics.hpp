#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gsdcheck/gsd.hpp"

namespace gsdcheck {

enum class ShapeTag { bimodal, random_answers, sudden_cutoff };

std::string_view to_string(ShapeTag tag);

/// Heuristic shape tags for a score histogram. Advisory only; they never
/// feed back into the consistency verdict.
///
///  bimodal         two categories each holding more than 10% of n with a
///                  strictly lower category between them
///  random_answers  at least one score two or more categories away from
///                  every modal category, and at most 10% of n such scores
///  sudden_cutoff   the support spans at least three categories and ends
///                  with a zero-count category right next to a category
///                  holding at least 25% of n (nothing beyond the zero)
std::vector<ShapeTag> tag_stimulus(const ScoreCounts& counts);

std::string join_tags(const std::vector<ShapeTag>& tags);  // "bimodal;sudden_cutoff", "" for none

struct TaggedStimulus {
    std::string stimulus_id;
    std::vector<ShapeTag> tags;
};

std::vector<TaggedStimulus> tag_flagged_stimuli(const std::vector<std::pair<std::string, ScoreCounts>>& flagged);

}  // namespace gsdcheck
