#pragma once

#include <json.hpp>

#include "eval_metrics.hpp"
#include "refine.hpp"

namespace sheetrefine {

// Keys: scores, mean, stddev, threshold, kept, removed, rounds,
// round_details, mi_matrix, config.
nlohmann::json to_json(const RefineReport& report);

// Keys: prompt_similarity, identity_consistency, n_images, n_pairs.
nlohmann::json to_json(const EvalReport& report);

}  // namespace sheetrefine
