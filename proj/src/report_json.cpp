#include "report_json.hpp"

namespace sheetrefine {

nlohmann::json to_json(const RefineReport& report) {
  using nlohmann::json;
  json rounds = json::array();
  for (const auto& r : report.round_details) {
    rounds.push_back({{"active", r.active},
                      {"scores", r.scores},
                      {"mean", r.mean},
                      {"stddev", r.stddev},
                      {"threshold", r.threshold},
                      {"removed", r.removed}});
  }
  json matrix = json::array();
  for (std::size_t i = 0; i < report.mi.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < report.mi.size(); ++j) row.push_back(report.mi.at(i, j));
    matrix.push_back(std::move(row));
  }
  const auto& cfg = report.config;
  return {{"scores", report.scores},
          {"mean", report.mean},
          {"stddev", report.stddev},
          {"threshold", report.threshold},
          {"kept", report.kept},
          {"removed", report.removed},
          {"rounds", report.rounds()},
          {"round_details", std::move(rounds)},
          {"mi_matrix", std::move(matrix)},
          {"config",
           {{"strictness", cfg.strictness},
            {"include_self_pairs", cfg.include_self_pairs},
            {"iterative", cfg.iterative},
            {"min_kept", cfg.min_kept},
            {"bins", cfg.analysis.bins},
            {"resolution", cfg.analysis.resolution}}}};
}

nlohmann::json to_json(const EvalReport& report) {
  return {{"prompt_similarity", report.prompt_similarity},
          {"identity_consistency", report.identity_consistency},
          {"n_images", report.n_images},
          {"n_pairs", report.n_pairs}};
}

}  // namespace sheetrefine
