#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mutual_info.hpp"

namespace sheetrefine {

struct RefineConfig {
  double strictness = 1.0;  // k in the mu - k * sigma threshold
  bool include_self_pairs = false;
  bool iterative = false;
  int min_kept = 2;
  AnalysisConfig analysis{};
};

void validate(const RefineConfig& cfg);

struct ScoreStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// One filter pass over the parts still active at its start.
struct RefineRound {
  std::vector<std::size_t> active;
  std::vector<double> scores;  // parallel to `active`
  double mean = 0.0;
  double stddev = 0.0;
  double threshold = 0.0;
  std::vector<std::size_t> removed;
};

struct RefineReport {
  // First-round values over the full set; `scores[i]` belongs to part i.
  std::vector<double> scores;
  double mean = 0.0;
  double stddev = 0.0;
  double threshold = 0.0;

  std::vector<std::size_t> kept;
  std::vector<std::size_t> removed;  // in removal order
  std::vector<RefineRound> round_details;
  MiMatrix mi;
  RefineConfig config;

  std::size_t rounds() const noexcept { return round_details.size(); }
};

// Average pairwise MI of each part. Without self pairs the diagonal is skipped
// and the sum is divided by n - 1; with them, all n entries are averaged.
std::vector<double> consistency_scores(const MiMatrix& m, bool include_self);

ScoreStats threshold_stats(std::span<const double> scores);

// keep[i] = scores[i] >= mean - k * stddev. When every score is equal, or for
// the arg-max, the flag is set regardless of rounding in the mean.
std::vector<bool> filter_outliers(std::span<const double> scores, double strictness);

RefineReport refine_matrix(const MiMatrix& m, const RefineConfig& cfg);

RefineReport refine_set(const std::vector<GrayImage>& parts, const RefineConfig& cfg,
                        unsigned threads = 0);

}  // namespace sheetrefine
