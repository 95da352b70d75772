#include "refine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace sheetrefine {

void validate(const RefineConfig& cfg) {
  if (!(cfg.strictness >= 0.0) || !std::isfinite(cfg.strictness)) {
    fail(ErrorCode::InvalidArgument, "strictness must be a finite value >= 0");
  }
  if (cfg.min_kept < 2) {
    fail(ErrorCode::InvalidArgument, "min_kept must be >= 2, got " + std::to_string(cfg.min_kept));
  }
  validate(cfg.analysis);
}

std::vector<double> consistency_scores(const MiMatrix& m, bool include_self) {
  const std::size_t n = m.size();
  if (n < 2) fail(ErrorCode::InvalidArgument, "consistency scores need a matrix of at least 2x2");
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i && !include_self) continue;
      sum += m.at(i, j);
    }
    scores[i] = sum / static_cast<double>(include_self ? n : n - 1);
  }
  return scores;
}

ScoreStats threshold_stats(std::span<const double> scores) {
  if (scores.size() < 2) {
    fail(ErrorCode::InvalidArgument, "threshold stats need at least 2 scores, got " +
                                         std::to_string(scores.size()));
  }
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  return {mean, std::sqrt(ss / n)};
}

std::vector<bool> filter_outliers(std::span<const double> scores, double strictness) {
  if (!(strictness >= 0.0)) fail(ErrorCode::InvalidArgument, "strictness must be >= 0");
  const auto stats = threshold_stats(scores);
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double threshold = stats.mean - strictness * stats.stddev;
  std::vector<bool> keep(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    keep[i] = *lo == *hi || scores[i] == *hi || scores[i] >= threshold;
  }
  return keep;
}

namespace {

std::vector<double> sub_scores(const MiMatrix& m, const std::vector<std::size_t>& active,
                               bool include_self) {
  MiMatrix sub(active.size());
  for (std::size_t a = 0; a < active.size(); ++a)
    for (std::size_t b = a; b < active.size(); ++b) sub.set_pair(a, b, m.at(active[a], active[b]));
  return consistency_scores(sub, include_self);
}

}  // namespace

RefineReport refine_matrix(const MiMatrix& m, const RefineConfig& cfg) {
  validate(cfg);
  if (m.size() < 2) {
    fail(ErrorCode::InvalidArgument, "refinement needs at least 2 parts, got " + std::to_string(m.size()));
  }
  const auto min_kept = static_cast<std::size_t>(cfg.min_kept);

  RefineReport report;
  report.mi = m;
  report.config = cfg;
  std::vector<std::size_t> active(m.size());
  std::iota(active.begin(), active.end(), 0);

  while (true) {
    RefineRound round;
    round.active = active;
    round.scores = sub_scores(m, active, cfg.include_self_pairs);
    const auto stats = threshold_stats(round.scores);
    round.mean = stats.mean;
    round.stddev = stats.stddev;
    round.threshold = stats.mean - cfg.strictness * stats.stddev;
    const auto keep = filter_outliers(round.scores, cfg.strictness);

    // Positions (into `active`) that failed, lowest score first; on ties the
    // higher index goes first so the lower index survives the floor.
    std::vector<std::size_t> failing;
    for (std::size_t a = 0; a < active.size(); ++a)
      if (!keep[a]) failing.push_back(a);
    std::stable_sort(failing.begin(), failing.end(), [&](std::size_t x, std::size_t y) {
      if (round.scores[x] != round.scores[y]) return round.scores[x] < round.scores[y];
      return active[x] > active[y];
    });
    const std::size_t budget = active.size() > min_kept ? active.size() - min_kept : 0;
    if (failing.size() > budget) failing.resize(budget);

    std::vector<bool> drop(active.size(), false);
    for (auto a : failing) {
      drop[a] = true;
      round.removed.push_back(active[a]);
    }
    std::sort(round.removed.begin(), round.removed.end());

    std::vector<std::size_t> next;
    for (std::size_t a = 0; a < active.size(); ++a)
      if (!drop[a]) next.push_back(active[a]);

    const bool removed_any = !round.removed.empty();
    report.removed.insert(report.removed.end(), round.removed.begin(), round.removed.end());
    report.round_details.push_back(std::move(round));
    active = std::move(next);

    if (!removed_any || !cfg.iterative || active.size() <= min_kept) break;
  }

  const auto& first = report.round_details.front();
  report.scores = first.scores;
  report.mean = first.mean;
  report.stddev = first.stddev;
  report.threshold = first.threshold;
  report.kept = active;
  return report;
}

RefineReport refine_set(const std::vector<GrayImage>& parts, const RefineConfig& cfg,
                        unsigned threads) {
  validate(cfg);
  if (parts.size() < 2) {
    fail(ErrorCode::InvalidArgument, "refinement needs at least 2 parts, got " + std::to_string(parts.size()));
  }
  return refine_matrix(pairwise_mi_matrix(parts, cfg.analysis, threads), cfg);
}

}  // namespace sheetrefine
