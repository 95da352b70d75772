#include "mutual_info.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <utility>

#include "error.hpp"

namespace sheetrefine {

namespace {

constexpr double kNegativeSlack = 1e-12;

// -sum p log2 p over cells in storage order, skipping empty cells.
double entropy_of_counts(std::span<const std::uint64_t> counts, std::uint64_t total) {
  if (total == 0) fail(ErrorCode::InvalidArgument, "entropy: empty histogram");
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

void validate(const AnalysisConfig& cfg) {
  if (cfg.bins < kMinBins || cfg.bins > kMaxBins) {
    fail(ErrorCode::InvalidArgument,
         "bins must be in [2, 256], got " + std::to_string(cfg.bins));
  }
  if (cfg.resolution < 1) {
    fail(ErrorCode::InvalidArgument,
         "resolution must be >= 1, got " + std::to_string(cfg.resolution));
  }
}

double entropy(const Histogram& h) { return entropy_of_counts(h.counts(), h.total()); }

double joint_entropy(const JointHistogram& j) { return entropy_of_counts(j.counts(), j.total()); }

double conditional_entropy(const JointHistogram& j) {
  return joint_entropy(j) - entropy(j.row_marginal());
}

double mutual_information(const JointHistogram& j) {
  const double hx = entropy(j.row_marginal());
  const double hy = entropy(j.column_marginal());
  const double hxy = joint_entropy(j);
  const double mi = hx + hy - hxy;
  if (mi < 0.0) {
    if (mi < -kNegativeSlack) {
      fail(ErrorCode::Internal, "mutual information is negative beyond tolerance: " +
                                    std::to_string(mi));
    }
    return 0.0;
  }
  return mi;
}

BinnedImage prepare(const GrayImage& img, const AnalysisConfig& cfg) {
  validate(cfg);
  return quantize(resize(img, cfg.resolution, cfg.resolution), cfg.bins);
}

double mi_between_images(const GrayImage& a, const GrayImage& b, const AnalysisConfig& cfg) {
  return mutual_information(joint_histogram(prepare(a, cfg), prepare(b, cfg)));
}

MiMatrix pairwise_mi_matrix(const std::vector<GrayImage>& parts, const AnalysisConfig& cfg,
                            unsigned threads) {
  if (parts.size() < 2) {
    fail(ErrorCode::InvalidArgument,
         "pairwise MI needs at least 2 parts, got " + std::to_string(parts.size()));
  }
  validate(cfg);

  std::vector<BinnedImage> prepared;
  prepared.reserve(parts.size());
  for (const auto& p : parts) prepared.push_back(prepare(p, cfg));

  // Upper triangle including the diagonal; the diagonal pair (i, i) yields H(V_i).
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = i; j < parts.size(); ++j) pairs.emplace_back(i, j);

  std::vector<double> results(pairs.size(), 0.0);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, pairs.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (std::size_t k = next++; k < pairs.size() && !failed; k = next++) {
        const auto [i, j] = pairs[k];
        results[k] = mutual_information(joint_histogram(prepared[i], prepared[j]));
      }
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  MiMatrix m(parts.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) m.set_pair(pairs[k].first, pairs[k].second, results[k]);
  return m;
}

}  // namespace sheetrefine
