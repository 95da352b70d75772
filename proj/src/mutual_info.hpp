#pragma once

#include <cstddef>
#include <vector>

#include "image_core.hpp"

namespace sheetrefine {

// All information quantities are in bits.

// Preprocessing applied to every image before a pairwise comparison.
struct AnalysisConfig {
  int bins = 64;
  int resolution = 256;  // square side length
};

void validate(const AnalysisConfig& cfg);

// Symmetric n x n matrix of pairwise MI; the diagonal holds per-part entropy.
class MiMatrix {
 public:
  explicit MiMatrix(std::size_t size = 0) : size_(size), values_(size * size, 0.0) {}

  std::size_t size() const noexcept { return size_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * size_ + j]; }

  // Writes both (i, j) and (j, i).
  void set_pair(std::size_t i, std::size_t j, double v) {
    values_[i * size_ + j] = v;
    values_[j * size_ + i] = v;
  }

 private:
  std::size_t size_;
  std::vector<double> values_;
};

double entropy(const Histogram& h);
double joint_entropy(const JointHistogram& j);

// Uncertainty left in the column variable (second image) once the row
// variable (first image) is known: H(X,Y) - H(rows).
double conditional_entropy(const JointHistogram& j);

// H(X) + H(Y) - H(X,Y), clamped at zero within 1e-12. A more negative result
// raises ErrorCode::Internal.
double mutual_information(const JointHistogram& j);

// quantize(resize(to gray)) with the analysis config.
BinnedImage prepare(const GrayImage& img, const AnalysisConfig& cfg);

double mi_between_images(const GrayImage& a, const GrayImage& b, const AnalysisConfig& cfg);

// threads == 0 selects std::thread::hardware_concurrency(). Each pair is summed
// sequentially in a fixed order, so the result does not depend on threads.
MiMatrix pairwise_mi_matrix(const std::vector<GrayImage>& parts, const AnalysisConfig& cfg,
                            unsigned threads = 0);

}  // namespace sheetrefine
