#include "image_core.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace sheetrefine {

namespace {

void check_dims(int width, int height, const char* what) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::InvalidArgument, std::string(what) + ": dimensions must be >= 1, got " +
                                         std::to_string(width) + "x" + std::to_string(height));
  }
}

std::size_t area(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

void check_bins(int bin_count) {
  if (bin_count < kMinBins || bin_count > kMaxBins) {
    fail(ErrorCode::InvalidArgument, "bin count must be in [2, 256], got " +
                                         std::to_string(bin_count));
  }
}

}  // namespace

Image::Image(int width, int height, std::vector<Rgb> pixels, std::string source_id)
    : width_(width), height_(height), pixels_(std::move(pixels)), source_id_(std::move(source_id)) {
  check_dims(width, height, "image");
  if (pixels_.size() != area(width, height)) {
    fail(ErrorCode::InvalidArgument, "image: pixel buffer size does not match dimensions");
  }
}

Image::Image(int width, int height, Rgb fill, std::string source_id)
    : width_(width), height_(height), source_id_(std::move(source_id)) {
  check_dims(width, height, "image");
  pixels_.assign(area(width, height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> intensities)
    : width_(width), height_(height), intensities_(std::move(intensities)) {
  check_dims(width, height, "gray image");
  if (intensities_.size() != area(width, height)) {
    fail(ErrorCode::InvalidArgument, "gray image: buffer size does not match dimensions");
  }
}

BinnedImage::BinnedImage(int width, int height, int bin_count, std::vector<std::uint16_t> bins)
    : width_(width), height_(height), bin_count_(bin_count), bins_(std::move(bins)) {
  check_dims(width, height, "binned image");
  check_bins(bin_count);
  if (bins_.size() != area(width, height)) {
    fail(ErrorCode::InvalidArgument, "binned image: buffer size does not match dimensions");
  }
  for (auto b : bins_) {
    if (b >= bin_count) {
      fail(ErrorCode::InvalidArgument, "binned image: bin index " + std::to_string(b) +
                                           " out of range for " + std::to_string(bin_count) +
                                           " bins");
    }
  }
}

Histogram::Histogram(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {
  for (auto c : counts_) total_ += c;
}

JointHistogram::JointHistogram(int bin_count, std::vector<std::uint64_t> counts)
    : bin_count_(bin_count), counts_(std::move(counts)) {
  if (bin_count < 1 || counts_.size() != area(bin_count, bin_count)) {
    fail(ErrorCode::InvalidArgument, "joint histogram: expected a square table");
  }
  for (auto c : counts_) total_ += c;
}

Histogram JointHistogram::row_marginal() const {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(bin_count_), 0);
  for (int i = 0; i < bin_count_; ++i)
    for (int j = 0; j < bin_count_; ++j) out[static_cast<std::size_t>(i)] += at(i, j);
  return Histogram(std::move(out));
}

Histogram JointHistogram::column_marginal() const {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(bin_count_), 0);
  for (int i = 0; i < bin_count_; ++i)
    for (int j = 0; j < bin_count_; ++j) out[static_cast<std::size_t>(j)] += at(i, j);
  return Histogram(std::move(out));
}

std::uint8_t luma(const Rgb& px) noexcept {
  const double y = 0.299 * px.r + 0.587 * px.g + 0.114 * px.b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

GrayImage to_grayscale(const Image& img) {
  std::vector<std::uint8_t> out;
  out.reserve(img.pixels().size());
  for (const auto& px : img.pixels()) out.push_back(luma(px));
  return GrayImage(img.width(), img.height(), std::move(out));
}

GrayImage resize(const GrayImage& img, int width, int height) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::InvalidArgument, "resize: target dimensions must be >= 1, got " +
                                         std::to_string(width) + "x" + std::to_string(height));
  }
  if (width == img.width() && height == img.height()) return img;

  // Source coordinate of each destination column/row, precomputed once.
  struct Tap {
    int lo;
    int hi;
    double frac;
  };
  auto taps = [](int dst, int src) {
    std::vector<Tap> out(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / dst;
    for (int d = 0; d < dst; ++d) {
      double s = (d + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(src - 1));
      const int lo = static_cast<int>(std::floor(s));
      const int hi = std::min(lo + 1, src - 1);
      out[static_cast<std::size_t>(d)] = {lo, hi, s - lo};
    }
    return out;
  };
  const auto xs = taps(width, img.width());
  const auto ys = taps(height, img.height());

  std::vector<std::uint8_t> out(area(width, height));
  std::size_t k = 0;
  for (const auto& ty : ys) {
    for (const auto& tx : xs) {
      const double top = img.at(tx.lo, ty.lo) * (1.0 - tx.frac) + img.at(tx.hi, ty.lo) * tx.frac;
      const double bottom =
          img.at(tx.lo, ty.hi) * (1.0 - tx.frac) + img.at(tx.hi, ty.hi) * tx.frac;
      const double v = top * (1.0 - ty.frac) + bottom * ty.frac;
      out[k++] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return GrayImage(width, height, std::move(out));
}

BinnedImage quantize(const GrayImage& img, int bin_count) {
  check_bins(bin_count);
  std::vector<std::uint16_t> bins;
  bins.reserve(img.size());
  for (auto v : img.intensities()) {
    const int b = (static_cast<int>(v) * bin_count) / 256;
    bins.push_back(static_cast<std::uint16_t>(std::min(b, bin_count - 1)));
  }
  return BinnedImage(img.width(), img.height(), bin_count, std::move(bins));
}

Histogram histogram(const BinnedImage& img) {
  if (img.size() == 0) fail(ErrorCode::InvalidArgument, "histogram: empty image");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(img.bin_count()), 0);
  for (auto b : img.bins()) ++counts[b];
  return Histogram(std::move(counts));
}

JointHistogram joint_histogram(const BinnedImage& a, const BinnedImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    fail(ErrorCode::InvalidArgument,
         "joint histogram: dimension mismatch (" + std::to_string(a.width()) + "x" +
             std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
             std::to_string(b.height()) + ")");
  }
  if (a.bin_count() != b.bin_count()) {
    fail(ErrorCode::InvalidArgument, "joint histogram: bin-count mismatch (" +
                                         std::to_string(a.bin_count()) + " vs " +
                                         std::to_string(b.bin_count()) + ")");
  }
  const auto bins = static_cast<std::size_t>(a.bin_count());
  std::vector<std::uint64_t> counts(bins * bins, 0);
  const auto ab = a.bins();
  const auto bb = b.bins();
  for (std::size_t p = 0; p < ab.size(); ++p) ++counts[ab[p] * bins + bb[p]];
  return JointHistogram(a.bin_count(), std::move(counts));
}

}  // namespace sheetrefine
