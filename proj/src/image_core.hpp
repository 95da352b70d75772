#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sheetrefine {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major RGB raster, 8 bits per channel.
class Image {
 public:
  Image(int width, int height, std::vector<Rgb> pixels, std::string source_id = {});
  Image(int width, int height, Rgb fill = {}, std::string source_id = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::string& source_id() const noexcept { return source_id_; }
  void set_source_id(std::string id) { source_id_ = std::move(id); }

  std::span<const Rgb> pixels() const noexcept { return pixels_; }
  std::span<Rgb> pixels() noexcept { return pixels_; }

  const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }
  Rgb& at(int x, int y) { return pixels_[index(x, y)]; }

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<Rgb> pixels_;
  std::string source_id_;
};

// Single-channel intensity raster, values in [0, 255].
class GrayImage {
 public:
  GrayImage(int width, int height, std::vector<std::uint8_t> intensities);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return intensities_.size(); }
  std::span<const std::uint8_t> intensities() const noexcept { return intensities_; }

  std::uint8_t at(int x, int y) const {
    return intensities_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                        static_cast<std::size_t>(x)];
  }

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> intensities_;
};

// Per-pixel bin indices in [0, bin_count).
class BinnedImage {
 public:
  BinnedImage(int width, int height, int bin_count, std::vector<std::uint16_t> bins);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int bin_count() const noexcept { return bin_count_; }
  std::size_t size() const noexcept { return bins_.size(); }
  std::span<const std::uint16_t> bins() const noexcept { return bins_; }

 private:
  int width_;
  int height_;
  int bin_count_;
  std::vector<std::uint16_t> bins_;
};

class Histogram {
 public:
  explicit Histogram(std::vector<std::uint64_t> counts);

  int bin_count() const noexcept { return static_cast<int>(counts_.size()); }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// B x B table; cell (i, j) counts positions where the first image has bin i
// and the second has bin j. Stored row-major.
class JointHistogram {
 public:
  JointHistogram(int bin_count, std::vector<std::uint64_t> counts);

  int bin_count() const noexcept { return bin_count_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t at(int i, int j) const {
    return counts_[static_cast<std::size_t>(i) * static_cast<std::size_t>(bin_count_) +
                   static_cast<std::size_t>(j)];
  }
  std::uint64_t total() const noexcept { return total_; }

  // Marginal over columns (first image) and over rows (second image).
  Histogram row_marginal() const;
  Histogram column_marginal() const;

 private:
  int bin_count_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

inline constexpr int kMinBins = 2;
inline constexpr int kMaxBins = 256;

// Rec. 601 luma, rounded to nearest.
std::uint8_t luma(const Rgb& px) noexcept;

GrayImage to_grayscale(const Image& img);

// Bilinear, pixel-centre aligned, edge-clamped. Same-size resize is the identity.
GrayImage resize(const GrayImage& img, int width, int height);

// bin = floor(v * B / 256), clamped to B - 1.
BinnedImage quantize(const GrayImage& img, int bin_count);

Histogram histogram(const BinnedImage& img);

JointHistogram joint_histogram(const BinnedImage& a, const BinnedImage& b);

// Decodes PNG or JPEG (detected by signature, not extension).
Image load_image(const std::string& path);
Image decode_image(std::span<const std::uint8_t> bytes, const std::string& source_id);

std::vector<std::uint8_t> encode_png(const Image& img);
void save_png(const Image& img, const std::string& path);

}  // namespace sheetrefine
