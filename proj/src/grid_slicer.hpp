#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "image_core.hpp"

namespace sheetrefine {

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct UniformGrid {
  int rows = 0;
  int cols = 0;
};

struct LabeledRect {
  Rect rect;
  std::optional<std::string> label;
};

struct ExplicitCrops {
  std::vector<LabeledRect> rects;
};

using CropSpec = std::variant<UniformGrid, ExplicitCrops>;

struct Part {
  Image image;
  Rect rect;
  std::optional<std::string> label;
};

// Parts in spec order; index i here is part index i everywhere downstream.
struct PartSet {
  std::string source_id;
  std::vector<Part> parts;
};

// Crop-spec JSON: {"mode":"uniform","rows":R,"cols":C} or
// {"mode":"explicit","rects":[{"x","y","w","h","label"?}, ...]}.
// Bounds are checked at slice time.
CropSpec parse_crop_spec_json(const std::string& text);
CropSpec parse_crop_spec(const std::string& path);

// Cell sizes are floor(dim / n); the last cell on each axis takes the remainder.
PartSet slice_uniform(const Image& img, int rows, int cols);

PartSet slice_crops(const Image& img, const ExplicitCrops& spec);

PartSet slice(const Image& img, const CropSpec& spec);

Image crop(const Image& img, const Rect& r);

}  // namespace sheetrefine
