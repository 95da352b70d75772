#include "grid_slicer.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace sheetrefine {

namespace {

using nlohmann::json;

[[noreturn]] void spec_error(const std::string& msg) {
  fail(ErrorCode::Parse, "crop spec: " + msg);
}

int required_int(const json& obj, const char* key, int min_value, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) spec_error(where + " missing required field \"" + key + "\"");
  if (!it->is_number_integer()) spec_error(where + " field \"" + key + "\" must be an integer");
  const auto v = it->get<long long>();
  if (v < min_value || v > std::numeric_limits<int>::max()) {
    spec_error(where + " field \"" + key + "\" must be >= " + std::to_string(min_value) +
               ", got " + std::to_string(v));
  }
  return static_cast<int>(v);
}

bool contains(const Image& img, const Rect& r) {
  return r.x >= 0 && r.y >= 0 && r.width >= 1 && r.height >= 1 &&
         static_cast<long long>(r.x) + r.width <= img.width() &&
         static_cast<long long>(r.y) + r.height <= img.height();
}

}  // namespace

CropSpec parse_crop_spec_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    spec_error(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) spec_error("top level must be an object");
  auto mode = doc.find("mode");
  if (mode == doc.end() || !mode->is_string()) spec_error("missing string field \"mode\"");

  if (*mode == "uniform") {
    return UniformGrid{required_int(doc, "rows", 1, "uniform spec"),
                       required_int(doc, "cols", 1, "uniform spec")};
  }
  if (*mode == "explicit") {
    auto rects = doc.find("rects");
    if (rects == doc.end() || !rects->is_array()) spec_error("explicit spec requires array \"rects\"");
    ExplicitCrops out;
    for (std::size_t i = 0; i < rects->size(); ++i) {
      const auto& r = (*rects)[i];
      const std::string where = "rect " + std::to_string(i);
      if (!r.is_object()) spec_error(where + " must be an object");
      LabeledRect lr;
      lr.rect.x = required_int(r, "x", 0, where);
      lr.rect.y = required_int(r, "y", 0, where);
      lr.rect.width = required_int(r, "w", 0, where);
      lr.rect.height = required_int(r, "h", 0, where);
      if (auto label = r.find("label"); label != r.end()) {
        if (!label->is_string()) spec_error(where + " field \"label\" must be a string");
        lr.label = label->get<std::string>();
      }
      out.rects.push_back(std::move(lr));
    }
    if (out.rects.empty()) spec_error("explicit spec has no rects");
    return out;
  }
  spec_error("unknown mode \"" + mode->get<std::string>() + "\"");
}

CropSpec parse_crop_spec(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) fail(ErrorCode::FileNotFound, path + ": file not found");
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_crop_spec_json(ss.str());
}

Image crop(const Image& img, const Rect& r) {
  if (!contains(img, r)) fail(ErrorCode::InvalidArgument, "crop rectangle outside image");
  std::vector<Rgb> pixels;
  pixels.reserve(static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height));
  for (int y = r.y; y < r.y + r.height; ++y)
    for (int x = r.x; x < r.x + r.width; ++x) pixels.push_back(img.at(x, y));
  return Image(r.width, r.height, std::move(pixels), img.source_id());
}

PartSet slice_uniform(const Image& img, int rows, int cols) {
  if (rows < 1 || cols < 1) {
    fail(ErrorCode::InvalidArgument, "grid must have rows >= 1 and cols >= 1");
  }
  if (rows > img.height() || cols > img.width()) {
    fail(ErrorCode::InvalidArgument,
         "grid " + std::to_string(rows) + "x" + std::to_string(cols) + " exceeds image " +
             std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  const int cell_w = img.width() / cols;
  const int cell_h = img.height() / rows;
  PartSet out{img.source_id(), {}};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Rect rect{c * cell_w, r * cell_h, c == cols - 1 ? img.width() - c * cell_w : cell_w,
                r == rows - 1 ? img.height() - r * cell_h : cell_h};
      out.parts.push_back({crop(img, rect), rect, std::nullopt});
    }
  }
  return out;
}

PartSet slice_crops(const Image& img, const ExplicitCrops& spec) {
  PartSet out{img.source_id(), {}};
  for (std::size_t i = 0; i < spec.rects.size(); ++i) {
    const auto& r = spec.rects[i].rect;
    if (!contains(img, r)) {
      fail(ErrorCode::InvalidArgument,
           "rect " + std::to_string(i) + " (" + std::to_string(r.x) + "," + std::to_string(r.y) +
               " " + std::to_string(r.width) + "x" + std::to_string(r.height) +
               ") is outside the " + std::to_string(img.width()) + "x" +
               std::to_string(img.height()) + " image");
    }
    out.parts.push_back({crop(img, r), r, spec.rects[i].label});
  }
  return out;
}

PartSet slice(const Image& img, const CropSpec& spec) {
  if (const auto* grid = std::get_if<UniformGrid>(&spec)) {
    return slice_uniform(img, grid->rows, grid->cols);
  }
  return slice_crops(img, std::get<ExplicitCrops>(spec));
}

}  // namespace sheetrefine
