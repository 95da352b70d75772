#include <doctest.h>

#include <algorithm>

#include <fstream>

#include "error.hpp"
#include "grid_slicer.hpp"
#include "test_support.hpp"

using namespace sheetrefine;

namespace {

void check_pixel_fidelity(const Image& src, const Part& part) {
  REQUIRE(part.image.width() == part.rect.width);
  REQUIRE(part.image.height() == part.rect.height);
  for (int v = 0; v < part.rect.height; ++v)
    for (int u = 0; u < part.rect.width; ++u)
      REQUIRE(part.image.at(u, v) == src.at(part.rect.x + u, part.rect.y + v));
}

}  // namespace

TEST_CASE("parse_crop_spec_json") {
  SUBCASE("uniform") {
    const auto spec = parse_crop_spec_json(R"({"mode":"uniform","rows":2,"cols":3})");
    const auto& grid = std::get<UniformGrid>(spec);
    CHECK(grid.rows == 2);
    CHECK(grid.cols == 3);
  }
  SUBCASE("explicit") {
    const auto spec = parse_crop_spec_json(
        R"({"mode":"explicit","rects":[{"x":0,"y":0,"w":10,"h":10},{"x":1,"y":2,"w":3,"h":4,"label":"side"}]})");
    const auto& crops = std::get<ExplicitCrops>(spec);
    REQUIRE(crops.rects.size() == 2);
    CHECK(crops.rects[0].rect == Rect{0, 0, 10, 10});
    CHECK_FALSE(crops.rects[0].label.has_value());
    CHECK(crops.rects[1].rect == Rect{1, 2, 3, 4});
    CHECK(crops.rects[1].label == "side");
  }
  SUBCASE("validation errors") {
    auto parse_error = [](const char* text) {
      try {
        parse_crop_spec_json(text);
      } catch (const Error& e) {
        return e.code() == ErrorCode::Parse;
      }
      return false;
    };
    CHECK(parse_error(R"({"mode":"uniform","rows":0,"cols":3})"));
    CHECK(parse_error(R"({"mode":"uniform","rows":2})"));
    CHECK(parse_error(R"({"mode":"uniform","rows":2.5,"cols":3})"));
    CHECK(parse_error(R"({"mode":"diagonal"})"));
    CHECK(parse_error(R"({"rows":2,"cols":2})"));
    CHECK(parse_error(R"({"mode":"explicit","rects":[{"x":0,"y":0,"w":10}]})"));
    CHECK(parse_error(R"({"mode":"explicit","rects":[{"x":-1,"y":0,"w":10,"h":1}]})"));
    CHECK(parse_error(R"({"mode":"explicit","rects":[]})"));
    CHECK(parse_error(R"({"mode":"explicit","rects":[{"x":0,"y":0,"w":1,"h":1,"label":3}]})"));
    CHECK(parse_error("{not json"));
    CHECK(parse_error("[1,2]"));
  }
  SUBCASE("from file") {
    testsupport::TempDir dir;
    std::ofstream(dir.str("spec.json")) << R"({"mode":"uniform","rows":1,"cols":4})";
    CHECK(std::get<UniformGrid>(parse_crop_spec(dir.str("spec.json"))).cols == 4);
    CHECK_THROWS_AS(parse_crop_spec(dir.str("missing.json")), Error);
  }
}

TEST_CASE("slice_uniform") {
  std::mt19937_64 rng(51);

  SUBCASE("4x4 image, 2x2 grid gives the four quadrants") {
    const Image img = testsupport::random_image(rng, 4, 4);
    const auto set = slice_uniform(img, 2, 2);
    REQUIRE(set.parts.size() == 4);
    CHECK(set.parts[0].rect == Rect{0, 0, 2, 2});
    CHECK(set.parts[1].rect == Rect{2, 0, 2, 2});
    CHECK(set.parts[2].rect == Rect{0, 2, 2, 2});
    CHECK(set.parts[3].rect == Rect{2, 2, 2, 2});
    for (const auto& p : set.parts) check_pixel_fidelity(img, p);
  }
  SUBCASE("5x4 image, 2x2 grid gives column widths 2 and 3") {
    const Image img = testsupport::random_image(rng, 5, 4);
    const auto set = slice_uniform(img, 2, 2);
    CHECK(set.parts[0].rect.width == 2);
    CHECK(set.parts[1].rect.width == 3);
    CHECK(set.parts[1].rect.x == 2);
    for (const auto& p : set.parts) check_pixel_fidelity(img, p);
  }
  SUBCASE("grid larger than the image") {
    const Image img(1, 1);
    CHECK_THROWS_AS(slice_uniform(img, 2, 2), Error);
    CHECK_THROWS_AS(slice_uniform(img, 0, 1), Error);
  }
  SUBCASE("random sizes tile the source exactly") {
    for (int trial = 0; trial < 100; ++trial) {
      std::uniform_int_distribution<int> dim(1, 30);
      const int w = dim(rng), h = dim(rng);
      const int rows = std::uniform_int_distribution<int>(1, h)(rng);
      const int cols = std::uniform_int_distribution<int>(1, w)(rng);
      const Image img = testsupport::random_image(rng, w, h);
      const auto set = slice_uniform(img, rows, cols);
      REQUIRE(set.parts.size() == static_cast<std::size_t>(rows * cols));
      std::vector<int> covered(static_cast<std::size_t>(w * h), 0);
      int width_sum = 0;
      int height_sum = 0;
      for (std::size_t i = 0; i < set.parts.size(); ++i) {
        const auto& p = set.parts[i];
        check_pixel_fidelity(img, p);
        const int r = static_cast<int>(i) / cols;
        const int c = static_cast<int>(i) % cols;
        CHECK(p.rect.width == (c == cols - 1 ? w - (cols - 1) * (w / cols) : w / cols));
        CHECK(p.rect.height == (r == rows - 1 ? h - (rows - 1) * (h / rows) : h / rows));
        if (r == 0) width_sum += p.rect.width;
        if (c == 0) height_sum += p.rect.height;
        for (int y = p.rect.y; y < p.rect.y + p.rect.height; ++y)
          for (int x = p.rect.x; x < p.rect.x + p.rect.width; ++x) ++covered[static_cast<std::size_t>(y * w + x)];
      }
      CHECK(width_sum == w);
      CHECK(height_sum == h);
      CHECK(std::all_of(covered.begin(), covered.end(), [](int n) { return n == 1; }));
    }
  }
}

TEST_CASE("slice_crops") {
  std::mt19937_64 rng(52);
  const Image img = testsupport::random_image(rng, 12, 9);

  SUBCASE("full-image rectangle") {
    const auto set = slice_crops(img, {{{Rect{0, 0, 12, 9}, std::nullopt}}});
    REQUIRE(set.parts.size() == 1);
    CHECK(std::ranges::equal(set.parts[0].image.pixels(), img.pixels()));
  }
  SUBCASE("two disjoint rectangles keep spec order and labels") {
    const auto set = slice_crops(img, {{{Rect{6, 3, 5, 4}, "b"}, {Rect{0, 0, 3, 3}, "a"}}});
    REQUIRE(set.parts.size() == 2);
    CHECK(set.parts[0].label == "b");
    CHECK(set.parts[1].label == "a");
    for (const auto& p : set.parts) check_pixel_fidelity(img, p);
  }
  SUBCASE("rectangle one pixel past the right edge names its index") {
    try {
      slice_crops(img, {{{Rect{0, 0, 2, 2}, std::nullopt}, {Rect{8, 0, 5, 2}, std::nullopt}}});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("rect 1") != std::string::npos);
    }
  }
  SUBCASE("zero-area rectangle is rejected") {
    CHECK_THROWS_AS(slice_crops(img, {{{Rect{0, 0, 0, 2}, std::nullopt}}}), Error);
  }
  SUBCASE("random rectangles copy exact pixels") {
    for (int trial = 0; trial < 200; ++trial) {
      const int x = std::uniform_int_distribution<int>(0, 11)(rng);
      const int y = std::uniform_int_distribution<int>(0, 8)(rng);
      const int w = std::uniform_int_distribution<int>(1, 12 - x)(rng);
      const int h = std::uniform_int_distribution<int>(1, 9 - y)(rng);
      const auto set = slice(img, ExplicitCrops{{{Rect{x, y, w, h}, std::nullopt}}});
      check_pixel_fidelity(img, set.parts[0]);
    }
  }
}
