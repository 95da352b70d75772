#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "mutual_info.hpp"
#include "test_support.hpp"

using namespace sheetrefine;
using doctest::Approx;

namespace {

Histogram hist(std::vector<std::uint64_t> counts) { return Histogram(std::move(counts)); }

JointHistogram joint2(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return JointHistogram(2, {a, b, c, d});
}

}  // namespace

TEST_CASE("entropy") {
  CHECK(entropy(hist({4, 0, 0, 0})) == 0.0);
  CHECK(entropy(hist({2, 2})) == Approx(1.0).epsilon(1e-15));
  CHECK(entropy(hist({1, 1, 1, 1})) == Approx(2.0).epsilon(1e-15));
  for (int b : {2, 8, 64, 256}) {
    CHECK(entropy(hist(std::vector<std::uint64_t>(static_cast<std::size_t>(b), 3))) ==
          Approx(std::log2(b)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(entropy(hist({0, 0})), Error);
}

TEST_CASE("joint_entropy") {
  CHECK(joint_entropy(joint2(1, 1, 1, 1)) == Approx(2.0));
  CHECK(joint_entropy(joint2(2, 0, 0, 2)) == Approx(1.0));
  const auto x = BinnedImage(2, 2, 4, {0, 1, 1, 3});
  CHECK(joint_entropy(joint_histogram(x, x)) == entropy(histogram(x)));
  CHECK_THROWS_AS(joint_entropy(joint2(0, 0, 0, 0)), Error);
}

TEST_CASE("conditional_entropy") {
  const auto x = BinnedImage(2, 2, 4, {0, 1, 2, 2});
  CHECK(conditional_entropy(joint_histogram(x, x)) == 0.0);
  CHECK(conditional_entropy(joint2(1, 1, 1, 1)) == Approx(1.0));
  // Cells {2,1,1}/4 give H = 1.5; the conditioning (row) marginal {2,2} gives 1.
  const auto j = joint2(2, 0, 1, 1);
  CHECK(joint_entropy(j) == Approx(1.5));
  CHECK(entropy(j.row_marginal()) == Approx(1.0));
  CHECK(conditional_entropy(j) == Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(conditional_entropy(joint2(0, 0, 0, 0)), Error);
}

TEST_CASE("mutual_information") {
  const auto x = BinnedImage(3, 1, 4, {0, 1, 3});
  CHECK(mutual_information(joint_histogram(x, x)) == entropy(histogram(x)));
  CHECK(mutual_information(joint2(1, 1, 1, 1)) == 0.0);
  CHECK(mutual_information(joint2(0, 2, 2, 0)) == Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(mutual_information(joint2(0, 0, 0, 0)), Error);
}

TEST_CASE("mutual_information agrees with the brute-force table on exhaustive 8x8, B<=4 pairs") {
  std::mt19937_64 rng(21);
  for (int b : {2, 3, 4}) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto x = testsupport::random_binned(rng, 8, 8, b);
      // Mix in correlated pairs so MI is not always near zero.
      auto y = testsupport::random_binned(rng, 8, 8, b);
      if (trial % 2 == 0) {
        std::vector<std::uint16_t> bins(x.bins().begin(), x.bins().end());
        for (std::size_t k = 0; k < bins.size(); k += 3) bins[k] = y.bins()[k];
        y = BinnedImage(8, 8, b, std::move(bins));
      }
      const double ours = mutual_information(joint_histogram(x, y));
      const double oracle = testsupport::brute_force_mi(testsupport::labels(x), testsupport::labels(y));
      CHECK(std::abs(ours - oracle) <= 1e-12);
    }
  }
}

TEST_CASE("information identities hold on random pairs") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> dim(2, 24);
    std::uniform_int_distribution<int> pick(0, 4);
    const int bins = std::array{2, 4, 8, 16, 64}[static_cast<std::size_t>(pick(rng))];
    const int w = dim(rng), h = dim(rng);
    const auto x = testsupport::random_binned(rng, w, h, bins);
    const auto y = testsupport::random_binned(rng, w, h, bins);
    const auto jxy = joint_histogram(x, y);
    const auto jyx = joint_histogram(y, x);
    const double hx = entropy(histogram(x));
    const double hy = entropy(histogram(y));
    const double hxy = joint_entropy(jxy);
    const double mi = mutual_information(jxy);

    CHECK(std::abs(mi - mutual_information(jyx)) <= 1e-9);
    CHECK(mi >= 0.0);
    CHECK(mi <= std::min(hx, hy) + 1e-9);
    CHECK(std::abs(hxy - (hx + conditional_entropy(jxy))) <= 1e-9);
    CHECK(std::abs(hxy - (hy + conditional_entropy(jyx))) <= 1e-9);
    // H(X) - H(X|Y) = H(Y) - H(Y|X) = H(X) + H(Y) - H(X,Y)
    CHECK(std::abs((hx - conditional_entropy(jyx)) - mi) <= 1e-9);
    CHECK(std::abs((hy - conditional_entropy(jxy)) - mi) <= 1e-9);
    CHECK(std::abs(mutual_information(joint_histogram(x, x)) - hx) <= 1e-12);
  }
}

TEST_CASE("bin relabelling leaves MI unchanged") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int bins = 16;
    const auto x = testsupport::random_binned(rng, 12, 10, bins);
    auto yb = std::vector<std::uint16_t>(x.bins().begin(), x.bins().end());
    for (std::size_t k = 0; k < yb.size(); k += 2) yb[k] = static_cast<std::uint16_t>(rng() % bins);
    const BinnedImage y(12, 10, bins, yb);

    std::vector<std::uint16_t> perm(bins);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (auto& v : yb) v = perm[v];
    const BinnedImage y_perm(12, 10, bins, yb);

    CHECK(std::abs(mutual_information(joint_histogram(x, y)) -
                   mutual_information(joint_histogram(x, y_perm))) <= 1e-12);
  }
}

TEST_CASE("mi_between_images") {
  std::mt19937_64 rng(31);
  const AnalysisConfig cfg{64, 32};

  SUBCASE("self MI is the entropy of the prepared image") {
    const auto g = testsupport::random_gray(rng, 20, 17);
    CHECK(mi_between_images(g, g, cfg) == entropy(histogram(prepare(g, cfg))));
  }
  SUBCASE("constant images carry no information") {
    const GrayImage a(10, 10, std::vector<std::uint8_t>(100, 12));
    const GrayImage b(7, 9, std::vector<std::uint8_t>(63, 240));
    CHECK(mi_between_images(a, b, cfg) == 0.0);
  }
  SUBCASE("independent 64x64 noise at B=8 is nearly zero and matches brute force") {
    std::mt19937_64 ra(1001), rb(2002);
    const auto a = testsupport::random_gray(ra, 64, 64);
    const auto b = testsupport::random_gray(rb, 64, 64);
    const AnalysisConfig c8{8, 64};
    const double mi = mi_between_images(a, b, c8);
    CHECK(mi < 0.05);
    std::vector<int> la, lb;
    for (auto v : a.intensities()) la.push_back(v * 8 / 256);
    for (auto v : b.intensities()) lb.push_back(v * 8 / 256);
    CHECK(std::abs(mi - testsupport::brute_force_mi(la, lb)) <= 1e-12);
  }
  SUBCASE("different sizes are resized before comparison") {
    const auto a = testsupport::random_gray(rng, 40, 30);
    const auto b = testsupport::random_gray(rng, 13, 50);
    const double mi = mi_between_images(a, b, cfg);
    CHECK(mi >= 0.0);
    CHECK(mi == mi_between_images(a, b, cfg));
  }
  SUBCASE("invalid config") {
    const auto g = testsupport::random_gray(rng, 4, 4);
    CHECK_THROWS_AS(mi_between_images(g, g, AnalysisConfig{1, 32}), Error);
    CHECK_THROWS_AS(mi_between_images(g, g, AnalysisConfig{64, 0}), Error);
  }
}

TEST_CASE("pairwise_mi_matrix") {
  std::mt19937_64 rng(41);

  SUBCASE("identical parts fill the matrix with their entropy") {
    const auto g = testsupport::random_gray(rng, 16, 16);
    const auto m = pairwise_mi_matrix({g, g}, {16, 16});
    CHECK(m.at(0, 1) == m.at(0, 0));
    CHECK(m.at(1, 0) == m.at(1, 1));
  }
  SUBCASE("three parts give an exactly symmetric matrix") {
    std::vector<GrayImage> parts;
    for (int i = 0; i < 3; ++i) parts.push_back(testsupport::random_gray(rng, 20, 20));
    const auto m = pairwise_mi_matrix(parts, {32, 20});
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(m.at(i, j) == m.at(j, i));
  }
  SUBCASE("six 256x256 parts at B=64 match a naive double loop") {
    std::vector<GrayImage> parts;
    for (int i = 0; i < 6; ++i) {
      auto g = testsupport::random_gray(rng, 256, 256);
      if (i > 0) {
        // Share half the pixels with part 0 to get a spread of MI values.
        std::vector<std::uint8_t> px(g.intensities().begin(), g.intensities().end());
        for (std::size_t k = 0; k < px.size(); k += static_cast<std::size_t>(i + 1)) px[k] = parts[0].intensities()[k];
        g = GrayImage(256, 256, std::move(px));
      }
      parts.push_back(std::move(g));
    }
    const auto m = pairwise_mi_matrix(parts, {64, 256});
    std::vector<std::vector<int>> labels;
    for (const auto& p : parts) {
      std::vector<int> l;
      for (auto v : p.intensities()) l.push_back(v * 64 / 256);
      labels.push_back(std::move(l));
    }
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        const double naive = i == j ? testsupport::brute_force_entropy(labels[i])
                                    : testsupport::brute_force_mi(labels[i], labels[j]);
        CHECK(std::abs(m.at(i, j) - naive) <= 1e-12);
      }
    }
  }
  SUBCASE("result does not depend on the thread count") {
    std::vector<GrayImage> parts;
    for (int i = 0; i < 7; ++i) parts.push_back(testsupport::random_gray(rng, 50, 40));
    const auto m1 = pairwise_mi_matrix(parts, {64, 64}, 1);
    const auto m4 = pairwise_mi_matrix(parts, {64, 64}, 4);
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) CHECK(m1.at(i, j) == m4.at(i, j));
  }
  SUBCASE("fewer than two parts") {
    CHECK_THROWS_AS(pairwise_mi_matrix({testsupport::random_gray(rng, 4, 4)}, {}), Error);
    CHECK_THROWS_AS(pairwise_mi_matrix({}, {}), Error);
  }
}
