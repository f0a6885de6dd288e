#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "smartinspect/imaging.hpp"

using namespace smartinspect;

namespace {

std::set<std::set<int>> partition_of(const std::vector<PixelRegion>& regions, int w) {
  std::set<std::set<int>> out;
  for (const auto& r : regions) {
    std::set<int> s;
    for (const Point& p : r.pixels) s.insert(p.y * w + p.x);
    out.insert(s);
  }
  return out;
}

bool subset(const BinaryImage& a, const BinaryImage& b) {
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (a.at(x, y) && !b.at(x, y)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("image containers reject bad shapes") {
  CHECK_THROWS_AS(GrayImage(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(GrayImage(3, 3, std::vector<std::uint8_t>(8)), std::invalid_argument);
  CHECK_THROWS_AS(BinaryImage(4, 0), std::invalid_argument);
  GrayImage g(3, 2, 7);
  CHECK(g.data().size() == 6);
}

TEST_CASE("sobel of a constant image is zero") {
  for (int k : {3, 5, 7}) {
    const GrayImage out = sobel_magnitude(GrayImage(12, 9, 128), k);
    CHECK(std::all_of(out.data().begin(), out.data().end(), [](auto v) { return v == 0; }));
  }
}

TEST_CASE("sobel rejects unsupported kernel sizes") {
  CHECK_THROWS_WITH_AS(sobel_magnitude(GrayImage(4, 4), 4), doctest::Contains("4"), std::invalid_argument);
  CHECK_THROWS_AS(sobel_magnitude(GrayImage(4, 4), 9), std::invalid_argument);
}

TEST_CASE("sobel step edge saturates at the step and vanishes far from it") {
  GrayImage img(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 4; x < 8; ++x) img.at(x, y) = 255;
  }
  const GrayImage out = sobel_magnitude(img, 5);
  CHECK(out == oracle::dense_sobel(img, 5));
  for (int y = 0; y < 8; ++y) {
    CHECK(out.at(3, y) == 255);
    CHECK(out.at(4, y) == 255);
    CHECK(out.at(0, y) == 0);
    CHECK(out.at(7, y) == 0);
  }
}

TEST_CASE("sobel response to a point is 4-fold symmetric") {
  GrayImage img(9, 9);
  img.at(4, 4) = 40;
  const GrayImage out = sobel_magnitude(img, 5);
  CHECK(out == oracle::dense_sobel(img, 5));
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 9; ++x) {
      // rotation by 90 degrees about the centre: (x, y) -> (8 - y, x)
      CHECK(out.at(x, y) == out.at(8 - y, x));
    }
  }
}

TEST_CASE("sobel matches the dense oracle and the serial kernel on random images") {
  Rng rng(99);
  for (int i = 0; i < 60; ++i) {
    const int w = rng.between(1, 16), h = rng.between(1, 16);
    const GrayImage img = oracle::random_image(rng, w, h);
    for (int k : {3, 5, 7}) {
      const GrayImage out = sobel_magnitude(img, k);
      REQUIRE(out == oracle::dense_sobel(img, k));
      REQUIRE(out == serial::sobel_magnitude(img, k));
    }
  }
}

TEST_CASE("threshold is strict") {
  GrayImage img(2, 1);
  img.at(0, 0) = 200;
  img.at(1, 0) = 201;
  const BinaryImage m = threshold_binary(img, 200);
  CHECK_FALSE(m.at(0, 0));
  CHECK(m.at(1, 0));
  CHECK(threshold_binary(GrayImage(5, 5), 17).count() == 0);

  Rng rng(3);
  const GrayImage r = oracle::random_image(rng, 20, 20);
  CHECK(threshold_binary(r, 255).count() == 0);
  const BinaryImage zero = threshold_binary(r, 0);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) CHECK(zero.at(x, y) == (r.at(x, y) > 0));
  }
  CHECK(threshold_binary(r, 90) == serial::threshold_binary(r, 90));
}

TEST_CASE("dilation of a point, the empty mask and a corner") {
  BinaryImage m(11, 11);
  m.set(5, 5, true);
  const BinaryImage d = dilate(m, 3, 3);
  CHECK(d.count() == 9);
  for (int y = 4; y <= 6; ++y) {
    for (int x = 4; x <= 6; ++x) CHECK(d.at(x, y));
  }
  CHECK(dilate(BinaryImage(6, 6), 3, 3).count() == 0);

  BinaryImage c(6, 6);
  c.set(0, 0, true);
  const BinaryImage dc = dilate(c, 3, 3);
  CHECK(dc.count() == 4);
  CHECK((dc.at(0, 0) && dc.at(1, 0) && dc.at(0, 1) && dc.at(1, 1)));
}

TEST_CASE("dilation rejects even windows") {
  CHECK_THROWS_AS(dilate(BinaryImage(4, 4), 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(dilate(BinaryImage(4, 4), 3, 0), std::invalid_argument);
}

TEST_CASE("dilation is extensive and increasing, and matches the serial kernel") {
  Rng rng(17);
  for (int i = 0; i < 40; ++i) {
    const int w = rng.between(1, 30), h = rng.between(1, 30);
    const BinaryImage a = oracle::random_mask(rng, w, h, 0.1);
    BinaryImage b = a;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (rng.uniform() < 0.1) b.set(x, y, true);
      }
    }
    const int kw = 2 * rng.between(0, 3) + 1, kh = 2 * rng.between(0, 3) + 1;
    const BinaryImage da = dilate(a, kw, kh);
    CHECK(subset(a, da));
    CHECK(subset(da, dilate(b, kw, kh)));
    CHECK(da == serial::dilate(a, kw, kh));
  }
}

TEST_CASE("connected components: blocks and diagonal contact") {
  BinaryImage m(8, 8);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) {
      m.set(x, y, true);
      m.set(x + 5, y + 5, true);
    }
  }
  auto regions = connected_regions(m);
  REQUIRE(regions.size() == 2);
  CHECK(regions[0].area() == 4);
  CHECK(regions[1].area() == 4);
  CHECK(regions[0].bbox == BBox{0, 0, 2, 2});  // equal areas: lower (y0, x0) first

  BinaryImage d(4, 4);
  d.set(1, 1, true);
  d.set(2, 2, true);
  regions = connected_regions(d);
  REQUIRE(regions.size() == 1);
  CHECK(regions[0].area() == 2);
  CHECK(connected_regions(BinaryImage(5, 5)).empty());
}

TEST_CASE("connected components match the flood-fill oracle and are ordered") {
  Rng rng(2024);
  for (int i = 0; i < 50; ++i) {
    const BinaryImage m = oracle::random_mask(rng, 64, 64, rng.uniform(0.05, 0.6));
    const auto regions = connected_regions(m);
    REQUIRE(partition_of(regions, 64) == oracle::flood_fill_partition(m));
    for (std::size_t r = 0; r < regions.size(); ++r) {
      const auto& reg = regions[r];
      int x0 = 64, y0 = 64, x1 = -1, y1 = -1;
      for (const Point& p : reg.pixels) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
      }
      CHECK(reg.bbox == BBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1});
      if (r > 0) {
        const auto& prev = regions[r - 1];
        const bool ordered = prev.area() > reg.area() ||
                             (prev.area() == reg.area() && std::pair(prev.bbox.y0, prev.bbox.x0) <=
                                                               std::pair(reg.bbox.y0, reg.bbox.x0));
        CHECK(ordered);
      }
    }
  }
}
