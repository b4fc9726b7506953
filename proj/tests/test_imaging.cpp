#include <doctest.h>

#include <cmath>

#include "aiart/error.hpp"
#include "aiart/imaging.hpp"
#include "support.hpp"

using namespace aiart;

TEST_SUITE("imaging") {
  TEST_CASE("luma weights") {
    RasterImage img(3, 1);
    img.at(0, 0) = {255, 0, 0};
    img.at(1, 0) = {0, 255, 0};
    img.at(2, 0) = {0, 0, 255};
    const auto g = to_gray(img);
    CHECK(g.at(0, 0) == doctest::Approx(76.245));
    CHECK(g.at(1, 0) == doctest::Approx(149.685));
    CHECK(g.at(2, 0) == doctest::Approx(29.07));
  }

  TEST_CASE("hexcone hsv") {
    const auto red = rgb_to_hsv({255, 0, 0});
    CHECK(red.h == 0.0);
    CHECK(red.s == 1.0);
    CHECK(red.v == 1.0);
    const auto green = rgb_to_hsv({0, 255, 0});
    CHECK(green.h == doctest::Approx(1.0 / 3.0));
    const auto blue = rgb_to_hsv({0, 0, 255});
    CHECK(blue.h == doctest::Approx(2.0 / 3.0));
    const auto magenta = rgb_to_hsv({255, 0, 255});
    CHECK(magenta.h == doctest::Approx(5.0 / 6.0));
    const auto gray = rgb_to_hsv({90, 90, 90});
    CHECK(gray.h == 0.0);
    CHECK(gray.s == 0.0);
    CHECK(gray.v == doctest::Approx(90.0 / 255.0));
    const auto black = rgb_to_hsv({0, 0, 0});
    CHECK(black.s == 0.0);
    CHECK(black.v == 0.0);
  }

  TEST_CASE("resize") {
    Rng rng(3);
    const auto img = testing::random_raster(rng, 20, 20);
    CHECK(resize_bilinear(img, 20) == img);

    const RasterImage flat(13, 7, Rgb{10, 20, 30});
    const auto big = resize_bilinear(flat, 40);
    CHECK(big.width() == 40);
    CHECK(big.height() == 40);
    for (const auto& p : big.pixels()) CHECK(p == Rgb{10, 20, 30});

    // 2x2 -> 4x4 with pixel-centre alignment: corners replicate, inner samples
    // sit a quarter of the way between source pixels.
    RasterImage two(2, 2);
    two.at(0, 0) = {0, 0, 0};
    two.at(1, 0) = {200, 200, 200};
    two.at(0, 1) = {0, 0, 0};
    two.at(1, 1) = {200, 200, 200};
    const auto four = resize_bilinear(two, 4);
    CHECK(four.at(0, 0).r == 0);
    CHECK(four.at(1, 0).r == 50);
    CHECK(four.at(2, 0).r == 150);
    CHECK(four.at(3, 0).r == 200);
  }

  TEST_CASE("median removes an isolated impulse") {
    GrayImage g(7, 7, 40.0);
    g.at(3, 3) = 255.0;
    const auto m = median3(g);
    for (double v : m.values()) CHECK(v == 40.0);
    GrayImage corner(3, 3, 0.0);
    corner.at(0, 0) = 9.0;
    CHECK(median3(corner).at(0, 0) == 0.0);
  }

  TEST_CASE("canny on a vertical step gives one thin line") {
    GrayImage g(32, 32, 0.0);
    for (int y = 0; y < 32; ++y)
      for (int x = 16; x < 32; ++x) g.at(x, y) = 255.0;
    const auto e = canny(g);
    for (int y = 0; y < 32; ++y) {
      int count = 0;
      for (int x = 0; x < 32; ++x)
        if (e.at(x, y)) {
          ++count;
          CHECK((x == 15 || x == 16));
        }
      CHECK(count == 1);
    }
    CHECK(canny(GrayImage(16, 16, 128.0)).count() == 0);
    CHECK_THROWS_AS(canny(g, {200.0, 100.0, 1.4}), InvalidInput);
  }

  TEST_CASE("png round trip and jpeg decode") {
    Rng rng(5);
    const auto img = testing::random_raster(rng, 23, 17);
    CHECK(decode(encode_png(img)) == img);

    const RasterImage flat(16, 16, Rgb{120, 60, 200});
    const auto jpeg = decode(encode_jpeg(flat, 95));
    REQUIRE(jpeg.width() == 16);
    for (const auto& p : jpeg.pixels()) {
      CHECK(std::abs(p.r - 120) <= 4);
      CHECK(std::abs(p.g - 60) <= 4);
      CHECK(std::abs(p.b - 200) <= 4);
    }
    const auto gray = decode(encode_jpeg(flat, 95, true));
    CHECK(gray.at(3, 3).r == gray.at(3, 3).g);
    CHECK(gray.at(3, 3).g == gray.at(3, 3).b);
  }

  TEST_CASE("decode errors") {
    const std::vector<std::uint8_t> junk{'h', 'e', 'l', 'l', 'o'};
    CHECK_THROWS_AS(decode(junk), DecodeError);
    auto png = encode_png(RasterImage(8, 8));
    png.resize(png.size() / 2);
    CHECK_THROWS_AS(decode(png), DecodeError);
    auto jpeg = encode_jpeg(RasterImage(8, 8));
    jpeg.resize(20);
    CHECK_THROWS_AS(decode(jpeg), DecodeError);
    CHECK_THROWS_AS(decode_file("/nonexistent/file.png"), DecodeError);
  }

  TEST_CASE("image extensions") {
    CHECK(has_image_extension("a/b.PNG"));
    CHECK(has_image_extension("x.jpeg"));
    CHECK(has_image_extension("x.Jpg"));
    CHECK_FALSE(has_image_extension("notes.txt"));
    CHECK_FALSE(has_image_extension("png"));
  }
}
