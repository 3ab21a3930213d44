#include <doctest.h>

#include "../common/testing.hpp"
#include "vididi/video_tensor.hpp"

using namespace vididi;
using vididi::testing::max_abs_diff;
using vididi::testing::quantized_clip;
using vididi::testing::random_clip;

TEST_CASE("layout is channel, frame, row, col") {
  VideoTensor x(2, 3, 4, 5);
  CHECK(x.index(0, 0, 0, 1) == 1);
  CHECK(x.index(0, 0, 1, 0) == 5);
  CHECK(x.index(0, 1, 0, 0) == 20);
  CHECK(x.index(1, 0, 0, 0) == 60);
  CHECK(x.size() == 120);
  CHECK_THROWS_AS(VideoTensor(1, 0, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(VideoTensor(1, 1, 2, 2, std::vector<double>(3)), std::invalid_argument);
}

TEST_CASE("arithmetic rejects shape mismatch") {
  VideoTensor a(1, 2, 2, 2, 1.0);
  VideoTensor b(1, 3, 2, 2, 1.0);
  CHECK_THROWS_AS(a += b, std::invalid_argument);
  CHECK_THROWS_AS(a -= b, std::invalid_argument);
  const VideoTensor c = 2.0 * a + a;
  for (double v : c.data()) CHECK(v == 3.0);
}

TEST_CASE("clip batch requires equal shapes") {
  CHECK_THROWS_AS(ClipBatch(std::vector<VideoTensor>{}), std::invalid_argument);
  CHECK_THROWS_AS(ClipBatch({VideoTensor(1, 2, 2, 2), VideoTensor(1, 3, 2, 2)}),
                  std::invalid_argument);
  ClipBatch ok({VideoTensor(3, 4, 5, 6), VideoTensor(3, 4, 5, 6)});
  CHECK(ok.size() == 2);
  CHECK(ok.frames() == 4);
}

TEST_CASE("diff1 of a ramp is constant") {
  VideoTensor x(1, 4, 1, 1);
  for (std::size_t t = 0; t < 4; ++t) x.at(0, t, 0, 0) = 3.0 * static_cast<double>(t) + 1.0;
  const VideoTensor d = diff1(x);
  REQUIRE(d.frames() == 3);
  for (double v : d.data()) CHECK(v == 3.0);
}

TEST_CASE("diff2 of a quadratic is constant") {
  VideoTensor x(1, 5, 1, 1);
  for (std::size_t t = 0; t < 5; ++t) {
    const double tt = static_cast<double>(t);
    x.at(0, t, 0, 0) = 2.0 + 0.5 * tt - 1.5 * tt * tt;
  }
  const VideoTensor d = diff2(x);
  REQUIRE(d.frames() == 3);
  for (double v : d.data()) CHECK(v == -3.0);
}

TEST_CASE("differences reject short clips") {
  CHECK_THROWS_AS(diff1(VideoTensor(1, 1, 2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(diff2(VideoTensor(1, 2, 2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(differentiate(VideoTensor(1, 4, 2, 2), 3), std::invalid_argument);
  CHECK(diff1(VideoTensor(1, 2, 2, 2)).frames() == 1);
  CHECK(diff2(VideoTensor(1, 3, 2, 2)).frames() == 1);
}

TEST_CASE("constant clip differentiates to zeros of length T-1") {
  const VideoTensor x(3, 6, 4, 4, 0.37);
  const VideoTensor d = diff1(x);
  CHECK(d.frames() == 5);
  for (double v : d.data()) CHECK(v == 0.0);
}

TEST_CASE("differences are linear") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const VideoTensor x = random_clip(rng, 2, 6, 3, 3);
    const VideoTensor y = random_clip(rng, 2, 6, 3, 3);
    const double a = rng.normal();
    const double b = rng.normal();
    const VideoTensor mix = a * x + b * y;
    CHECK(max_abs_diff(diff1(mix), a * diff1(x) + b * diff1(y)) <= 1e-12);
    CHECK(max_abs_diff(diff2(mix), a * diff2(x) + b * diff2(y)) <= 1e-12);
  }
}

TEST_CASE("diff2 is bit-identical to diff1 applied twice") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const VideoTensor x = random_clip(rng, 3, 7, 4, 2);
    CHECK(diff2(x) == diff1(diff1(x)));
  }
}

TEST_CASE("static component is annihilated") {
  Rng rng(13);
  const VideoTensor bg = random_clip(rng, 2, 1, 4, 4);
  const VideoTensor motion = quantized_clip(rng, 2, 6, 4, 4);
  const VideoTensor x = broadcast_frames(bg, 6) + motion;
  // The background cancels to rounding error on random doubles.
  CHECK(max_abs_diff(diff1(x), diff1(motion)) <= 1e-12);
  CHECK(max_abs_diff(diff2(x), diff2(motion)) <= 1e-12);
  const VideoTensor still = diff1(broadcast_frames(bg, 6));
  for (double v : still.data()) CHECK(v == 0.0);
}

TEST_CASE("taylor reconstruction hits the three anchor frames") {
  Rng rng(14);
  const VideoTensor x = quantized_clip(rng, 2, 5, 3, 3);
  for (std::size_t n = 0; n + 2 < x.frames(); ++n) {
    for (std::size_t t = n; t <= n + 2; ++t) CHECK(taylor_reconstruct(x, n, t) == x.frame(t));
  }
  const VideoTensor y = random_clip(rng, 2, 5, 3, 3);
  CHECK(taylor_reconstruct(y, 1, 1) == y.frame(1));
  CHECK(max_abs_diff(taylor_reconstruct(y, 1, 3), y.frame(3)) <= 1e-12);
}

TEST_CASE("taylor reconstruction range checks") {
  const VideoTensor x(1, 4, 2, 2);
  CHECK_THROWS_AS(taylor_reconstruct(x, 2, 2), std::out_of_range);
  CHECK_THROWS_AS(taylor_reconstruct(x, 0, 3), std::out_of_range);
  CHECK_NOTHROW(taylor_reconstruct(x, 1, 3));
}

TEST_CASE("truncate and broadcast") {
  Rng rng(15);
  const VideoTensor x = random_clip(rng, 2, 10, 3, 3);
  CHECK(truncate_frames(x, 10) == x);
  const VideoTensor t = truncate_frames(x, 8);
  REQUIRE(t.frames() == 8);
  for (std::size_t f = 0; f < 8; ++f) CHECK(t.frame(f) == x.frame(f));
  CHECK_THROWS_AS(truncate_frames(x, 11), std::out_of_range);
  const VideoTensor b = broadcast_frames(x.frame(3), 4);
  for (std::size_t f = 0; f < 4; ++f) CHECK(b.frame(f) == x.frame(3));
  CHECK_THROWS_AS(broadcast_frames(x, 2), std::invalid_argument);
}
