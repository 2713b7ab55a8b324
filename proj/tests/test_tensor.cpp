// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>
#include <random>

#include "fdfm/errors.hpp"
#include "fdfm/tensor.hpp"
#include "fdfm/tensor_io.hpp"
#include "test_util.hpp"

using namespace fdfm;
using fdfm::testing::random_pixels;

TEST_SUITE("tensor") {

TEST_CASE("pixels require even sides and rank 3") {
  CHECK_NOTHROW(Pixels(1, 2, 2));
  CHECK_THROWS_AS(Pixels(1, 3, 2), DimensionError);
  CHECK_THROWS_AS(Pixels(1, 2, 5), DimensionError);
  CHECK_THROWS_AS(Pixels(0, 2, 2), DimensionError);
  CHECK_THROWS_AS(Pixels(Tensor({2, 2})), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>(3)), DimensionError);
}

TEST_CASE("pixel indexing is channel-major row-major") {
  Pixels x(2, 2, 4);
  x.at(1, 1, 3) = 7.0;
  CHECK(x.values()[(1 * 2 + 1) * 4 + 3] == 7.0);
}

TEST_CASE("freq state flatten round-trips") {
  std::mt19937_64 rng(1);
  const FreqState s = fdfm::testing::random_state(rng, 2, 4, 6);
  CHECK(s.low.shape() == Shape{2, 2, 3});
  CHECK(s.high.shape() == Shape{6, 2, 3});
  const auto flat = s.flatten();
  CHECK(flat.size() == 48);
  CHECK(flat[0] == s.low[0]);
  CHECK(flat[12] == s.high[0]);
  CHECK(FreqState::unflatten(flat, s) == s);
  CHECK_THROWS_AS(FreqState::unflatten(std::vector<double>(3), s), DimensionError);
}

TEST_CASE("axpby on states and images") {
  std::mt19937_64 rng(2);
  const Pixels x = random_pixels(rng, 1, 2, 4);
  const Pixels y = random_pixels(rng, 1, 2, 4);
  const Pixels z = axpby(2.0, x, -1.0, y);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(z.values()[i] == 2.0 * x.values()[i] - y.values()[i]);
  CHECK_THROWS_AS(axpby(1.0, x, 1.0, Pixels(1, 2, 2)), DimensionError);
}

TEST_CASE("FPXT1 encoding layout") {
  const Tensor t({2, 1}, std::vector<double>{1.5, -2.0});
  const auto bytes = encode_tensor(t);
  REQUIRE(bytes.size() == 5 + 1 + 2 * 4 + 2 * 8);
  CHECK(std::memcmp(bytes.data(), "FPXT1", 5) == 0);
  CHECK(bytes[5] == 2);
  CHECK(bytes[6] == 2);
  CHECK(bytes[7] == 0);
  CHECK(bytes[10] == 1);
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 14, 8);
  CHECK(first == 1.5);
  CHECK(decode_tensor(bytes) == t);
}

TEST_CASE("FPXT1 rejects malformed input") {
  auto bytes = encode_tensor(Tensor({3}, std::vector<double>{1, 2, 3}));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_tensor(bad_magic), IoError);
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_tensor(truncated), IoError);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_tensor(trailing), IoError);
  CHECK_THROWS_AS(decode_tensor(std::vector<std::uint8_t>{}), IoError);
}

TEST_CASE("FPXT1 file round-trip and image stacking") {
  std::mt19937_64 rng(3);
  std::vector<Pixels> images{random_pixels(rng, 3, 2, 4), random_pixels(rng, 3, 2, 4)};
  const Tensor batch = stack_images(images, {3, 2, 4});
  CHECK(batch.shape() == Shape{2, 3, 2, 4});
  const auto dir = fdfm::testing::scratch_dir("tensor_io");
  write_tensor(dir / "b.fpxt", batch);
  const Tensor back = read_tensor(dir / "b.fpxt");
  CHECK(back == batch);
  const auto un = unstack_images(back);
  REQUIRE(un.size() == 2);
  CHECK(un[1] == images[1]);

  const Tensor empty = stack_images({}, {1, 2, 2});
  CHECK(empty.shape() == Shape{0, 1, 2, 2});
  CHECK(read_tensor((write_tensor(dir / "e.fpxt", empty), dir / "e.fpxt")) == empty);
  CHECK_THROWS_AS(read_tensor(dir / "missing.fpxt"), IoError);
}

}  // TEST_SUITE
