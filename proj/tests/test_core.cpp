#include "doctest.h"

#include "part/core.hpp"
#include "part/rng.hpp"

using namespace part;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("block volume") {
  CHECK(block_volume(Block(Vector::Zero(3), Vector::Ones(3))) == doctest::Approx(1.0));
  CHECK(block_volume(Block(vec({0, 0}), vec({0.5, 2}))) == doctest::Approx(1.0));
  CHECK(block_volume(Block(vec({-1, -1, -1}), vec({1, 1, 1}))) == doctest::Approx(8.0));
  const Block b(vec({-1, 0.5}), vec({3, 0.75}));
  CHECK(std::exp(block_log_volume(b)) == doctest::Approx(block_volume(b)));
}

TEST_CASE("block rejects inverted bounds") {
  CHECK_THROWS_AS(Block(vec({0, 1}), vec({1, 1})), Error);
  CHECK_THROWS_AS(Block(vec({0}), vec({1, 2})), Error);
}

TEST_CASE("block membership is half open") {
  const Block unit(vec({0}), vec({1}));
  CHECK(block_contains(unit, vec({1.0})));
  CHECK_FALSE(block_contains(unit, vec({0.0})));
  CHECK_FALSE(block_contains(unit, vec({1.0000001})));
  const Block square(vec({0, 0}), vec({1, 1}));
  CHECK(block_contains(square, vec({0.5, 0.5})));

  const Block closed(vec({0}), vec({1}), {true});
  CHECK(block_contains(closed, vec({0.0})));
}

TEST_CASE("membership dimension mismatch") {
  const Block square(vec({0, 0}), vec({1, 1}));
  try {
    block_contains(square, vec({0.5}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("draw matrix validation") {
  CHECK_THROWS_AS(DrawMatrix(Matrix(0, 2)), Error);
  Matrix bad = Matrix::Zero(3, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    DrawMatrix d(bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFinite);
  }
  CHECK_THROWS_AS(SampleSet({DrawMatrix(Matrix::Zero(3, 2)), DrawMatrix(Matrix::Zero(3, 1))}), Error);
  CHECK_THROWS_AS(SampleSet(std::vector<DrawMatrix>{}), Error);
}

TEST_CASE("density validation") {
  AggregatedDensity d;
  d.blocks = {Block(vec({0}), vec({1})), Block(vec({1}), vec({2}))};
  d.dists = {UniformDist{}, UniformDist{}};
  d.weights = {0.25, 0.75};
  CHECK_NOTHROW(validate(d));
  d.weights = {0.25, 0.70};
  CHECK_THROWS_AS(validate(d), Error);
  d.weights = {1.25, -0.25};
  CHECK_THROWS_AS(validate(d), Error);
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  Rng a = make_rng(5), b = make_rng(5);
  CHECK(a() == b());
}
