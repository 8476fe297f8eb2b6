#include <catch_amalgamated.hpp>
#include <cmath>

#include "helpers.hpp"
#include "shtauc/objective.hpp"

using namespace shtauc;
using testing_oracles::finite_difference_gradient;
using testing_oracles::random_dataset;

namespace {

Vector random_weights(Rng& rng, std::size_t d) {
  Vector w(d);
  for (double& x : w) x = rng.normal();
  return w;
}

Dataset two_point_dataset() {
  // one positive at [1], one negative at [0]
  return Dataset(2, 1, {1.0, 0.0}, {1, -1});
}

}  // namespace

TEST_CASE("class means of singletons and pairs") {
  const Dataset data(2, 2, {2, 4, 0, 0}, {1, -1});
  const ClassMeans means = class_means(data);
  CHECK(means.mean_pos == Vector{2, 4});
  CHECK(means.mean_neg == Vector{0, 0});

  const Dataset pair(3, 2, {1, 0, 3, 0, 5, 5}, {1, 1, -1});
  CHECK(class_means(pair).mean_pos == Vector{2, 0});
}

TEST_CASE("class means require both classes") {
  const Dataset all_pos(2, 1, {1, 2}, {1, 1});
  CHECK_THROWS_AS(class_means(all_pos), degenerate_data_error);
}

TEST_CASE("objective at zero weight is exactly one") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset data = random_dataset(rng, 4 + rng.uniform_index(30), 5);
    const ClassMeans means = class_means(data);
    const Vector zero(data.d(), 0.0);
    CHECK(pairwise_objective(data, zero) == 1.0);
    CHECK(std::abs(erm_objective(data, means, zero) - 1.0) <= 1e-12);
  }
}

TEST_CASE("single pair with unit margin scores zero") {
  const Dataset data = two_point_dataset();
  const Vector w{1.0};
  CHECK(pairwise_objective(data, w) == 0.0);
  CHECK(erm_objective(data, class_means(data), w) == 0.0);
}

TEST_CASE("single-sum reformulation equals the pairwise objective") {
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 4 + rng.uniform_index(37);
    const std::size_t d = 1 + rng.uniform_index(10);
    const Dataset data = random_dataset(rng, n, d);
    const ClassMeans means = class_means(data);
    for (int rep = 0; rep < 5; ++rep) {
      const Vector w = random_weights(rng, d);
      const double pairwise = pairwise_objective(data, w);
      const double single = erm_objective(data, means, w);
      REQUIRE(std::abs(pairwise - single) <=
              1e-9 * std::max(1.0, std::abs(pairwise)));
    }
  }
}

TEST_CASE("gradient at zero is twice the mean gap") {
  Rng rng(23);
  const Dataset data = random_dataset(rng, 12, 4);
  const ClassMeans means = class_means(data);
  const Vector zero(4, 0.0);
  std::vector<std::size_t> block{1, 3, 5};
  const Vector grad = block_gradient(data, means, block, zero);
  for (std::size_t j = 0; j < 4; ++j) {
    REQUIRE(grad[j] ==
            Catch::Approx(2.0 * (means.mean_neg[j] - means.mean_pos[j]))
                .margin(1e-14));
  }
}

TEST_CASE("gradient rejects an empty block") {
  Rng rng(29);
  const Dataset data = random_dataset(rng, 6, 3);
  CHECK_THROWS_AS(
      block_gradient(data, class_means(data), {}, Vector(3, 0.0)),
      argument_error);
}

TEST_CASE("full gradient matches central finite differences") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6 + rng.uniform_index(20);
    const std::size_t d = 2 + rng.uniform_index(6);
    const Dataset data = random_dataset(rng, n, d);
    const ClassMeans means = class_means(data);
    const Vector w = random_weights(rng, d);
    const Vector grad = full_gradient(data, means, w);
    const Vector fd = finite_difference_gradient(data, means, w, 1e-5);
    for (std::size_t j = 0; j < d; ++j) {
      REQUIRE(std::abs(grad[j] - fd[j]) <=
              1e-5 * std::max(1.0, std::abs(grad[j])));
    }
  }
}

TEST_CASE("equal-size block gradients average to the full gradient") {
  Rng rng(37);
  const std::size_t n = 24;
  const std::size_t b = 6;
  const Dataset data = random_dataset(rng, n, 5);
  const ClassMeans means = class_means(data);
  const Vector w = random_weights(rng, 5);

  Rng block_rng(99);
  const BlockPartition part = make_blocks(n, b, block_rng);
  REQUIRE(part.count() == n / b);

  Vector averaged(5, 0.0);
  for (const auto& block : part.blocks) {
    const Vector grad = block_gradient(data, means, block, w);
    for (std::size_t j = 0; j < 5; ++j) averaged[j] += grad[j];
  }
  for (double& x : averaged) x /= static_cast<double>(part.count());

  const Vector full = full_gradient(data, means, w);
  for (std::size_t j = 0; j < 5; ++j) {
    REQUIRE(std::abs(averaged[j] - full[j]) <=
            1e-12 * std::max(1.0, std::abs(full[j])));
  }
}

TEST_CASE("hessian quadratic form on pinned examples") {
  Rng rng(41);
  const Dataset data = random_dataset(rng, 10, 4);
  const ClassMeans means = class_means(data);
  CHECK(hessian_quadratic_form(data, means, Vector(4, 0.0)) == 0.0);

  const Dataset pair = two_point_dataset();
  CHECK(hessian_quadratic_form(pair, class_means(pair), Vector{1.0}) == 2.0);
}

TEST_CASE("hessian quadratic form matches the second difference") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6 + rng.uniform_index(20);
    const std::size_t d = 2 + rng.uniform_index(6);
    const Dataset data = random_dataset(rng, n, d);
    const ClassMeans means = class_means(data);
    const Vector w = random_weights(rng, d);
    const Vector v = random_weights(rng, d);

    const double form = hessian_quadratic_form(data, means, v);
    const double t = 1e-3;
    Vector up = w;
    Vector down = w;
    for (std::size_t j = 0; j < d; ++j) {
      up[j] += t * v[j];
      down[j] -= t * v[j];
    }
    const double second = (erm_objective(data, means, up) -
                           2.0 * erm_objective(data, means, w) +
                           erm_objective(data, means, down)) /
                          (t * t);
    REQUIRE(std::abs(second - form) <= 1e-8 * std::max(1.0, std::abs(form)));
  }
}

TEST_CASE("F is exactly quadratic in its Taylor expansion") {
  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6 + rng.uniform_index(20);
    const std::size_t d = 2 + rng.uniform_index(6);
    const Dataset data = random_dataset(rng, n, d);
    const ClassMeans means = class_means(data);
    const Vector w = random_weights(rng, d);
    const Vector v = random_weights(rng, d);

    Vector shifted = w;
    for (std::size_t j = 0; j < d; ++j) shifted[j] += v[j];
    const double lhs = erm_objective(data, means, shifted);
    const double rhs = erm_objective(data, means, w) +
                       dot(full_gradient(data, means, w), v) +
                       0.5 * hessian_quadratic_form(data, means, v);
    REQUIRE(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("block hessian forms average to the full form on equal blocks") {
  Rng rng(53);
  const Dataset data = random_dataset(rng, 20, 4);
  const ClassMeans means = class_means(data);
  const Vector v = random_weights(rng, 4);

  Rng block_rng(5);
  const BlockPartition part = make_blocks(20, 5, block_rng);
  double averaged = 0.0;
  for (const auto& block : part.blocks) {
    averaged += block_hessian_quadratic_form(data, means, block, v);
  }
  averaged /= static_cast<double>(part.count());
  const double full = hessian_quadratic_form(data, means, v);
  REQUIRE(std::abs(averaged - full) <= 1e-12 * std::max(1.0, std::abs(full)));
}
