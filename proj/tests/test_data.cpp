#include <catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "shtauc/libsvm.hpp"
#include "shtauc/splits.hpp"
#include "shtauc/synthetic.hpp"

using namespace shtauc;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("generator produces the exact label counts") {
  SyntheticSpec spec;
  spec.n = 1000;
  spec.d = 50;
  spec.k_star = 20;
  spec.r = 0.05;
  spec.seed = 1;
  auto [data, truth] = generate_synthetic(spec);
  CHECK(data.n_pos() == 50);
  CHECK(data.n_neg() == 950);
  CHECK(truth.support.size() == 20);
  for (std::size_t i : truth.support.indices) REQUIRE(i < spec.d);
}

TEST_CASE("generator rejects invalid specs") {
  SyntheticSpec spec;
  spec.n = 100;
  spec.d = 10;
  spec.k_star = 11;
  spec.r = 0.1;
  CHECK_THROWS_AS(generate_synthetic(spec), argument_error);
  spec.k_star = 5;
  spec.r = 0.7;
  CHECK_THROWS_AS(generate_synthetic(spec), argument_error);
  spec.r = 0.001;  // round(r n) = 0
  CHECK_THROWS_AS(generate_synthetic(spec), argument_error);
}

TEST_CASE("planted coordinates carry the signal mean") {
  SyntheticSpec spec;
  spec.n = 2000;
  spec.d = 100;
  spec.k_star = 10;
  spec.r = 0.5;
  spec.mu = 0.3;
  spec.seed = 42;
  auto [data, truth] = generate_synthetic(spec);
  const std::size_t n_pos = data.n_pos();
  const double tolerance = 3.0 / std::sqrt(static_cast<double>(n_pos));

  // On-support positive means sit near mu, off-support near zero, and
  // negative-sample means near zero (CLT bands; the seed is fixed).
  Vector pos_mean(spec.d, 0.0);
  Vector neg_mean(spec.d, 0.0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto x = data.row(i);
    Vector& target = data.label(i) == 1 ? pos_mean : neg_mean;
    for (std::size_t j = 0; j < spec.d; ++j) target[j] += x[j];
  }
  for (std::size_t j = 0; j < spec.d; ++j) {
    pos_mean[j] /= static_cast<double>(data.n_pos());
    neg_mean[j] /= static_cast<double>(data.n_neg());
  }
  for (std::size_t j = 0; j < spec.d; ++j) {
    if (truth.support.contains(j)) {
      REQUIRE(std::abs(pos_mean[j] - spec.mu) <= tolerance);
    } else {
      REQUIRE(std::abs(pos_mean[j]) <= tolerance);
    }
    REQUIRE(std::abs(neg_mean[j]) <=
            3.0 / std::sqrt(static_cast<double>(data.n_neg())));
  }
}

TEST_CASE("matched test sets carry the signal on the given support") {
  SyntheticSpec spec;
  spec.n = 1500;
  spec.d = 40;
  spec.k_star = 6;
  spec.r = 0.5;
  spec.mu = 0.4;
  spec.seed = 77;
  auto [train, truth] = generate_synthetic(spec);

  SyntheticSpec test_spec = spec;
  test_spec.seed = 78;
  const Dataset test = generate_synthetic_on_support(test_spec, truth.support);
  const ClassMeans means = class_means(test);
  const double tolerance = 3.0 / std::sqrt(static_cast<double>(test.n_pos()));
  for (std::size_t j = 0; j < spec.d; ++j) {
    if (truth.support.contains(j)) {
      REQUIRE(std::abs(means.mean_pos[j] - spec.mu) <= tolerance);
    } else {
      REQUIRE(std::abs(means.mean_pos[j]) <= tolerance);
    }
  }

  // A support of the wrong size is rejected.
  test_spec.k_star = 5;
  CHECK_THROWS_AS(generate_synthetic_on_support(test_spec, truth.support),
                  argument_error);
}

TEST_CASE("generation is deterministic in the seed") {
  SyntheticSpec spec;
  spec.n = 60;
  spec.d = 30;
  spec.k_star = 5;
  spec.r = 0.25;
  spec.seed = 7;
  auto [a, truth_a] = generate_synthetic(spec);
  auto [b, truth_b] = generate_synthetic(spec);
  CHECK(a.features() == b.features());
  CHECK(a.labels() == b.labels());
  CHECK(truth_a.support.indices == truth_b.support.indices);

  spec.seed = 8;
  auto [c, truth_c] = generate_synthetic(spec);
  CHECK(a.features() != c.features());
}

TEST_CASE("libsvm parses the documented line format") {
  const auto path = temp_file("shtauc_test_basic.libsvm");
  write_file(path, "+1 1:0.5 3:2\n-1 2:-1.5\n");
  const auto loaded = load_libsvm(path.string());
  CHECK_FALSE(loaded.mapped_binary_labels);
  REQUIRE(loaded.data.n() == 2);
  REQUIRE(loaded.data.d() == 3);
  CHECK(loaded.data.label(0) == 1);
  CHECK(loaded.data.label(1) == -1);
  const auto row0 = loaded.data.row(0);
  CHECK(Vector(row0.begin(), row0.end()) == Vector{0.5, 0.0, 2.0});
  const auto row1 = loaded.data.row(1);
  CHECK(Vector(row1.begin(), row1.end()) == Vector{0.0, -1.5, 0.0});
}

TEST_CASE("libsvm maps 0/1 labels with a warning flag") {
  const auto path = temp_file("shtauc_test_01.libsvm");
  write_file(path, "1 1:1\n0 1:-1\n");
  const auto loaded = load_libsvm(path.string());
  CHECK(loaded.mapped_binary_labels);
  CHECK(loaded.data.label(0) == 1);
  CHECK(loaded.data.label(1) == -1);
}

TEST_CASE("libsvm rejects malformed input with line numbers") {
  const auto path = temp_file("shtauc_test_bad.libsvm");

  write_file(path, "+1 1:0.5\n+1 nonsense\n");
  try {
    load_libsvm(path.string());
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line == 2);
  }

  write_file(path, "+3 1:0.5\n");
  CHECK_THROWS_AS(load_libsvm(path.string()), label_error);

  write_file(path, "");
  CHECK_THROWS_AS(load_libsvm(path.string()), degenerate_data_error);
}

TEST_CASE("libsvm round-trips datasets exactly") {
  Rng rng(99);
  const Dataset data = testing_oracles::random_dataset(rng, 25, 12);
  const auto path = temp_file("shtauc_test_roundtrip.libsvm");
  save_libsvm(data, path.string());
  const auto loaded = load_libsvm(path.string(), data.d());
  CHECK(loaded.data.n() == data.n());
  CHECK(loaded.data.d() == data.d());
  CHECK(loaded.data.features() == data.features());
  CHECK(loaded.data.labels() == data.labels());
}

TEST_CASE("d_hint pads trailing all-zero columns") {
  const auto path = temp_file("shtauc_test_hint.libsvm");
  write_file(path, "+1 1:1\n-1 1:2\n");
  CHECK(load_libsvm(path.string(), 5).data.d() == 5);
  CHECK(load_libsvm(path.string(), 1).data.d() == 1);
}

TEST_CASE("stratified folds balance tiny datasets exactly") {
  // 5 positives + 5 negatives, 5 folds -> one of each per test fold.
  std::vector<double> features(10, 0.0);
  std::vector<std::int8_t> labels{1, 1, 1, 1, 1, -1, -1, -1, -1, -1};
  const Dataset data(10, 1, std::move(features), std::move(labels));
  const auto splits = split_and_shuffle(data, 5, 3);
  REQUIRE(splits.size() == 5);
  std::vector<char> seen(10, 0);
  for (const auto& split : splits) {
    REQUIRE(split.test.size() == 2);
    std::size_t pos = 0;
    for (std::size_t i : split.test) {
      pos += data.label(i) == 1;
      seen[i] += 1;
    }
    REQUIRE(pos == 1);
    REQUIRE(split.train.size() == 8);
  }
  for (char count : seen) REQUIRE(count == 1);  // test folds partition [0,n)
}

TEST_CASE("fold stratification stays within one member per class") {
  Rng rng(3);
  const Dataset data = testing_oracles::random_dataset(rng, 103, 2);
  const std::size_t folds = 4;
  const auto splits = split_and_shuffle(data, folds, 11);
  std::vector<std::size_t> pos_counts;
  std::vector<std::size_t> neg_counts;
  for (const auto& split : splits) {
    std::size_t pos = 0;
    for (std::size_t i : split.test) pos += data.label(i) == 1;
    pos_counts.push_back(pos);
    neg_counts.push_back(split.test.size() - pos);
  }
  const auto [pos_min, pos_max] =
      std::minmax_element(pos_counts.begin(), pos_counts.end());
  const auto [neg_min, neg_max] =
      std::minmax_element(neg_counts.begin(), neg_counts.end());
  CHECK(*pos_max - *pos_min <= 1);
  CHECK(*neg_max - *neg_min <= 1);
}

TEST_CASE("folds are deterministic in the trial seed") {
  Rng rng(5);
  const Dataset data = testing_oracles::random_dataset(rng, 40, 2);
  const auto a = split_and_shuffle(data, 5, 21);
  const auto b = split_and_shuffle(data, 5, 21);
  const auto c = split_and_shuffle(data, 5, 22);
  for (std::size_t f = 0; f < 5; ++f) {
    CHECK(a[f].test == b[f].test);
    CHECK(a[f].train == b[f].train);
  }
  bool any_difference = false;
  for (std::size_t f = 0; f < 5; ++f) any_difference |= a[f].test != c[f].test;
  CHECK(any_difference);
}

TEST_CASE("splits reject classes smaller than the fold count") {
  std::vector<double> features(6, 0.0);
  std::vector<std::int8_t> labels{1, 1, -1, -1, -1, -1};
  const Dataset data(6, 1, std::move(features), std::move(labels));
  CHECK_THROWS_AS(split_and_shuffle(data, 3, 1), degenerate_data_error);
  CHECK_THROWS_AS(split_and_shuffle(data, 1, 1), argument_error);
}
