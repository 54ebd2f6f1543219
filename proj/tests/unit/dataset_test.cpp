#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "atree/dataset.hpp"
#include "atree/error.hpp"
#include "atree/random.hpp"
#include "../support/temp_dir.hpp"

using namespace atree;

namespace {

Dataset parse(const std::string& text, bool header = false) {
  std::istringstream in(text);
  return parse_csv(in, header);
}

std::vector<std::pair<int, std::vector<double>>> multiset(const Dataset& d) {
  std::vector<std::pair<int, std::vector<double>>> out;
  for (const auto& s : d.samples()) out.emplace_back(s.label, s.features);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("load_csv reads rows with uniform weights") {
  testing::TempDir dir;
  testing::write_file(dir / "d.csv", "0,1.0,2.0\n1,3.0,4.0\n");
  const Dataset d = load_csv(dir / "d.csv", false);
  CHECK(d.size() == 2);
  CHECK(d.num_classes() == 2);
  CHECK(d.dimension() == 2);
  CHECK(d[0].weight == 0.5);
  CHECK(d[1].weight == 0.5);
  CHECK(d[1].features == std::vector<double>{3.0, 4.0});
}

TEST_CASE("labels are remapped densely by sorted order") {
  const Dataset d = parse("7,1\n3,2\n7,3\n");
  CHECK(d.label_names() == std::vector<std::int64_t>{3, 7});
  CHECK(d.labels() == std::vector<int>{1, 0, 1});
}

TEST_CASE("header row is skipped when requested") {
  const Dataset d = parse("label,a,b\n0,1,2\n1,3,4\n", true);
  CHECK(d.size() == 2);
}

TEST_CASE("csv errors") {
  CHECK_THROWS_AS(parse(""), ValidationError);
  CHECK_THROWS_AS(parse("0,1\n0,2\n"), ValidationError);  // single label
  try {
    parse("0,1,2\n1,3\n");
    FAIL("expected ragged-row error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("0,1,abc\n1,3,4\n"), ValidationError);
  CHECK_THROWS_AS(parse("x,1\n1,3\n"), ValidationError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", false), ValidationError);
}

TEST_CASE("write_csv round-trips through parse_csv exactly") {
  const Dataset d = generate_gaussian_blobs(3, 5, 4, 0.7, 11);
  std::ostringstream out;
  write_csv(d, out);
  const Dataset back = parse(out.str());
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back[i].features == d[i].features);
    CHECK(back[i].label == d[i].label);
  }
}

TEST_CASE("two-cluster generator") {
  const Dataset d = generate_two_cluster_2d(3000, 1);
  CHECK(d.size() == 3000);
  CHECK(d.num_classes() == 2);
  CHECK(d.dimension() == 2);
  const Dataset again = generate_two_cluster_2d(3000, 1);
  CHECK(multiset(d) == multiset(again));
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i].features == again[i].features);

  const Dataset tiny = generate_two_cluster_2d(4, 9);
  CHECK(tiny.size() == 4);
  const auto counts = tiny.class_counts();
  CHECK(counts[0] >= 1);
  CHECK(counts[1] >= 1);
  CHECK_THROWS_AS(generate_two_cluster_2d(3, 1), ValidationError);
}

TEST_CASE("two-cluster generator has a linearly separable class-0 group") {
  const Dataset d = generate_two_cluster_2d(3000, 1);
  std::size_t far = 0;
  for (const auto& s : d.samples()) {
    if (s.features[0] > 4.0) {
      CHECK(s.label == 0);
      ++far;
    }
  }
  CHECK(far >= 700);
  // Class 1 is flanked by class 0 on both sides of the x axis.
  double c1_min = 1e9, c1_max = -1e9;
  std::size_t left_flank = 0, right_flank = 0;
  for (const auto& s : d.samples()) {
    if (s.label == 1) {
      c1_min = std::min(c1_min, s.features[0]);
      c1_max = std::max(c1_max, s.features[0]);
    }
  }
  for (const auto& s : d.samples()) {
    if (s.label == 0 && s.features[0] < c1_min) ++left_flank;
    if (s.label == 0 && s.features[0] > c1_max && s.features[0] < 4.0) ++right_flank;
  }
  CHECK(left_flank > 100);
  CHECK(right_flank > 100);
}

TEST_CASE("gaussian blobs") {
  const Dataset d = generate_gaussian_blobs(20, 100, 16, 0.5, 7);
  CHECK(d.size() == 2000);
  CHECK(d.num_classes() == 20);
  CHECK(d.dimension() == 16);
  CHECK(generate_gaussian_blobs(2, 2, 1, 1.0, 3).size() == 4);

  const Dataset a = generate_gaussian_blobs(4, 10, 3, 0.3, 5);
  const Dataset b = generate_gaussian_blobs(4, 10, 3, 0.3, 5);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].features == b[i].features);

  // Zero spread: every sample sits exactly on its class mean.
  const Dataset z = generate_gaussian_blobs(5, 6, 3, 0.0, 2);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const std::size_t first = static_cast<std::size_t>(z[i].label) * 6;
    CHECK(z[i].features == z[first].features);
  }

  CHECK_THROWS_AS(generate_gaussian_blobs(1, 10, 2, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(generate_gaussian_blobs(3, 1, 2, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(generate_gaussian_blobs(3, 4, 0, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(generate_gaussian_blobs(3, 4, 2, -1.0, 1), ValidationError);
}

TEST_CASE("stratified split follows the 40/40 protocol") {
  const Dataset d = generate_gaussian_blobs(5, 80, 2, 1.0, 4);
  auto [train, test] = split_train_test(d, 0.5, 9, true);
  for (auto c : train.class_counts()) CHECK(c == 40);
  for (auto c : test.class_counts()) CHECK(c == 40);
  CHECK(std::abs(train.total_weight() - 1.0) <= 1e-12);
}

TEST_CASE("smallest stratified split and single-sample classes") {
  const Dataset d = generate_gaussian_blobs(3, 2, 2, 1.0, 4);
  auto [train, test] = split_train_test(d, 0.5, 1, true);
  for (auto c : train.class_counts()) CHECK(c == 1);
  for (auto c : test.class_counts()) CHECK(c == 1);

  std::vector<LabeledSample> s = {{{0.0}, 0, 1.0}, {{1.0}, 1, 1.0}, {{2.0}, 1, 1.0}};
  const Dataset lonely(s, 2, {});
  CHECK_THROWS_AS(split_train_test(lonely, 0.5, 1, true), ValidationError);
  CHECK_THROWS_AS(split_train_test(d, 1.0, 1, true), ValidationError);
}

TEST_CASE("split is an exact partition (property)") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int classes = 2 + static_cast<int>(rng.below(5));
    const std::size_t per = 2 + rng.below(20);
    const Dataset d = generate_gaussian_blobs(classes, per, 1 + rng.below(4), 1.0, rng.below(1000));
    const double fraction = rng.uniform(0.1, 0.9);
    const bool stratified = rng.below(2) == 0;
    auto [train, test] = split_train_test(d, fraction, trial, stratified);
    auto all = multiset(train);
    auto rest = multiset(test);
    all.insert(all.end(), rest.begin(), rest.end());
    std::sort(all.begin(), all.end());
    CHECK(all == multiset(d));
    CHECK(std::abs(train.total_weight() - 1.0) <= 1e-12);
  }
}

TEST_CASE("remap_to and select_classes keep original labels") {
  const Dataset d = parse("10,1\n20,2\n30,3\n");
  const Dataset sub = d.select_classes(std::vector<int>{2, 0});
  CHECK(sub.label_names() == std::vector<std::int64_t>{30, 10});
  CHECK(sub.labels() == std::vector<int>{1, 0});
  const Dataset test = parse("30,5\n10,6\n");
  const Dataset mapped = test.remap_to(d.label_names());
  CHECK(mapped.labels() == std::vector<int>{2, 0});
  const Dataset unknown = parse("40,5\n10,6\n");
  CHECK_THROWS_AS(unknown.remap_to(d.label_names()), ValidationError);
}
