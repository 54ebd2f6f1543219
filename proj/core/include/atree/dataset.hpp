#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace atree {

using FeatureRow = std::span<const double>;

struct LabeledSample {
  std::vector<double> features;
  int label = 0;  // dense class id in [0, num_classes)
  double weight = 0.0;
};

/// Labeled feature vectors with dense class ids.
///
/// `label_names[k]` holds the original label of dense class `k`; class ids are
/// assigned by sorted order of the original labels. A Dataset is immutable
/// once built by one of the factory functions below.
class Dataset {
 public:
  Dataset() = default;

  /// Validates and takes ownership. Throws ValidationError when the samples
  /// are ragged, a label is out of range, or fewer than two classes exist.
  Dataset(std::vector<LabeledSample> samples, int num_classes,
          std::vector<std::int64_t> label_names);

  const std::vector<LabeledSample>& samples() const { return samples_; }
  const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int num_classes() const { return num_classes_; }
  std::size_t dimension() const { return dimension_; }
  const std::vector<std::int64_t>& label_names() const { return label_names_; }

  FeatureRow row(std::size_t i) const { return samples_[i].features; }
  std::vector<int> labels() const;
  std::vector<std::size_t> class_counts() const;
  double total_weight() const;

  /// Copy with weights rescaled to sum to one (uniform if all weights are 0).
  Dataset normalized() const;

  /// Restrict to the given classes (dense ids); classes are re-densified in
  /// the given order and label_names follow.
  Dataset select_classes(std::span<const int> classes) const;

  /// Re-express labels in terms of another label table, e.g. a test set
  /// against the label map stored with a model. Throws ValidationError when a
  /// label has no counterpart.
  Dataset remap_to(std::span<const std::int64_t> names) const;

 private:
  std::vector<LabeledSample> samples_;
  int num_classes_ = 0;
  std::size_t dimension_ = 0;
  std::vector<std::int64_t> label_names_;
};

/// Reads `label,f_1,...,f_d` rows. Labels are remapped to dense ids by sorted
/// order and weights start uniform at 1/N.
Dataset load_csv(const std::filesystem::path& path, bool has_header);
Dataset parse_csv(std::istream& in, bool has_header);

/// Writes the same format load_csv reads, original labels first.
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Two-class 2-D points: a far cluster of class 0 that any single line
/// separates from the rest, plus a strip of class 1 flanked on both sides by
/// class 0 with slightly overlapping edges. Needs at least 4 points.
Dataset generate_two_cluster_2d(std::size_t count, std::uint64_t seed);

/// Isotropic Gaussian blobs around seeded class means drawn uniformly from
/// [-1, 1]^dimension.
Dataset generate_gaussian_blobs(int num_classes, std::size_t per_class,
                                std::size_t dimension, double spread,
                                std::uint64_t seed);

/// Partition into (train, test). With `stratified`, each class contributes
/// round(fraction * count) samples to train, clamped so both sides keep at
/// least one. Training weights are renormalized to sum to one.
std::pair<Dataset, Dataset> split_train_test(const Dataset& data,
                                             double train_fraction,
                                             std::uint64_t seed,
                                             bool stratified);

}  // namespace atree
