#include "atree/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

#include "atree/error.hpp"
#include "atree/random.hpp"

namespace atree {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::string cell_error(std::size_t line_no, std::size_t column, std::string_view cell,
                       std::string_view what) {
  std::ostringstream msg;
  msg << "line " << line_no << ", column " << column << ": " << what << " '" << cell
      << "'";
  return msg.str();
}

std::int64_t parse_label(std::string_view cell, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw ValidationError(cell_error(line_no, 1, cell, "expected integer label, got"));
  }
  return value;
}

double parse_feature(std::string_view cell, std::size_t line_no, std::size_t column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw ValidationError(cell_error(line_no, column, cell, "expected finite number, got"));
  }
  return value;
}

void uniform_weights(std::vector<LabeledSample>& samples) {
  if (samples.empty()) return;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (auto& s : samples) s.weight = w;
}

Dataset densify(std::vector<LabeledSample> samples, const std::vector<std::int64_t>& raw) {
  std::vector<std::int64_t> names(raw);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  if (names.size() < 2) {
    throw ValidationError("dataset needs at least 2 distinct labels, found " +
                          std::to_string(names.size()));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto it = std::lower_bound(names.begin(), names.end(), raw[i]);
    samples[i].label = static_cast<int>(it - names.begin());
  }
  uniform_weights(samples);
  const int n = static_cast<int>(names.size());
  return Dataset(std::move(samples), n, std::move(names));
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

Dataset::Dataset(std::vector<LabeledSample> samples, int num_classes,
                 std::vector<std::int64_t> label_names)
    : samples_(std::move(samples)),
      num_classes_(num_classes),
      label_names_(std::move(label_names)) {
  if (num_classes_ < 2) throw ValidationError("num_classes must be at least 2");
  if (label_names_.empty()) {
    label_names_.resize(static_cast<std::size_t>(num_classes_));
    std::iota(label_names_.begin(), label_names_.end(), std::int64_t{0});
  }
  if (label_names_.size() != static_cast<std::size_t>(num_classes_)) {
    throw ValidationError("label_names size does not match num_classes");
  }
  if (samples_.empty()) throw ValidationError("dataset is empty");
  dimension_ = samples_.front().features.size();
  if (dimension_ == 0) throw ValidationError("dataset dimension must be at least 1");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.features.size() != dimension_) {
      throw ValidationError("sample " + std::to_string(i) + " has dimension " +
                            std::to_string(s.features.size()) + ", expected " +
                            std::to_string(dimension_));
    }
    if (s.label < 0 || s.label >= num_classes_) {
      throw ValidationError("sample " + std::to_string(i) + " has label out of range");
    }
    if (!(s.weight >= 0.0)) {
      throw ValidationError("sample " + std::to_string(i) + " has negative weight");
    }
  }
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.label);
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (const auto& s : samples_) ++counts[static_cast<std::size_t>(s.label)];
  return counts;
}

double Dataset::total_weight() const {
  double total = 0.0;
  for (const auto& s : samples_) total += s.weight;
  return total;
}

Dataset Dataset::normalized() const {
  Dataset copy = *this;
  const double total = total_weight();
  if (total > 0.0) {
    for (auto& s : copy.samples_) s.weight /= total;
  } else {
    uniform_weights(copy.samples_);
  }
  return copy;
}

Dataset Dataset::select_classes(std::span<const int> classes) const {
  std::vector<int> dense(static_cast<std::size_t>(num_classes_), -1);
  std::vector<std::int64_t> names;
  for (int c : classes) {
    if (c < 0 || c >= num_classes_) throw ValidationError("class id out of range");
    if (dense[static_cast<std::size_t>(c)] >= 0) continue;
    dense[static_cast<std::size_t>(c)] = static_cast<int>(names.size());
    names.push_back(label_names_[static_cast<std::size_t>(c)]);
  }
  std::vector<LabeledSample> kept;
  for (const auto& s : samples_) {
    const int d = dense[static_cast<std::size_t>(s.label)];
    if (d < 0) continue;
    LabeledSample copy = s;
    copy.label = d;
    kept.push_back(std::move(copy));
  }
  uniform_weights(kept);
  const int n = static_cast<int>(names.size());
  return Dataset(std::move(kept), n, std::move(names));
}

Dataset Dataset::remap_to(std::span<const std::int64_t> names) const {
  std::map<std::int64_t, int> index;
  for (std::size_t k = 0; k < names.size(); ++k) index[names[k]] = static_cast<int>(k);
  std::vector<LabeledSample> out = samples_;
  for (auto& s : out) {
    const std::int64_t original = label_names_[static_cast<std::size_t>(s.label)];
    auto it = index.find(original);
    if (it == index.end()) {
      throw ValidationError("label " + std::to_string(original) +
                            " is not known to the target label map");
    }
    s.label = it->second;
  }
  return Dataset(std::move(out), static_cast<int>(names.size()),
                 std::vector<std::int64_t>(names.begin(), names.end()));
}

Dataset parse_csv(std::istream& in, bool has_header) {
  std::vector<LabeledSample> samples;
  std::vector<std::int64_t> raw_labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cells = split_commas(view);
    if (cells.size() < 2) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": expected a label and at least one feature");
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ValidationError("line " + std::to_string(line_no) + ": ragged row with " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(width));
    }
    LabeledSample s;
    raw_labels.push_back(parse_label(cells[0], line_no));
    s.features.reserve(width - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      s.features.push_back(parse_feature(cells[c], line_no, c + 1));
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ValidationError("CSV contains no data rows");
  return densify(std::move(samples), raw_labels);
}

Dataset load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse_csv(in, has_header);
}

void write_csv(const Dataset& data, std::ostream& out) {
  std::string line;
  for (const auto& s : data.samples()) {
    line.clear();
    line += std::to_string(data.label_names()[static_cast<std::size_t>(s.label)]);
    for (double v : s.features) {
      line += ',';
      append_number(line, v);
    }
    line += '\n';
    out << line;
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  write_csv(data, out);
  if (!out) throw RuntimeError("write failed for " + path.string());
}

Dataset generate_two_cluster_2d(std::size_t count, std::uint64_t seed) {
  if (count < 4) throw ValidationError("two-cluster dataset needs count >= 4");
  Rng rng(seed);
  const std::size_t far = std::max<std::size_t>(1, count / 4);
  const std::size_t strip = std::max<std::size_t>(2, count / 2);
  const std::size_t flank = count - far - strip;

  std::vector<LabeledSample> samples;
  samples.reserve(count);
  for (std::size_t i = 0; i < far; ++i) {
    LabeledSample s;
    s.features = {6.0 + 0.5 * rng.normal(), 0.5 * rng.normal()};
    s.label = 0;
    samples.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < strip; ++i) {
    LabeledSample s;
    s.features = {rng.uniform(-1.0, 1.0) + 0.05 * rng.normal(), rng.uniform(-2.0, 2.0)};
    s.label = 1;
    samples.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < flank; ++i) {
    const double side = (i % 2 == 0) ? 1.0 : -1.0;
    LabeledSample s;
    s.features = {side * rng.uniform(0.95, 3.0) + 0.05 * rng.normal(),
                  rng.uniform(-2.0, 2.0)};
    s.label = 0;
    samples.push_back(std::move(s));
  }
  uniform_weights(samples);
  return Dataset(std::move(samples), 2, {0, 1});
}

Dataset generate_gaussian_blobs(int num_classes, std::size_t per_class,
                                std::size_t dimension, double spread,
                                std::uint64_t seed) {
  if (num_classes < 2) throw ValidationError("blobs need num_classes >= 2");
  if (per_class < 2) throw ValidationError("blobs need per_class >= 2");
  if (dimension < 1) throw ValidationError("blobs need dimension >= 1");
  if (!(spread >= 0.0) || !std::isfinite(spread)) {
    throw ValidationError("blob spread must be a finite nonnegative number");
  }
  Rng rng(seed);
  std::vector<std::vector<double>> means(static_cast<std::size_t>(num_classes));
  for (auto& mean : means) {
    mean.resize(dimension);
    for (auto& v : mean) v = rng.uniform(-1.0, 1.0);
  }
  std::vector<LabeledSample> samples;
  samples.reserve(static_cast<std::size_t>(num_classes) * per_class);
  for (int c = 0; c < num_classes; ++c) {
    const auto& mean = means[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < per_class; ++i) {
      LabeledSample s;
      s.features.resize(dimension);
      for (std::size_t j = 0; j < dimension; ++j) {
        s.features[j] = mean[j] + spread * rng.normal();
      }
      s.label = c;
      samples.push_back(std::move(s));
    }
  }
  uniform_weights(samples);
  return Dataset(std::move(samples), num_classes, {});
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double train_fraction,
                                             std::uint64_t seed, bool stratified) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> test_ids;
  auto take = [&](std::vector<std::size_t>& ids) {
    const double want = std::round(train_fraction * static_cast<double>(ids.size()));
    const std::size_t k =
        std::clamp<std::size_t>(static_cast<std::size_t>(want), 1, ids.size() - 1);
    rng.shuffle(ids.begin(), ids.end());
    train_ids.insert(train_ids.end(), ids.begin(), ids.begin() + static_cast<long>(k));
    test_ids.insert(test_ids.end(), ids.begin() + static_cast<long>(k), ids.end());
  };
  if (stratified) {
    std::vector<std::vector<std::size_t>> by_class(
        static_cast<std::size_t>(data.num_classes()));
    for (std::size_t i = 0; i < data.size(); ++i) {
      by_class[static_cast<std::size_t>(data[i].label)].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (by_class[c].size() == 1) {
        throw ValidationError("class " + std::to_string(data.label_names()[c]) +
                              " has a single sample; stratified split needs 2");
      }
      if (!by_class[c].empty()) take(by_class[c]);
    }
  } else {
    if (data.size() < 2) throw ValidationError("split needs at least 2 samples");
    std::vector<std::size_t> ids(data.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    take(ids);
  }
  std::sort(train_ids.begin(), train_ids.end());
  std::sort(test_ids.begin(), test_ids.end());
  auto gather = [&](const std::vector<std::size_t>& ids) {
    std::vector<LabeledSample> out;
    out.reserve(ids.size());
    for (std::size_t i : ids) out.push_back(data[i]);
    uniform_weights(out);
    return Dataset(std::move(out), data.num_classes(), data.label_names());
  };
  return {gather(train_ids), gather(test_ids)};
}

}  // namespace atree
