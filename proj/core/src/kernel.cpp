#include "atree/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "atree/error.hpp"

namespace atree {

namespace {

double parse_gamma(const std::string& text, const std::string& whole) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("bad kernel gamma in '" + whole + "'");
  }
  return value;
}

std::string format_gamma(double g) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, g);
  return std::string(buf, ptr);
}

}  // namespace

void KernelSpec::validate() const {
  if ((kind == Kind::rbf || kind == Kind::chi_square) && !(gamma > 0.0 && std::isfinite(gamma))) {
    throw ValidationError("kernel gamma must be positive");
  }
}

std::string KernelSpec::to_string() const {
  switch (kind) {
    case Kind::linear: return "linear";
    case Kind::rbf: return "rbf:" + format_gamma(gamma);
    case Kind::chi_square: return "chi2:" + format_gamma(gamma);
    case Kind::histogram_intersection: return "intersection";
  }
  return "linear";
}

KernelSpec KernelSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  KernelSpec spec;
  if (name == "linear") {
    spec = linear();
  } else if (name == "intersection" || name == "histogram_intersection") {
    spec = histogram_intersection();
  } else if (name == "rbf") {
    spec = rbf(arg.empty() ? 1.0 : parse_gamma(arg, text));
  } else if (name == "chi2" || name == "chi_square") {
    spec = chi_square(arg.empty() ? 1.0 : parse_gamma(arg, text));
  } else {
    throw ValidationError("unknown kernel '" + text +
                          "' (expected linear, rbf:<g>, chi2:<g> or intersection)");
  }
  spec.validate();
  return spec;
}

double kernel_value(const KernelSpec& kernel, FeatureRow x, FeatureRow z) {
  const std::size_t d = x.size();
  double acc = 0.0;
  switch (kernel.kind) {
    case KernelSpec::Kind::linear:
      for (std::size_t j = 0; j < d; ++j) acc += x[j] * z[j];
      return acc;
    case KernelSpec::Kind::rbf:
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = x[j] - z[j];
        acc += diff * diff;
      }
      return std::exp(-kernel.gamma * acc);
    case KernelSpec::Kind::chi_square:
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = x[j] - z[j];
        acc += diff * diff / (x[j] + z[j] + kChiSquareEpsilon);
      }
      return std::exp(-kernel.gamma * acc);
    case KernelSpec::Kind::histogram_intersection:
      for (std::size_t j = 0; j < d; ++j) acc += std::min(x[j], z[j]);
      return acc;
  }
  return acc;
}

void check_kernel_domain(const KernelSpec& kernel, FeatureRow x) {
  if (!kernel.requires_nonnegative()) return;
  for (double v : x) {
    if (v < 0.0) {
      throw ValidationError("kernel " + kernel.to_string() +
                            " requires nonnegative features");
    }
  }
}

void KernelEvalSession::begin_instance() {
  cache_.clear();
  instance_computations_ = 0;
  instance_requests_ = 0;
  ++instances_;
}

double KernelEvalSession::evaluate(const KernelSpec& kernel, std::size_t sv_id,
                                   FeatureRow sv, FeatureRow x) {
  if (!has_kernel_) {
    kernel_ = kernel;
    has_kernel_ = true;
  } else if (!(kernel_ == kernel)) {
    throw ValidationError("one evaluation session cannot mix kernels");
  }
  ++instance_requests_;
  ++total_requests_;
  if (caching_) {
    if (auto it = cache_.find(sv_id); it != cache_.end()) return it->second;
  }
  const double value = kernel_value(kernel, sv, x);
  ++instance_computations_;
  ++total_computations_;
  if (caching_) cache_.emplace(sv_id, value);
  return value;
}

}  // namespace atree
