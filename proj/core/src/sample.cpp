#include "symmix/sample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "symmix/error.hpp"

namespace symmix {
namespace {

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::ranges::nth_element(v, v.begin() + static_cast<std::ptrdiff_t>(mid));
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("sample must contain at least one observation");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw DomainError("non-finite observation at index " + std::to_string(i));
  }
  const double n = static_cast<double>(values_.size());
  double sum = 0.0;
  for (double x : values_) sum += x;
  mean_ = sum / n;
  double ss = 0.0;
  for (double x : values_) ss += (x - mean_) * (x - mean_);
  variance_ = ss / n;
  const auto [lo, hi] = std::ranges::minmax_element(values_);
  min_ = *lo;
  max_ = *hi;
  median_ = median_of(values_);
  std::vector<double> dev(values_.size());
  std::ranges::transform(values_, dev.begin(), [this](double x) { return std::abs(x - median_); });
  mad_ = median_of(std::move(dev));
}

Sample Sample::affine(double scale, double shift) const {
  std::vector<double> out(values_.size());
  std::ranges::transform(values_, out.begin(), [=](double x) { return scale * x + shift; });
  return Sample(std::move(out));
}

}  // namespace symmix
