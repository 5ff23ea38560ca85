#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace symmix {

/// Ordered collection of finite observations with cached summaries.
class Sample {
public:
  /// Throws DomainError when values is empty or holds a non-finite entry.
  explicit Sample(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double mean() const noexcept { return mean_; }
  /// Divisor n.
  double variance() const noexcept { return variance_; }
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  double median() const noexcept { return median_; }
  /// Median absolute deviation from the median (unscaled).
  double mad() const noexcept { return mad_; }

  /// Sample with every value mapped to scale * x + shift.
  Sample affine(double scale, double shift) const;

private:
  std::vector<double> values_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
  double median_ = 0.0;
  double mad_ = 0.0;
};

}  // namespace symmix
