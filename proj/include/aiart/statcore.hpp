#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace aiart {

/// Population moments of a sample. Kurtosis is Fisher excess (normal -> 0).
/// A zero-variance sample reports skewness = kurtosis = 0.
struct DescriptiveStats {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

/// Equal-width histogram over [low, high].
struct Histogram {
  std::vector<std::uint64_t> counts;
  double low = 0.0;
  double high = 1.0;

  std::size_t bin_count() const { return counts.size(); }
  std::uint64_t total() const;
};

/// Throws InvalidInput on an empty sample.
DescriptiveStats describe(std::span<const double> values);

/// Values equal to `high` land in the last bin; out-of-range values clamp to
/// the nearest bin. Requires high > low and bin_count >= 1.
Histogram build_histogram(std::span<const double> values, std::size_t bin_count, double low,
                          double high);

/// Shannon entropy in bits. Throws InvalidInput when every count is zero.
double shannon_entropy(const Histogram& histogram);
double shannon_entropy(std::span<const std::uint64_t> counts);

}  // namespace aiart
