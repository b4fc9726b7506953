#include "aiart/statcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aiart/error.hpp"

namespace aiart {

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

DescriptiveStats describe(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("describe: empty sample");
  const auto n = static_cast<double>(values.size());
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());

  DescriptiveStats stats;
  if (*lo == *hi) {
    stats.mean = *lo;
    return stats;
  }
  stats.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - stats.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  stats.variance = m2;
  if (m2 > 0.0) {
    stats.skewness = m3 / std::pow(m2, 1.5);
    stats.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return stats;
}

Histogram build_histogram(std::span<const double> values, std::size_t bin_count, double low,
                          double high) {
  if (bin_count == 0) throw InvalidInput("histogram needs at least one bin");
  if (!(high > low)) throw InvalidInput("histogram range must satisfy high > low");
  Histogram h{std::vector<std::uint64_t>(bin_count, 0), low, high};
  const double scale = static_cast<double>(bin_count) / (high - low);
  const auto last = static_cast<long long>(bin_count) - 1;
  for (double v : values) {
    const double pos = (v - low) * scale;
    long long bin = std::isnan(pos) ? 0 : static_cast<long long>(std::floor(std::clamp(pos, -1.0, static_cast<double>(bin_count))));
    bin = std::clamp(bin, 0LL, last);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

double shannon_entropy(std::span<const std::uint64_t> counts) {
  const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw InvalidInput("entropy of an empty histogram");
  const auto n = static_cast<double>(total);
  double entropy = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    entropy -= p * std::log2(p);
  }
  // -sum(p log p) for a single occupied bin is exactly 0; clear the -0.0 sign.
  return entropy == 0.0 ? 0.0 : entropy;
}

double shannon_entropy(const Histogram& histogram) { return shannon_entropy(histogram.counts); }

}  // namespace aiart
