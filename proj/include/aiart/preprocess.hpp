#pragma once

#include <vector>

#include "aiart/matrix.hpp"

namespace aiart {

/// Per-column standardization fitted on training rows only. Columns whose
/// population std is below 1e-12 keep std = 1 so they map to zero.
struct Scaler {
  std::vector<double> means;
  std::vector<double> stds;

  static Scaler fit(const Matrix& train_rows);

  std::size_t width() const { return means.size(); }
  Matrix transform(const Matrix& rows) const;
  Matrix inverse_transform(const Matrix& rows) const;
  std::vector<double> transform_row(std::span<const double> row) const;

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

}  // namespace aiart
