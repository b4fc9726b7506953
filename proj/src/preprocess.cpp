#include "aiart/preprocess.hpp"

#include <cmath>
#include <string>

#include "aiart/error.hpp"

namespace aiart {

Scaler Scaler::fit(const Matrix& train_rows) {
  if (train_rows.rows() < 2) throw InvalidInput("scaler needs at least 2 rows");
  const auto n = static_cast<double>(train_rows.rows());
  Scaler s;
  s.means.assign(train_rows.cols(), 0.0);
  s.stds.assign(train_rows.cols(), 0.0);
  for (std::size_t r = 0; r < train_rows.rows(); ++r)
    for (std::size_t c = 0; c < train_rows.cols(); ++c) s.means[c] += train_rows(r, c);
  for (auto& m : s.means) m /= n;
  for (std::size_t r = 0; r < train_rows.rows(); ++r)
    for (std::size_t c = 0; c < train_rows.cols(); ++c) {
      const double d = train_rows(r, c) - s.means[c];
      s.stds[c] += d * d;
    }
  for (auto& sd : s.stds) {
    sd = std::sqrt(sd / n);
    if (!(sd >= 1e-12)) sd = 1.0;
  }
  return s;
}

namespace {

void check_width(const Scaler& s, std::size_t cols) {
  if (cols != s.width())
    throw ShapeError("scaler fitted on " + std::to_string(s.width()) + " columns, got " +
                     std::to_string(cols));
}

}  // namespace

Matrix Scaler::transform(const Matrix& rows) const {
  check_width(*this, rows.cols());
  Matrix out(rows.rows(), rows.cols());
  for (std::size_t r = 0; r < rows.rows(); ++r)
    for (std::size_t c = 0; c < rows.cols(); ++c) out(r, c) = (rows(r, c) - means[c]) / stds[c];
  return out;
}

Matrix Scaler::inverse_transform(const Matrix& rows) const {
  check_width(*this, rows.cols());
  Matrix out(rows.rows(), rows.cols());
  for (std::size_t r = 0; r < rows.rows(); ++r)
    for (std::size_t c = 0; c < rows.cols(); ++c) out(r, c) = rows(r, c) * stds[c] + means[c];
  return out;
}

std::vector<double> Scaler::transform_row(std::span<const double> row) const {
  check_width(*this, row.size());
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - means[c]) / stds[c];
  return out;
}

}  // namespace aiart
