#pragma once

#include <cstdint>
#include <vector>

#include "neurolesion/errors.hpp"

namespace neurolesion {

using Vector = std::vector<double>;

// Minimal dense row-major matrix; all the linear algebra this project needs.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double& operator()(int r, int c) {
    return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }
  double operator()(int r, int c) const {
    return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }

  bool same_shape(const Matrix& other) const { return rows == other.rows && cols == other.cols; }

  bool operator==(const Matrix& other) const = default;
};

struct BoolMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> data;

  BoolMatrix() = default;
  BoolMatrix(int r, int c, bool fill = false)
      : rows(r), cols(c),
        data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill ? 1 : 0) {}

  void set(int r, int c, bool v) {
    data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)] = v ? 1 : 0;
  }
  bool get(int r, int c) const {
    return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)] != 0;
  }

  bool operator==(const BoolMatrix& other) const = default;
};

inline Vector matvec(const Matrix& m, const Vector& x) {
  if (static_cast<int>(x.size()) != m.cols) throw ShapeError("matvec: size mismatch");
  Vector out(static_cast<std::size_t>(m.rows), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    const double* row = m.data.data() + static_cast<std::size_t>(r) * m.cols;
    for (int c = 0; c < m.cols; ++c) acc += row[c] * x[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

// m^T x
inline Vector matvec_t(const Matrix& m, const Vector& x) {
  if (static_cast<int>(x.size()) != m.rows) throw ShapeError("matvec_t: size mismatch");
  Vector out(static_cast<std::size_t>(m.cols), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.data.data() + static_cast<std::size_t>(r) * m.cols;
    for (int c = 0; c < m.cols; ++c) out[static_cast<std::size_t>(c)] += row[c] * x[static_cast<std::size_t>(r)];
  }
  return out;
}

}  // namespace neurolesion
