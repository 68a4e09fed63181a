#pragma once

#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace beta_targets {

/// Dense column-major matrix. Columns are the natural unit here (parallelepiped
/// edges, Gram-Schmidt vectors), so a column is exposed as a contiguous span.
template <class T>
class BasicMatrix {
 public:
  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Builds from a list of columns.
  static BasicMatrix from_columns(const std::vector<std::vector<T>>& columns) {
    const std::size_t cols = columns.size();
    const std::size_t rows = cols == 0 ? 0 : columns.front().size();
    BasicMatrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j) {
      assert(columns[j].size() == rows);
      for (std::size_t i = 0; i < rows; ++i) m(i, j) = columns[j][i];
    }
    return m;
  }

  static BasicMatrix identity(std::size_t d) {
    BasicMatrix m(d, d, T{});
    for (std::size_t i = 0; i < d; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<T> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const T> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  std::vector<T> column_vector(std::size_t j) const { return {col(j).begin(), col(j).end()}; }

  const std::vector<T>& data() const { return data_; }

  template <class U>
  BasicMatrix<U> cast() const {
    BasicMatrix<U> out(rows_, cols_);
    for (std::size_t j = 0; j < cols_; ++j)
      for (std::size_t i = 0; i < rows_; ++i) out(i, j) = U((*this)(i, j));
    return out;
  }

  friend BasicMatrix operator*(const BasicMatrix& a, const BasicMatrix& b) {
    assert(a.cols_ == b.rows_);
    BasicMatrix out(a.rows_, b.cols_, T{});
    for (std::size_t j = 0; j < b.cols_; ++j)
      for (std::size_t k = 0; k < a.cols_; ++k)
        for (std::size_t i = 0; i < a.rows_; ++i) out(i, j) += a(i, k) * b(k, j);
    return out;
  }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  assert(a.size() == b.size());
  T acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template <class T>
T norm(std::span<const T> a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

}  // namespace beta_targets
