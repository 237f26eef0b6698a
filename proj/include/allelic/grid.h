#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace allelic {

// Dense (k, l) array with k the clone index (rows) and l the mutant index
// (columns). Reads outside the stored box return zero.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_{rows}, cols_{cols}, data_(rows * cols, fill) {}

  auto rows() const -> std::size_t { return rows_; }
  auto cols() const -> std::size_t { return cols_; }
  auto empty() const -> bool { return data_.empty(); }

  auto operator()(std::size_t k, std::size_t l) -> T& {
    assert(k < rows_ && l < cols_);
    return data_[k * cols_ + l];
  }
  auto operator()(std::size_t k, std::size_t l) const -> const T& {
    assert(k < rows_ && l < cols_);
    return data_[k * cols_ + l];
  }

  auto at(std::size_t k, std::size_t l) const -> T {
    if (k >= rows_ || l >= cols_) return T(0);
    return data_[k * cols_ + l];
  }

  auto contains(std::size_t k, std::size_t l) const -> bool { return k < rows_ && l < cols_; }

  auto sum() const -> T {
    auto total = T(0);
    for (const auto& x : data_) total += x;
    return total;
  }

  auto values() const -> std::span<const T> { return data_; }

  friend auto operator==(const Grid&, const Grid&) -> bool = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Direct 2-D convolution, cropped to at most max_rows x max_cols.
template <typename T>
auto convolve(const Grid<T>& a, const Grid<T>& b, std::size_t max_rows, std::size_t max_cols)
    -> Grid<T> {
  if (a.empty() || b.empty()) return {};
  auto rows = std::min(a.rows() + b.rows() - 1, max_rows);
  auto cols = std::min(a.cols() + b.cols() - 1, max_cols);
  auto out = Grid<T>{rows, cols};
  for (auto i = std::size_t{0}; i < a.rows() && i < rows; ++i) {
    for (auto j = std::size_t{0}; j < a.cols() && j < cols; ++j) {
      const auto& x = a(i, j);
      if (x == 0) continue;
      auto k_end = std::min(b.rows(), rows - i);
      auto l_end = std::min(b.cols(), cols - j);
      for (auto k = std::size_t{0}; k < k_end; ++k) {
        for (auto l = std::size_t{0}; l < l_end; ++l) {
          const auto& y = b(k, l);
          if (y == 0) continue;
          out(i + k, j + l) += x * y;
        }
      }
    }
  }
  return out;
}

template <typename T>
auto convolve(const Grid<T>& a, const Grid<T>& b) -> Grid<T> {
  return convolve(a, b, a.rows() + b.rows(), a.cols() + b.cols());
}

// Direct 1-D convolution, cropped to max_len entries.
template <typename T>
auto convolve(std::span<const T> a, std::span<const T> b, std::size_t max_len) -> std::vector<T> {
  if (a.empty() || b.empty()) return {};
  auto len = std::min(a.size() + b.size() - 1, max_len);
  auto out = std::vector<T>(len, T(0));
  for (auto i = std::size_t{0}; i < a.size() && i < len; ++i) {
    if (a[i] == 0) continue;
    auto j_end = std::min(b.size(), len - i);
    for (auto j = std::size_t{0}; j < j_end; ++j) {
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

}  // namespace allelic
