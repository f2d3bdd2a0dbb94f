#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "homlp/errors.hpp"

namespace homlp {

enum class MatrixKind { Sparse, UnitBlockAngular };

inline const char* matrix_kind_name(MatrixKind k) {
  return k == MatrixKind::Sparse ? "SparseCSC" : "UnitBlockAngular";
}

/// Constraint matrix seen through products only. The interior-point driver
/// never touches entries; backends downcast to the representation they need.
template <class T>
class AbstractMatrix {
 public:
  virtual ~AbstractMatrix() = default;
  virtual MatrixKind kind() const = 0;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual std::size_t nonzeros() const = 0;
  /// y <- alpha * A x + beta * y
  virtual void mul(std::span<const T> x, std::span<T> y, T alpha, T beta) const = 0;
  /// y <- alpha * A' x + beta * y
  virtual void mul_transpose(std::span<const T> x, std::span<T> y, T alpha, T beta) const = 0;
};

template <class T>
struct Triplet {
  std::size_t row;
  std::size_t col;
  T value;
};

/// Compressed sparse column matrix.
template <class T>
class SparseMatrix final : public AbstractMatrix<T> {
 public:
  SparseMatrix() : col_ptr_(1, 0) {}
  SparseMatrix(std::size_t m, std::size_t n) : m_(m), n_(n), col_ptr_(n + 1, 0) {}

  /// Duplicates are summed; explicit zeros (after summation) are dropped.
  static SparseMatrix from_triplets(std::size_t m, std::size_t n, std::vector<Triplet<T>> t) {
    for (const auto& e : t)
      if (e.row >= m || e.col >= n) throw PreconditionError("triplet index out of range");
    std::sort(t.begin(), t.end(), [](const Triplet<T>& a, const Triplet<T>& b) {
      return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    SparseMatrix A(m, n);
    for (std::size_t k = 0; k < t.size();) {
      std::size_t k2 = k;
      T sum = T(0);
      while (k2 < t.size() && t[k2].col == t[k].col && t[k2].row == t[k].row) sum += t[k2++].value;
      if (sum != T(0)) {
        A.row_idx_.push_back(t[k].row);
        A.values_.push_back(sum);
        ++A.col_ptr_[t[k].col + 1];
      }
      k = k2;
    }
    std::partial_sum(A.col_ptr_.begin(), A.col_ptr_.end(), A.col_ptr_.begin());
    return A;
  }

  MatrixKind kind() const override { return MatrixKind::Sparse; }
  std::size_t rows() const override { return m_; }
  std::size_t cols() const override { return n_; }
  std::size_t nonzeros() const override { return values_.size(); }

  void mul(std::span<const T> x, std::span<T> y, T alpha, T beta) const override {
    for (auto& v : y) v = beta == T(0) ? T(0) : v * beta;
    for (std::size_t j = 0; j < n_; ++j) {
      if (x[j] == T(0)) continue;
      const T xj = alpha * x[j];
      for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) y[row_idx_[p]] += values_[p] * xj;
    }
  }

  void mul_transpose(std::span<const T> x, std::span<T> y, T alpha, T beta) const override {
    for (std::size_t j = 0; j < n_; ++j) {
      T acc = T(0);
      for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) acc += values_[p] * x[row_idx_[p]];
      y[j] = (beta == T(0) ? T(0) : beta * y[j]) + alpha * acc;
    }
  }

  std::span<const std::size_t> col_ptr() const { return col_ptr_; }
  std::span<const std::size_t> row_idx() const { return row_idx_; }
  std::span<const T> values() const { return values_; }

  std::vector<Triplet<T>> triplets() const {
    std::vector<Triplet<T>> t;
    t.reserve(values_.size());
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) t.push_back({row_idx_[p], j, values_[p]});
    return t;
  }

  SparseMatrix transpose() const {
    auto t = triplets();
    for (auto& e : t) std::swap(e.row, e.col);
    return from_triplets(n_, m_, std::move(t));
  }

  T coeff(std::size_t i, std::size_t j) const {
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
      if (row_idx_[p] == i) return values_[p];
    return T(0);
  }

  /// Applies f to every stored value.
  template <class F>
  void transform_values(F f) {
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) values_[p] = f(row_idx_[p], j, values_[p]);
  }

  template <class U, class F>
  SparseMatrix<U> cast(F convert) const {
    std::vector<Triplet<U>> t;
    for (const auto& e : triplets()) t.push_back({e.row, e.col, convert(e.value)});
    return SparseMatrix<U>::from_triplets(m_, n_, std::move(t));
  }

 private:
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::size_t> row_idx_;
  std::vector<T> values_;
};

}  // namespace homlp
