#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "homlp/errors.hpp"
#include "homlp/scalar.hpp"

namespace homlp {

/// Row-major dense square matrix with an in-place LDL' factorization.
template <class T>
class DenseSymmetric {
 public:
  DenseSymmetric() = default;
  explicit DenseSymmetric(std::size_t n) : n_(n), a_(n * n, T(0)), d_(n, T(0)) {}

  std::size_t size() const { return n_; }
  T& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  void fill(const T& v) { std::fill(a_.begin(), a_.end(), v); }

  /// Overwrites the lower triangle with unit L and stores D; only the lower
  /// triangle of the input is read. Requires every pivot to be positive.
  void factor_positive() {
    for (std::size_t j = 0; j < n_; ++j) {
      T dj = (*this)(j, j);
      for (std::size_t k = 0; k < j; ++k) {
        const T ljk = (*this)(j, k);
        dj -= ljk * ljk * d_[k];
      }
      if (!(dj > T(0)) || !is_finite(dj)) throw NumericalBreakdown("dense LDL': non-positive pivot");
      d_[j] = dj;
      for (std::size_t i = j + 1; i < n_; ++i) {
        T v = (*this)(i, j);
        const T* li = &a_[i * n_];
        const T* lj = &a_[j * n_];
        for (std::size_t k = 0; k < j; ++k) v -= li[k] * lj[k] * d_[k];
        (*this)(i, j) = v / dj;
      }
    }
  }

  /// Solves in place with the factor from factor_positive().
  void solve(std::span<T> x) const {
    for (std::size_t i = 0; i < n_; ++i) {
      T v = x[i];
      const T* li = &a_[i * n_];
      for (std::size_t k = 0; k < i; ++k) v -= li[k] * x[k];
      x[i] = v;
    }
    for (std::size_t i = 0; i < n_; ++i) x[i] /= d_[i];
    for (std::size_t i = n_; i-- > 0;) {
      T v = x[i];
      for (std::size_t k = i + 1; k < n_; ++k) v -= (*this)(k, i) * x[k];
      x[i] = v;
    }
  }

  std::span<const T> pivots() const { return d_; }

 private:
  std::size_t n_ = 0;
  std::vector<T> a_;
  std::vector<T> d_;
};

}  // namespace homlp
