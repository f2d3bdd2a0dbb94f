#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include "homlp/errors.hpp"
#include "homlp/scalar.hpp"

namespace homlp {

/// Up-looking sparse LDL' for symmetric quasi-definite matrices, no pivoting.
///
/// The caller describes the upper triangle (diagonal included) once in CSC
/// form. A fill-reducing ordering and the elimination tree are computed in the
/// constructor; factor() then only needs the values, in the same entry order.
template <class T>
class SparseLDL {
 public:
  SparseLDL() = default;

  SparseLDL(std::size_t n, std::span<const std::size_t> col_ptr, std::span<const std::size_t> row_idx,
            bool reorder = true)
      : n_(n) {
    const std::size_t nnz = col_ptr[n];
    perm_.resize(n);
    for (std::size_t k = 0; k < n; ++k) perm_[k] = k;
    if (reorder && n > 1) {
      std::vector<Eigen::Triplet<double, int>> pat;
      pat.reserve(2 * nnz);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = col_ptr[j]; p < col_ptr[j + 1]; ++p) {
          pat.emplace_back(int(row_idx[p]), int(j), 1.0);
          pat.emplace_back(int(j), int(row_idx[p]), 1.0);
        }
      Eigen::SparseMatrix<double, Eigen::ColMajor, int> S{Eigen::Index(n), Eigen::Index(n)};
      S.setFromTriplets(pat.begin(), pat.end());
      Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P;
      Eigen::AMDOrdering<int>()(S, P);
      for (std::size_t k = 0; k < n; ++k) perm_[k] = std::size_t(P.indices()[k]);  // new -> old
    }
    iperm_.resize(n);
    for (std::size_t k = 0; k < n; ++k) iperm_[perm_[k]] = k;

    // Permuted upper triangle; slot_[p] is where original entry p lands.
    std::vector<std::size_t> count(n + 1, 0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = col_ptr[j]; p < col_ptr[j + 1]; ++p) {
        const std::size_t a = iperm_[row_idx[p]], b = iperm_[j];
        ++count[std::max(a, b) + 1];
      }
    ap_.assign(n + 1, 0);
    for (std::size_t k = 0; k < n; ++k) ap_[k + 1] = ap_[k] + count[k + 1];
    ai_.resize(nnz);
    slot_.resize(nnz);
    std::vector<std::size_t> next(ap_.begin(), ap_.end() - 1);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = col_ptr[j]; p < col_ptr[j + 1]; ++p) {
        const std::size_t a = iperm_[row_idx[p]], b = iperm_[j];
        const std::size_t col = std::max(a, b);
        slot_[p] = next[col]++;
        ai_[slot_[p]] = std::min(a, b);
      }
    ax_.assign(nnz, T(0));

    // Elimination tree and column counts.
    parent_.assign(n, npos);
    std::vector<std::size_t> flag(n), lnz(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      flag[k] = k;
      for (std::size_t p = ap_[k]; p < ap_[k + 1]; ++p) {
        for (std::size_t i = ai_[p]; i < k && flag[i] != k; i = parent_[i]) {
          if (parent_[i] == npos) parent_[i] = k;
          ++lnz[i];
          flag[i] = k;
        }
      }
    }
    lp_.assign(n + 1, 0);
    for (std::size_t k = 0; k < n; ++k) lp_[k + 1] = lp_[k] + lnz[k];
    li_.resize(lp_[n]);
    lx_.assign(lp_[n], T(0));
    d_.assign(n, T(0));
    y_.assign(n, T(0));
    pattern_.resize(n);
    flag_.resize(n);
    lnz_.resize(n);
    work_.assign(n, T(0));
  }

  std::size_t size() const { return n_; }
  /// Off-diagonal nonzeros of L, fixed by the symbolic analysis.
  std::size_t factor_nonzeros() const { return lp_.empty() ? 0 : lp_[n_]; }
  std::span<const std::size_t> permutation() const { return perm_; }

  /// Numeric factorization. sign[k] (original index) is the required sign of
  /// the k-th pivot: -1 for the primal block, +1 for the dual block.
  void factor(std::span<const T> values, std::span<const signed char> sign) {
    for (std::size_t p = 0; p < values.size(); ++p) ax_[slot_[p]] = values[p];
    for (std::size_t k = 0; k < n_; ++k) {
      y_[k] = T(0);
      std::size_t top = n_;
      flag_[k] = k;
      lnz_[k] = 0;
      for (std::size_t p = ap_[k]; p < ap_[k + 1]; ++p) {
        std::size_t i = ai_[p];
        y_[i] += ax_[p];
        std::size_t len = 0;
        for (; flag_[i] != k; i = parent_[i]) {
          pattern_[len++] = i;
          flag_[i] = k;
        }
        while (len > 0) pattern_[--top] = pattern_[--len];
      }
      d_[k] = y_[k];
      y_[k] = T(0);
      for (; top < n_; ++top) {
        const std::size_t i = pattern_[top];
        const T yi = y_[i];
        y_[i] = T(0);
        const std::size_t p2 = lp_[i] + lnz_[i];
        for (std::size_t p = lp_[i]; p < p2; ++p) y_[li_[p]] -= lx_[p] * yi;
        const T lki = yi / d_[i];
        d_[k] -= lki * yi;
        li_[p2] = k;
        lx_[p2] = lki;
        ++lnz_[i];
      }
      const T dk = d_[k];
      const int want = sign.empty() ? 0 : sign[perm_[k]];
      if (!is_finite(dk) || dk == T(0) || (want < 0 && dk > T(0)) || (want > 0 && dk < T(0)))
        throw NumericalBreakdown("sparse LDL': bad pivot");
    }
  }

  /// Solves in place (original ordering).
  void solve(std::span<T> x) const {
    for (std::size_t k = 0; k < n_; ++k) work_[k] = x[perm_[k]];
    for (std::size_t j = 0; j < n_; ++j) {
      const T xj = work_[j];
      for (std::size_t p = lp_[j]; p < lp_[j + 1]; ++p) work_[li_[p]] -= lx_[p] * xj;
    }
    for (std::size_t j = 0; j < n_; ++j) work_[j] /= d_[j];
    for (std::size_t j = n_; j-- > 0;) {
      T v = work_[j];
      for (std::size_t p = lp_[j]; p < lp_[j + 1]; ++p) v -= lx_[p] * work_[li_[p]];
      work_[j] = v;
    }
    for (std::size_t k = 0; k < n_; ++k) x[perm_[k]] = work_[k];
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t n_ = 0;
  std::vector<std::size_t> perm_, iperm_;
  std::vector<std::size_t> ap_, ai_, slot_;
  std::vector<T> ax_;
  std::vector<std::size_t> parent_, lp_, li_;
  std::vector<T> lx_, d_;
  std::vector<T> y_;
  std::vector<std::size_t> pattern_, flag_, lnz_;
  mutable std::vector<T> work_;
};

}  // namespace homlp
