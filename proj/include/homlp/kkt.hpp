#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "homlp/dense.hpp"
#include "homlp/errors.hpp"
#include "homlp/ldl.hpp"
#include "homlp/scalar.hpp"
#include "homlp/sparse.hpp"

namespace homlp {

enum class KKTBackend { Ldl, Dense, BlockAngular };

inline const char* kkt_backend_name(KKTBackend b) {
  switch (b) {
    case KKTBackend::Ldl: return "ldl";
    case KKTBackend::Dense: return "dense";
    case KKTBackend::BlockAngular: return "block-angular";
  }
  return "?";
}

struct KKTOptions {
  KKTBackend backend = KKTBackend::Ldl;
  int max_refinement = 2;
  bool reorder = true;  ///< fill-reducing ordering for the sparse backend
};

/// Solver for the augmented system
///
///   [ -(inv(theta) + rho_p I)   A' ] [dx]   [xi_d]
///   [  A                  rho_d I ] [dy] = [xi_p]
///
/// update() refreshes the factorization; solve() may then be called any
/// number of times and does not modify it.
template <class T>
class KKTSolver {
 public:
  explicit KKTSolver(std::shared_ptr<const AbstractMatrix<T>> A, int max_refinement)
      : A_(std::move(A)), max_refinement_(max_refinement) {}
  virtual ~KKTSolver() = default;
  KKTSolver(const KKTSolver&) = delete;
  KKTSolver& operator=(const KKTSolver&) = delete;

  virtual std::string name() const = 0;

  void update(std::span<const T> theta, T rho_p, T rho_d) {
    if (theta.size() != A_->cols()) throw PreconditionError("kkt update: theta has wrong length");
    if (!(rho_p >= T(0)) || !(rho_d >= T(0))) throw PreconditionError("kkt update: negative regularization");
    diag_.resize(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
      if (!(theta[j] > T(0))) throw PreconditionError("kkt update: theta must be positive");
      diag_[j] = T(1) / theta[j] + rho_p;
      if (!is_finite(diag_[j])) throw NumericalBreakdown("kkt update: non-finite diagonal");
    }
    rho_p_ = rho_p;
    rho_d_ = rho_d;
    factor();
    ++updates_;
  }

  /// Solves with up to max_refinement rounds of iterative refinement.
  void solve(std::span<const T> xi_d, std::span<const T> xi_p, std::span<T> dx, std::span<T> dy) {
    const std::size_t m = A_->rows(), n = A_->cols();
    if (updates_ == 0) throw PreconditionError("kkt solve before update");
    solve_factored(xi_d, xi_p, dx, dy);
    T scale = T(1);
    for (const auto& v : xi_d) scale = std::max<T>(scale, abs_(v) + T(1));
    for (const auto& v : xi_p) scale = std::max<T>(scale, abs_(v) + T(1));
    const T tol = refinement_tolerance() * scale;
    rd_.resize(n);
    rp_.resize(m);
    cx_.resize(n);
    cy_.resize(m);
    for (int round = 0; round < max_refinement_; ++round) {
      const T r = residual(xi_d, xi_p, dx, dy, rd_, rp_);
      if (!(r > tol)) break;
      solve_factored(rd_, rp_, cx_, cy_);
      for (std::size_t j = 0; j < n; ++j) dx[j] += cx_[j];
      for (std::size_t i = 0; i < m; ++i) dy[i] += cy_[i];
    }
    ++solves_;
  }

  /// rd = xi_d - (-D dx + A'dy), rp = xi_p - (A dx + rho_d dy); returns the max-norm.
  T residual(std::span<const T> xi_d, std::span<const T> xi_p, std::span<const T> dx, std::span<const T> dy,
             std::span<T> rd, std::span<T> rp) const {
    const std::size_t m = A_->rows(), n = A_->cols();
    A_->mul_transpose(dy, rd, T(-1), T(0));
    A_->mul(dx, rp, T(-1), T(0));
    T r = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      rd[j] += xi_d[j] + diag_[j] * dx[j];
      r = std::max<T>(r, abs_(rd[j]));
    }
    for (std::size_t i = 0; i < m; ++i) {
      rp[i] += xi_p[i] - rho_d_ * dy[i];
      r = std::max<T>(r, abs_(rp[i]));
    }
    return r;
  }

  const AbstractMatrix<T>& matrix() const { return *A_; }
  std::span<const T> diagonal() const { return diag_; }
  T rho_p() const { return rho_p_; }
  T rho_d() const { return rho_d_; }
  long updates() const { return updates_; }
  long solves() const { return solves_; }
  virtual std::size_t factor_nonzeros() const { return 0; }

 protected:
  virtual void factor() = 0;
  virtual void solve_factored(std::span<const T> xi_d, std::span<const T> xi_p, std::span<T> dx,
                              std::span<T> dy) const = 0;

  static T abs_(const T& v) {
    using std::abs;
    return abs(v);
  }
  static T refinement_tolerance() {
    using std::pow;
    return pow(machine_epsilon<T>(), T(3) / T(4));
  }

  std::shared_ptr<const AbstractMatrix<T>> A_;
  std::vector<T> diag_;  ///< inv(theta) + rho_p
  T rho_p_ = T(0);
  T rho_d_ = T(0);

 private:
  int max_refinement_;
  long updates_ = 0;
  long solves_ = 0;
  std::vector<T> rd_, rp_, cx_, cy_;
};

/// Factorizes the augmented matrix directly.
template <class T>
class SparseLDLSolver final : public KKTSolver<T> {
 public:
  SparseLDLSolver(std::shared_ptr<const AbstractMatrix<T>> A, const KKTOptions& opt)
      : KKTSolver<T>(A, opt.max_refinement) {
    if (A->kind() != MatrixKind::Sparse)
      throw UnsupportedMatrixKind(std::string("ldl backend needs a sparse matrix, got ") +
                                  matrix_kind_name(A->kind()));
    const auto& S = static_cast<const SparseMatrix<T>&>(*A);
    const std::size_t m = S.rows(), n = S.cols();
    const SparseMatrix<T> At = S.transpose();  // column i of A' is row i of A

    // Upper triangle: column j < n holds the primal diagonal; column n+i holds
    // row i of A followed by the dual diagonal.
    std::vector<std::size_t> cp(n + m + 1, 0), ri;
    ri.reserve(n + m + S.nonzeros());
    for (std::size_t j = 0; j < n; ++j) {
      ri.push_back(j);
      cp[j + 1] = ri.size();
    }
    const auto atp = At.col_ptr();
    const auto ati = At.row_idx();
    const auto atv = At.values();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = atp[i]; p < atp[i + 1]; ++p) {
        ri.push_back(ati[p]);
        a_values_.push_back(atv[p]);
      }
      ri.push_back(n + i);
      cp[n + i + 1] = ri.size();
    }
    col_ptr_ = cp;
    ldl_ = SparseLDL<T>(n + m, col_ptr_, ri, opt.reorder);
    values_.assign(ri.size(), T(0));
    sign_.assign(n + m, 1);
    for (std::size_t j = 0; j < n; ++j) sign_[j] = -1;
    rhs_.assign(n + m, T(0));
  }

  std::string name() const override { return "sparse LDL' (quasi-definite augmented system)"; }
  std::size_t factor_nonzeros() const override { return ldl_.factor_nonzeros(); }

 protected:
  void factor() override {
    const std::size_t n = this->A_->cols(), m = this->A_->rows();
    for (std::size_t j = 0; j < n; ++j) values_[j] = -this->diag_[j];
    std::size_t q = 0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = col_ptr_[n + i]; p + 1 < col_ptr_[n + i + 1]; ++p) values_[p] = a_values_[q++];
      values_[col_ptr_[n + i + 1] - 1] = this->rho_d_;
    }
    ldl_.factor(values_, sign_);
  }

  void solve_factored(std::span<const T> xi_d, std::span<const T> xi_p, std::span<T> dx,
                      std::span<T> dy) const override {
    const std::size_t n = this->A_->cols(), m = this->A_->rows();
    for (std::size_t j = 0; j < n; ++j) rhs_[j] = xi_d[j];
    for (std::size_t i = 0; i < m; ++i) rhs_[n + i] = xi_p[i];
    ldl_.solve(rhs_);
    for (std::size_t j = 0; j < n; ++j) dx[j] = rhs_[j];
    for (std::size_t i = 0; i < m; ++i) dy[i] = rhs_[n + i];
  }

 private:
  std::vector<std::size_t> col_ptr_;
  std::vector<T> a_values_;
  std::vector<T> values_;
  std::vector<signed char> sign_;
  SparseLDL<T> ldl_;
  mutable std::vector<T> rhs_;
};

/// Pivots out the diagonal block and Cholesky-factorizes the dense normal
/// matrix A inv(D) A' + rho_d I, D = inv(theta) + rho_p I.
template <class T>
class DenseNormalSolver final : public KKTSolver<T> {
 public:
  DenseNormalSolver(std::shared_ptr<const AbstractMatrix<T>> A, const KKTOptions& opt)
      : KKTSolver<T>(A, opt.max_refinement) {
    if (A->kind() != MatrixKind::Sparse)
      throw UnsupportedMatrixKind(std::string("dense backend needs a sparse matrix, got ") +
                                  matrix_kind_name(A->kind()));
    normal_ = DenseSymmetric<T>(A->rows());
    tmp_.assign(A->cols(), T(0));
  }

  std::string name() const override { return "dense normal equations (Cholesky)"; }
  std::size_t factor_nonzeros() const override {
    const std::size_t m = normal_.size();
    return m * (m - (m > 0 ? 1 : 0)) / 2;
  }

 protected:
  void factor() override {
    const auto& S = static_cast<const SparseMatrix<T>&>(*this->A_);
    const auto cp = S.col_ptr();
    const auto ri = S.row_idx();
    const auto v = S.values();
    normal_.fill(T(0));
    for (std::size_t i = 0; i < normal_.size(); ++i) normal_(i, i) = this->rho_d_;
    for (std::size_t j = 0; j < S.cols(); ++j) {
      const T w = T(1) / this->diag_[j];
      for (std::size_t p = cp[j]; p < cp[j + 1]; ++p)
        for (std::size_t q = cp[j]; q <= p; ++q) {
          const std::size_t a = std::max(ri[p], ri[q]), b = std::min(ri[p], ri[q]);
          normal_(a, b) += w * v[p] * v[q];
        }
    }
    normal_.factor_positive();
  }

  void solve_factored(std::span<const T> xi_d, std::span<const T> xi_p, std::span<T> dx,
                      std::span<T> dy) const override {
    const std::size_t n = this->A_->cols(), m = this->A_->rows();
    for (std::size_t j = 0; j < n; ++j) tmp_[j] = xi_d[j] / this->diag_[j];
    for (std::size_t i = 0; i < m; ++i) dy[i] = xi_p[i];
    this->A_->mul(tmp_, dy, T(1), T(1));
    normal_.solve(dy);
    this->A_->mul_transpose(dy, dx, T(1), T(0));
    for (std::size_t j = 0; j < n; ++j) dx[j] = (dx[j] - xi_d[j]) / this->diag_[j];
  }

 private:
  DenseSymmetric<T> normal_;
  mutable std::vector<T> tmp_;
};

}  // namespace homlp
