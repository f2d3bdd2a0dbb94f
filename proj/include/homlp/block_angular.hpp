#pragma once

#include <cstddef>
#include <istream>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "homlp/dense.hpp"
#include "homlp/errors.hpp"
#include "homlp/kkt.hpp"
#include "homlp/scalar.hpp"
#include "homlp/sparse.hpp"

namespace homlp {

/// Unit block-angular matrix
///
///   [ e'              ]
///   [     ...         ]
///   [          e'     ]
///   [ A_1 ... A_R  A_0 ]
///
/// with dense linking columns. Rows: R convexity rows, then m0 linking rows.
/// Columns: block 1, ..., block R, then the n0 columns of A_0.
template <class T>
class UnitBlockAngularMatrix final : public AbstractMatrix<T> {
 public:
  UnitBlockAngularMatrix() = default;
  UnitBlockAngularMatrix(std::size_t R, std::size_t m0) : R_(R), m0_(m0), offset_(R + 1, 0) {}

  /// Appends a column (length m0) to block r, or to A_0 when r == R. Columns
  /// of A_0 may be added at any time; block columns must be added before any
  /// later block's (the storage keeps the documented column order).
  void add_column(std::size_t r, std::span<const T> a) {
    if (r > R_) throw PreconditionError("block index out of range");
    if (a.size() != m0_) throw PreconditionError("column length differs from m0");
    if (r == R_) {
      linking_.insert(linking_.end(), a.begin(), a.end());
      ++n0_;
      return;
    }
    const std::size_t pos = offset_[r + 1];
    blocks_.insert(blocks_.begin() + std::ptrdiff_t(pos * m0_), a.begin(), a.end());
    for (std::size_t k = r + 1; k <= R_; ++k) ++offset_[k];
  }

  MatrixKind kind() const override { return MatrixKind::UnitBlockAngular; }
  std::size_t rows() const override { return R_ + m0_; }
  std::size_t cols() const override { return offset_[R_] + n0_; }
  std::size_t nonzeros() const override {
    std::size_t nz = offset_[R_];
    for (const auto& v : blocks_) nz += v != T(0);
    for (const auto& v : linking_) nz += v != T(0);
    return nz;
  }

  std::size_t blocks() const { return R_; }
  std::size_t linking_rows() const { return m0_; }
  std::size_t linking_cols() const { return n0_; }
  std::size_t block_begin(std::size_t r) const { return offset_[r]; }
  std::size_t block_end(std::size_t r) const { return offset_[r + 1]; }
  std::size_t block_size(std::size_t r) const { return offset_[r + 1] - offset_[r]; }
  std::size_t block_columns() const { return offset_[R_]; }

  /// Linking part (length m0) of column j.
  std::span<const T> column(std::size_t j) const {
    const std::size_t nb = offset_[R_];
    if (j < nb) return {blocks_.data() + j * m0_, m0_};
    return {linking_.data() + (j - nb) * m0_, m0_};
  }

  void mul(std::span<const T> x, std::span<T> y, T alpha, T beta) const override {
    for (auto& v : y) v = beta == T(0) ? T(0) : v * beta;
    for (std::size_t r = 0; r < R_; ++r) {
      T sum = T(0);
      for (std::size_t j = offset_[r]; j < offset_[r + 1]; ++j) sum += x[j];
      y[r] += alpha * sum;
    }
    T* yl = y.data() + R_;
    for (std::size_t j = 0; j < cols(); ++j) {
      if (x[j] == T(0)) continue;
      const T xj = alpha * x[j];
      const T* a = column(j).data();
      for (std::size_t i = 0; i < m0_; ++i) yl[i] += a[i] * xj;
    }
  }

  void mul_transpose(std::span<const T> x, std::span<T> y, T alpha, T beta) const override {
    const T* xl = x.data() + R_;
    for (std::size_t r = 0; r <= R_; ++r) {
      const std::size_t b = r < R_ ? offset_[r] : offset_[R_];
      const std::size_t e = r < R_ ? offset_[r + 1] : cols();
      const T conv = r < R_ ? x[r] : T(0);
      for (std::size_t j = b; j < e; ++j) {
        const T* a = column(j).data();
        T acc = conv;
        for (std::size_t i = 0; i < m0_; ++i) acc += a[i] * xl[i];
        y[j] = (beta == T(0) ? T(0) : beta * y[j]) + alpha * acc;
      }
    }
  }

  SparseMatrix<T> to_sparse() const {
    std::vector<Triplet<T>> t;
    for (std::size_t r = 0; r < R_; ++r)
      for (std::size_t j = offset_[r]; j < offset_[r + 1]; ++j) t.push_back({r, j, T(1)});
    for (std::size_t j = 0; j < cols(); ++j) {
      const auto a = column(j);
      for (std::size_t i = 0; i < m0_; ++i)
        if (a[i] != T(0)) t.push_back({R_ + i, j, a[i]});
    }
    return SparseMatrix<T>::from_triplets(rows(), cols(), std::move(t));
  }

 private:
  std::size_t R_ = 0, m0_ = 0, n0_ = 0;
  std::vector<std::size_t> offset_{0};
  std::vector<T> blocks_;   // block columns, each m0 contiguous values
  std::vector<T> linking_;  // A_0 columns
};

/// Block elimination of the normal matrix A diag(theta) A' + rho_d I:
/// the R convexity pivots d_r are eliminated explicitly, leaving the dense
/// m0 x m0 Schur complement C, which is factorized as L_C D_C L_C'.
template <class T>
class BlockAngularFactor {
 public:
  BlockAngularFactor() = default;
  explicit BlockAngularFactor(const UnitBlockAngularMatrix<T>& M)
      : M_(&M), d_(M.blocks()), l_(M.blocks() * M.linking_rows()), C_(M.linking_rows()) {}

  /// theta here is the combined diagonal inv(inv(theta~) + rho_p I).
  void factorize(std::span<const T> theta, T rho_d) {
    const auto& M = *M_;
    const std::size_t R = M.blocks(), m0 = M.linking_rows();
    if (theta.size() != M.cols()) throw PreconditionError("theta has wrong length");
    if (!(rho_d >= T(0))) throw PreconditionError("rho_d must be nonnegative");
    C_.fill(T(0));
    for (std::size_t i = 0; i < m0; ++i) C_(i, i) = rho_d;
    // Lower triangle of sum_j theta_j a_j a_j' over all columns.
    auto rank1 = [&](const T* a, T s) {
      for (std::size_t i = 0; i < m0; ++i) {
        const T ai = s * a[i];
        if (ai == T(0)) continue;
        T* row = &C_(i, 0);
        for (std::size_t k = 0; k <= i; ++k) row[k] += ai * a[k];
      }
    };
    for (std::size_t r = 0; r < R; ++r) {
      T dr = rho_d;
      T* g = l_.data() + r * m0;
      std::fill(g, g + m0, T(0));
      for (std::size_t j = M.block_begin(r); j < M.block_end(r); ++j) {
        const T t = theta[j];
        if (!(t > T(0))) throw PreconditionError("theta must be positive");
        dr += t;
        const T* a = M.column(j).data();
        for (std::size_t i = 0; i < m0; ++i) g[i] += t * a[i];
        rank1(a, t);
      }
      if (!(dr > T(0)) || !is_finite(dr)) throw NumericalBreakdown("block pivot is not positive");
      d_[r] = dr;
      rank1(g, -T(1) / dr);
      for (std::size_t i = 0; i < m0; ++i) g[i] /= dr;  // now l_r
    }
    for (std::size_t j = M.block_columns(); j < M.cols(); ++j) rank1(M.column(j).data(), theta[j]);
    C_.factor_positive();
  }

  /// xi = (xi_1..xi_R, xi_0) overwritten by (delta_1..delta_R, delta_0).
  void solve_normal(std::span<T> xi) const {
    const std::size_t R = M_->blocks(), m0 = M_->linking_rows();
    T* x0 = xi.data() + R;
    for (std::size_t r = 0; r < R; ++r) {
      const T* l = l_.data() + r * m0;
      const T xr = xi[r];
      for (std::size_t i = 0; i < m0; ++i) x0[i] -= xr * l[i];
    }
    C_.solve(std::span<T>(x0, m0));
    for (std::size_t r = 0; r < R; ++r) {
      const T* l = l_.data() + r * m0;
      T v = xi[r] / d_[r];
      for (std::size_t i = 0; i < m0; ++i) v -= l[i] * x0[i];
      xi[r] = v;
    }
  }

  std::span<const T> d() const { return d_; }
  std::span<const T> l(std::size_t r) const { return {l_.data() + r * M_->linking_rows(), M_->linking_rows()}; }
  /// Factorized Schur complement: unit lower triangle in the strict lower part.
  const DenseSymmetric<T>& schur() const { return C_; }

 private:
  const UnitBlockAngularMatrix<T>* M_ = nullptr;
  std::vector<T> d_;
  std::vector<T> l_;  // R x m0, row r is l_r
  DenseSymmetric<T> C_;
};

/// Augmented-system solver for unit block-angular A through the normal
/// equations and BlockAngularFactor.
template <class T>
class BlockAngularSolver final : public KKTSolver<T> {
 public:
  BlockAngularSolver(std::shared_ptr<const AbstractMatrix<T>> A, const KKTOptions& opt)
      : KKTSolver<T>(A, opt.max_refinement) {
    if (A->kind() != MatrixKind::UnitBlockAngular)
      throw UnsupportedMatrixKind(std::string("block-angular backend needs a unit block-angular matrix, got ") +
                                  matrix_kind_name(A->kind()));
    M_ = static_cast<const UnitBlockAngularMatrix<T>*>(A.get());
    factor_ = BlockAngularFactor<T>(*M_);
    theta_.assign(M_->cols(), T(0));
    tmp_.assign(M_->cols(), T(0));
  }

  std::string name() const override { return "block-angular normal equations (Schur complement)"; }

 protected:
  void factor() override {
    if (!(this->rho_d_ > T(0))) throw PreconditionError("block-angular backend needs rho_d > 0");
    for (std::size_t j = 0; j < theta_.size(); ++j) theta_[j] = T(1) / this->diag_[j];
    factor_.factorize(theta_, this->rho_d_);
  }

  void solve_factored(std::span<const T> xi_d, std::span<const T> xi_p, std::span<T> dx,
                      std::span<T> dy) const override {
    const std::size_t n = M_->cols(), m = M_->rows();
    for (std::size_t j = 0; j < n; ++j) tmp_[j] = xi_d[j] * theta_[j];
    for (std::size_t i = 0; i < m; ++i) dy[i] = xi_p[i];
    M_->mul(tmp_, dy, T(1), T(1));
    factor_.solve_normal(dy);
    M_->mul_transpose(dy, dx, T(1), T(0));
    for (std::size_t j = 0; j < n; ++j) dx[j] = (dx[j] - xi_d[j]) * theta_[j];
  }

 private:
  const UnitBlockAngularMatrix<T>* M_ = nullptr;
  BlockAngularFactor<T> factor_;
  std::vector<T> theta_;
  mutable std::vector<T> tmp_;
};

/// Instance stored in the structured text format (see README).
template <class T>
struct BlockAngularInstance {
  std::shared_ptr<UnitBlockAngularMatrix<T>> matrix;
  std::vector<T> cost;  ///< length N, empty if absent
  std::vector<T> rhs;   ///< linking right-hand side b0, empty if absent
};

template <class T>
BlockAngularInstance<T> read_block_angular(std::istream& in) {
  auto fail = [](const std::string& w) { throw PreconditionError("block-angular file: " + w); };
  auto num = [&](const char* what) {
    std::string s;
    if (!(in >> s)) fail(std::string("missing ") + what);
    try {
      return ScalarTraits<T>::parse(s);
    } catch (const std::exception&) {
      fail("bad number '" + s + "'");
    }
    return T(0);
  };
  std::size_t R = 0, m0 = 0, n0 = 0;
  if (!(in >> R >> m0 >> n0)) fail("bad header");
  std::vector<std::size_t> nr(R);
  for (auto& v : nr)
    if (!(in >> v)) fail("missing block size");
  BlockAngularInstance<T> out;
  out.matrix = std::make_shared<UnitBlockAngularMatrix<T>>(R, m0);
  auto read_block = [&](std::size_t r, std::size_t cols) {
    std::vector<T> dense(m0 * cols);
    for (std::size_t i = 0; i < m0; ++i)
      for (std::size_t j = 0; j < cols; ++j) dense[j * m0 + i] = num("matrix entry");
    for (std::size_t j = 0; j < cols; ++j) out.matrix->add_column(r, std::span<const T>(&dense[j * m0], m0));
  };
  for (std::size_t r = 0; r < R; ++r) read_block(r, nr[r]);
  read_block(R, n0);
  std::string key;
  while (in >> key) {
    if (key == "cost") {
      out.cost.resize(out.matrix->cols());
      for (auto& v : out.cost) v = num("cost");
    } else if (key == "rhs") {
      out.rhs.resize(m0);
      for (auto& v : out.rhs) v = num("rhs");
    } else {
      fail("unknown keyword '" + key + "'");
    }
  }
  return out;
}

template <class T>
std::string write_block_angular(const UnitBlockAngularMatrix<T>& M, const std::vector<T>& cost = {},
                                const std::vector<T>& rhs = {}) {
  std::ostringstream os;
  const std::size_t R = M.blocks(), m0 = M.linking_rows();
  os << R << " " << m0 << " " << M.linking_cols() << "\n";
  for (std::size_t r = 0; r < R; ++r) os << M.block_size(r) << (r + 1 < R ? " " : "");
  os << "\n";
  auto block = [&](std::size_t b, std::size_t e) {
    for (std::size_t i = 0; i < m0; ++i) {
      for (std::size_t j = b; j < e; ++j) os << ScalarTraits<T>::format(M.column(j)[i]) << (j + 1 < e ? " " : "");
      os << "\n";
    }
  };
  for (std::size_t r = 0; r < R; ++r) block(M.block_begin(r), M.block_end(r));
  block(M.block_columns(), M.cols());
  if (!cost.empty()) {
    os << "cost\n";
    for (std::size_t j = 0; j < cost.size(); ++j) os << ScalarTraits<T>::format(cost[j]) << "\n";
  }
  if (!rhs.empty()) {
    os << "rhs\n";
    for (const auto& v : rhs) os << ScalarTraits<T>::format(v) << "\n";
  }
  return os.str();
}

}  // namespace homlp
