#pragma once

#include <cmath>
#include <cstddef>
#include <tuple>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "homlp/errors.hpp"
#include "homlp/problem.hpp"
#include "homlp/scalar.hpp"

namespace homlp {

enum class PresolveStatus { InProgress, ReducedToEmpty, Infeasible, Unbounded };

inline const char* presolve_status_name(PresolveStatus s) {
  switch (s) {
    case PresolveStatus::InProgress: return "InProgress";
    case PresolveStatus::ReducedToEmpty: return "ReducedToEmpty";
    case PresolveStatus::Infeasible: return "Infeasible";
    case PresolveStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

template <class T>
struct ScalingFactors {
  std::vector<T> row;  ///< D_r
  std::vector<T> col;  ///< D_c
};

/// D_r(i) = 1/sqrt(||A(i,:)||_2), D_c(j) = 1/sqrt(||A(:,j)||_2), both from the
/// unscaled matrix. Empty rows or columns get factor 1.
template <class T>
ScalingFactors<T> compute_scaling(const SparseMatrix<T>& A) {
  using std::sqrt;
  ScalingFactors<T> f;
  std::vector<T> rn(A.rows(), T(0)), cn(A.cols(), T(0));
  for (const auto& e : A.triplets()) {
    rn[e.row] += e.value * e.value;
    cn[e.col] += e.value * e.value;
  }
  f.row.resize(A.rows());
  f.col.resize(A.cols());
  for (std::size_t i = 0; i < rn.size(); ++i) f.row[i] = rn[i] > T(0) ? T(1) / sqrt(sqrt(rn[i])) : T(1);
  for (std::size_t j = 0; j < cn.size(); ++j) f.col[j] = cn[j] > T(0) ? T(1) / sqrt(sqrt(cn[j])) : T(1);
  return f;
}

/// A~ = D_r A D_c with x = D_c x~; bounds and costs follow.
template <class T>
GeneralLP<T> apply_scaling(const GeneralLP<T>& lp, const ScalingFactors<T>& f) {
  GeneralLP<T> out = lp;
  out.A.transform_values([&](std::size_t i, std::size_t j, const T& v) { return f.row[i] * v * f.col[j]; });
  auto mul = [](const ExtendedReal<T>& b, const T& s) { return b.finite() ? ExtendedReal<T>(b.value() * s) : b; };
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    out.row_lower[i] = mul(lp.row_lower[i], f.row[i]);
    out.row_upper[i] = mul(lp.row_upper[i], f.row[i]);
  }
  for (std::size_t j = 0; j < lp.num_cols(); ++j) {
    out.c[j] = lp.c[j] * f.col[j];
    out.col_lower[j] = mul(lp.col_lower[j], T(1) / f.col[j]);
    out.col_upper[j] = mul(lp.col_upper[j], T(1) / f.col[j]);
  }
  return out;
}

/// Maps a solution of the scaled problem back: x = D_c x~, y = D_r y~, s = s~ / D_c.
template <class T>
Solution<T> unscale(Solution<T> sol, const ScalingFactors<T>& f) {
  auto mul = [](std::vector<T>& v, const std::vector<T>& d, bool divide) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = divide ? v[i] / d[i] : v[i] * d[i];
  };
  mul(sol.x, f.col, false);
  mul(sol.s, f.col, true);
  mul(sol.y, f.row, false);
  mul(sol.primal_ray, f.col, false);
  mul(sol.dual_ray, f.row, false);
  return sol;
}

/// Working state of the reduction loop and its postsolve stack.
///
/// Internally the objective is minimized (costs are multiplied by the sense
/// sign) and reduced costs follow s = c - A'y. Coefficients of A are never
/// modified; reductions only deactivate rows and columns and change bounds,
/// costs and the objective constant.
template <class T>
class PresolveState {
 public:
  using Bound = ExtendedReal<T>;

  explicit PresolveState(const GeneralLP<T>& lp) : orig_(lp) {
    for (const auto& d : validate(lp))
      if (d.kind != Diagnostic::Kind::InvertedBound) throw PreconditionError("presolve: " + d.message);
    m_ = lp.num_rows();
    n_ = lp.num_cols();
    sign_ = lp.sense == Sense::Maximize ? T(-1) : T(1);
    rows_.resize(m_);
    cols_.resize(n_);
    for (const auto& e : lp.A.triplets()) {
      rows_[e.row].push_back({e.col, e.value});
      cols_[e.col].push_back({e.row, e.value});
    }
    row_active_.assign(m_, true);
    col_active_.assign(n_, true);
    row_count_.resize(m_);
    col_count_.resize(n_);
    for (std::size_t i = 0; i < m_; ++i) row_count_[i] = rows_[i].size();
    for (std::size_t j = 0; j < n_; ++j) col_count_[j] = cols_[j].size();
    rlo_ = lp.row_lower;
    rup_ = lp.row_upper;
    clo_ = lp.col_lower;
    cup_ = lp.col_upper;
    c_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) c_[j] = sign_ * lp.c[j];
    c0_ = sign_ * lp.c0;
  }

  PresolveStatus status() const { return status_; }
  bool row_active(std::size_t i) const { return row_active_[i]; }
  bool col_active(std::size_t j) const { return col_active_[j]; }
  const Bound& col_lower(std::size_t j) const { return clo_[j]; }
  const Bound& col_upper(std::size_t j) const { return cup_[j]; }
  const Bound& row_lower(std::size_t i) const { return rlo_[i]; }
  const Bound& row_upper(std::size_t i) const { return rup_[i]; }
  /// Objective constant in the problem's own sense.
  T objective_constant() const { return sign_ * c0_; }
  std::size_t records() const { return stack_.size(); }
  const std::vector<T>& certificate() const { return ray_; }

  std::size_t active_rows() const {
    std::size_t k = 0;
    for (bool a : row_active_) k += a;
    return k;
  }
  std::size_t active_cols() const {
    std::size_t k = 0;
    for (bool a : col_active_) k += a;
    return k;
  }
  std::size_t nonzeros() const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < m_; ++i)
      if (row_active_[i]) k += row_count_[i];
    return k;
  }

  // ---- reduction rules -------------------------------------------------

  /// Inverted row or column bounds mean infeasibility.
  std::size_t check_bounds() {
    if (!in_progress()) return 0;
    for (std::size_t j = 0; j < n_; ++j)
      if (col_active_[j] && inverted(clo_[j], cup_[j])) {
        set_infeasible(std::vector<T>(m_, T(0)));
        return 1;
      }
    for (std::size_t i = 0; i < m_; ++i)
      if (row_active_[i] && inverted(rlo_[i], rup_[i])) {
        std::vector<T> ray(m_, T(0));
        set_infeasible(std::move(ray));
        return 1;
      }
    return 0;
  }

  std::size_t reduce_empty_rows() {
    std::size_t count = 0;
    for (std::size_t i = 0; i < m_ && in_progress(); ++i) {
      if (!row_active_[i] || row_count_[i] != 0) continue;
      if (above(rlo_[i], T(0))) {
        infeasible_row(i, T(1));
      } else if (below(rup_[i], T(0))) {
        infeasible_row(i, T(-1));
      } else {
        remove_row(i);
        stack_.push_back(DroppedRow{i});
        ++count;
      }
    }
    return count;
  }

  std::size_t reduce_empty_columns() {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n_ && in_progress(); ++j) {
      if (!col_active_[j] || col_count_[j] != 0) continue;
      T v;
      if (c_[j] > T(0)) {
        if (!clo_[j].finite()) {
          unbounded_column(j, T(-1));
          break;
        }
        v = clo_[j].value();
      } else if (c_[j] < T(0)) {
        if (!cup_[j].finite()) {
          unbounded_column(j, T(1));
          break;
        }
        v = cup_[j].value();
      } else {
        v = clo_[j].finite() ? clo_[j].value() : cup_[j].finite() ? cup_[j].value() : T(0);
      }
      fix_column(j, v);
      ++count;
    }
    return count;
  }

  std::size_t reduce_row_singletons() {
    std::size_t count = 0;
    bool again = true;
    while (again && in_progress()) {
      again = false;
      for (std::size_t i = 0; i < m_ && in_progress(); ++i) {
        if (!row_active_[i] || row_count_[i] != 1) continue;
        std::size_t j = 0;
        T a = T(0);
        for (const auto& [col, v] : rows_[i])
          if (col_active_[col]) j = col, a = v;
        // a x in [l, u]  ->  x in [l/a, u/a], swapped for a < 0
        Bound lo = a > T(0) ? div(rlo_[i], a) : div(rup_[i], a);
        Bound up = a > T(0) ? div(rup_[i], a) : div(rlo_[i], a);
        RowSingleton rec{i, j, a, clo_[j], cup_[j], false, false};
        if (lo.finite() && (!clo_[j].finite() || lo.value() > clo_[j].value())) {
          clo_[j] = lo;
          rec.tightened_lower = true;
        }
        if (up.finite() && (!cup_[j].finite() || up.value() < cup_[j].value())) {
          cup_[j] = up;
          rec.tightened_upper = true;
        }
        if (inverted(clo_[j], cup_[j])) {
          if (!nearly_equal(clo_[j], cup_[j])) {
            // a x_j cannot reach [l, u] within the column's bounds
            const bool too_low = a > T(0) ? rec.tightened_lower : rec.tightened_upper;
            infeasible_row(i, too_low ? T(1) : T(-1));
            break;
          }
          if (rec.tightened_lower) cup_[j] = clo_[j];
          else clo_[j] = cup_[j];
        }
        remove_row(i);
        stack_.push_back(rec);
        ++count;
        again = true;
      }
    }
    return count;
  }

  std::size_t reduce_fixed_variables() {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n_ && in_progress(); ++j) {
      if (!col_active_[j] || !clo_[j].finite() || !cup_[j].finite()) continue;
      if (!detail::gap_is_zero(clo_[j].value(), cup_[j].value())) continue;
      fix_column(j, clo_[j].value());
      ++count;
    }
    return count;
  }

  std::size_t reduce_forcing_dominated_rows() {
    std::size_t count = 0;
    for (std::size_t i = 0; i < m_ && in_progress(); ++i) {
      if (!row_active_[i] || row_count_[i] == 0) continue;
      const auto [inf, sup] = activity(i);
      if (below(sup, rlo_[i], true)) {
        infeasible_row(i, T(1));
        break;
      }
      if (above(inf, rup_[i], true)) {
        infeasible_row(i, T(-1));
        break;
      }
      if (inf.finite() && rup_[i].finite() && close(inf.value(), rup_[i].value())) {
        force_row(i, true);
        ++count;
      } else if (sup.finite() && rlo_[i].finite() && close(sup.value(), rlo_[i].value())) {
        force_row(i, false);
        ++count;
      } else if ((!rlo_[i].finite() || (inf.finite() && inf.value() >= rlo_[i].value())) &&
                 (!rup_[i].finite() || (sup.finite() && sup.value() <= rup_[i].value()))) {
        remove_row(i);
        stack_.push_back(DroppedRow{i});
        ++count;
      }
    }
    return count;
  }

  std::size_t reduce_free_column_singletons() {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n_ && in_progress(); ++j) {
      if (!col_active_[j] || col_count_[j] != 1) continue;
      std::size_t i = 0;
      T a = T(0);
      for (const auto& [row, v] : cols_[j])
        if (row_active_[row]) i = row, a = v;
      const T y = c_[j] / a;
      const bool equality = rlo_[i].finite() && rup_[i].finite() && rlo_[i].value() == rup_[i].value();
      Bound r;
      if (equality || y == T(0)) {
        r = rlo_[i].finite() ? rlo_[i] : rup_[i];
      } else if (y > T(0)) {
        if (!rlo_[i].finite()) continue;
        r = rlo_[i];
      } else {
        if (!rup_[i].finite()) continue;
        r = rup_[i];
      }
      if (!implied_free(i, j, a)) continue;

      FreeColumnSingleton rec{i, j, a, y, r, {}};
      for (const auto& [k, v] : rows_[i])
        if (k != j && col_active_[k]) rec.others.push_back({k, v});
      if (y != T(0)) {
        for (const auto& [k, v] : rec.others) c_[k] -= y * v;
        c0_ += y * r.value();
      }
      remove_row(i);
      remove_col(j);
      stack_.push_back(std::move(rec));
      ++count;
    }
    return count;
  }

  std::size_t reduce_dominated_columns() {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n_ && in_progress(); ++j) {
      if (!col_active_[j]) continue;
      // Range of s_j = c_j - sum_i a_ij y_i over the weak dual bounds of the rows.
      T smin = c_[j], smax = c_[j];
      bool min_inf = false, max_inf = false;
      for (const auto& [i, a] : cols_[j]) {
        if (!row_active_[i]) continue;
        const bool lo = rlo_[i].finite(), up = rup_[i].finite();
        if (lo && up) {
          min_inf = max_inf = true;  // y free
        } else if (lo) {
          // y >= 0
          (a > T(0) ? min_inf : max_inf) = true;
        } else if (up) {
          // y <= 0
          (a > T(0) ? max_inf : min_inf) = true;
        }
      }
      using std::abs;
      const T tol = T(1e-12) * (T(1) + abs(c_[j]));
      if (!min_inf && smin > tol) {
        if (!clo_[j].finite()) continue;  // dual infeasible; left to the solver
        fix_column(j, clo_[j].value());
        ++count;
      } else if (!max_inf && smax < -tol) {
        if (!cup_[j].finite()) continue;
        fix_column(j, cup_[j].value());
        ++count;
      }
    }
    return count;
  }

  /// The reduction loop; returns the number of reductions applied.
  std::size_t run() {
    std::size_t total = 0;
    total += reduce_empty_rows();
    total += reduce_empty_columns();
    for (;;) {
      std::size_t pass = 0;
      pass += check_bounds();
      pass += reduce_empty_columns();
      pass += singletons();
      pass += reduce_fixed_variables();
      pass += singletons();
      pass += reduce_forcing_dominated_rows();
      pass += singletons();
      pass += reduce_free_column_singletons();
      pass += singletons();
      pass += reduce_dominated_columns();
      total += pass;
      if (!in_progress() || pass == 0) break;
    }
    if (in_progress()) {
      pass_cleanup();
      if (active_rows() == 0 && active_cols() == 0) status_ = PresolveStatus::ReducedToEmpty;
    }
    return total;
  }

  // ---- reduced problem and postsolve --------------------------------------

  /// The problem on active rows and columns, in the original sense.
  GeneralLP<T> reduced() {
    red_rows_.clear();
    red_cols_.clear();
    std::vector<std::size_t> rmap(m_, npos), cmap(n_, npos);
    for (std::size_t i = 0; i < m_; ++i)
      if (row_active_[i]) rmap[i] = red_rows_.size(), red_rows_.push_back(i);
    for (std::size_t j = 0; j < n_; ++j)
      if (col_active_[j]) cmap[j] = red_cols_.size(), red_cols_.push_back(j);
    GeneralLP<T> lp;
    lp.name = orig_.name;
    lp.sense = orig_.sense;
    lp.c0 = sign_ * c0_;
    std::vector<Triplet<T>> t;
    for (std::size_t j : red_cols_) {
      lp.c.push_back(sign_ * c_[j]);
      lp.col_lower.push_back(clo_[j]);
      lp.col_upper.push_back(cup_[j]);
      lp.col_names.push_back(orig_.col_name(j));
      for (const auto& [i, v] : cols_[j])
        if (row_active_[i]) t.push_back({rmap[i], cmap[j], v});
    }
    for (std::size_t i : red_rows_) {
      lp.row_lower.push_back(rlo_[i]);
      lp.row_upper.push_back(rup_[i]);
      lp.row_names.push_back(orig_.row_name(i));
    }
    lp.A = SparseMatrix<T>::from_triplets(red_rows_.size(), red_cols_.size(), std::move(t));
    reduced_built_ = true;
    return lp;
  }

  /// Scales the reduced problem and remembers the factors for postsolve.
  GeneralLP<T> scale(const GeneralLP<T>& reduced_lp) {
    scaling_ = compute_scaling(reduced_lp.A);
    scaled_ = true;
    return apply_scaling(reduced_lp, scaling_);
  }
  const ScalingFactors<T>& scaling() const { return scaling_; }

  /// Solution for a problem that presolve finished on its own.
  Solution<T> terminal_solution() const {
    Solution<T> sol;
    switch (status_) {
      case PresolveStatus::Infeasible:
        sol.status = Status::PrimalInfeasible;
        sol.dual_ray = ray_;
        return sol;
      case PresolveStatus::Unbounded:
        sol.status = Status::DualInfeasible;
        sol.primal_ray = ray_;
        return sol;
      case PresolveStatus::ReducedToEmpty: {
        Solution<T> empty;
        empty.status = Status::Optimal;
        return postsolve(empty);
      }
      case PresolveStatus::InProgress: break;
    }
    throw PreconditionError("presolve did not terminate the problem");
  }

  /// Whether the terminal ray certifies the status for the original bounds.
  /// Rays found after bound tightening may only hold for the tightened problem.
  bool certificate_valid() const {
    using std::abs;
    if (status_ == PresolveStatus::Infeasible) {
      // y'(Ax) >= L for every feasible row activity, y'Ax <= U over the column box
      std::vector<T> d(n_, T(0));
      orig_.A.mul_transpose(std::span<const T>(ray_), std::span<T>(d), T(1), T(0));
      T L = T(0), U = T(0), mag = T(0);
      for (std::size_t i = 0; i < m_; ++i) {
        if (ray_[i] == T(0)) continue;
        const Bound& b = ray_[i] > T(0) ? orig_.row_lower[i] : orig_.row_upper[i];
        if (!b.finite()) return false;
        L += ray_[i] * b.value();
        mag += abs(ray_[i] * b.value());
      }
      for (std::size_t j = 0; j < n_; ++j) {
        if (d[j] == T(0)) continue;
        const Bound& b = d[j] > T(0) ? orig_.col_upper[j] : orig_.col_lower[j];
        if (!b.finite()) return false;
        U += d[j] * b.value();
        mag += abs(d[j] * b.value());
      }
      return L - U > feas_tol() * (T(1) + mag);
    }
    if (status_ == PresolveStatus::Unbounded) {
      std::vector<T> ad(m_, T(0));
      orig_.A.mul(std::span<const T>(ray_), std::span<T>(ad), T(1), T(0));
      auto in_cone = [](const T& v, const Bound& lo, const Bound& up) {
        return !(lo.finite() && v < T(0)) && !(up.finite() && v > T(0));
      };
      for (std::size_t i = 0; i < m_; ++i)
        if (!in_cone(ad[i], orig_.row_lower[i], orig_.row_upper[i])) return false;
      T slope = T(0);
      for (std::size_t j = 0; j < n_; ++j) {
        if (!in_cone(ray_[j], orig_.col_lower[j], orig_.col_upper[j])) return false;
        slope += sign_ * orig_.c[j] * ray_[j];
      }
      return slope < T(0);
    }
    return false;
  }

  /// Full-space solution from a solution of the (scaled) reduced problem.
  Solution<T> postsolve(const Solution<T>& reduced_sol) const {
    const Solution<T> rs = scaled_ ? unscale(reduced_sol, scaling_) : reduced_sol;
    const std::size_t nr = reduced_built_ ? red_rows_.size() : 0, nc = reduced_built_ ? red_cols_.size() : 0;
    if (!reduced_built_ && (active_rows() != 0 || active_cols() != 0))
      throw StackCorruption("postsolve: reduced problem was never formed");
    Solution<T> out;
    out.status = rs.status;
    out.iterations = rs.iterations;
    out.solve_time = rs.solve_time;

    if (rs.status == Status::PrimalInfeasible) {
      if (rs.dual_ray.size() != nr) throw MapMismatch("postsolve: dual ray length differs from reduced rows");
      out.dual_ray.assign(m_, T(0));
      for (std::size_t k = 0; k < nr; ++k) out.dual_ray[red_rows_[k]] = rs.dual_ray[k];
      return out;
    }
    if (rs.status == Status::DualInfeasible) {
      if (rs.primal_ray.size() != nc) throw MapMismatch("postsolve: primal ray length differs from reduced columns");
      out.primal_ray.assign(n_, T(0));
      for (std::size_t k = 0; k < nc; ++k) out.primal_ray[red_cols_[k]] = rs.primal_ray[k];
      for (auto it = stack_.rbegin(); it != stack_.rend(); ++it)
        if (const auto* r = std::get_if<FreeColumnSingleton>(&*it)) {
          T v = T(0);
          for (const auto& [k, a] : r->others) v -= a * out.primal_ray[k];
          out.primal_ray[r->col] = v / r->a;
        }
      return out;
    }

    if (rs.x.size() != nc && !rs.x.empty()) throw MapMismatch("postsolve: primal length differs from reduced columns");
    if (rs.y.size() != nr && !rs.y.empty()) throw MapMismatch("postsolve: dual length differs from reduced rows");
    std::vector<T> x(n_, T(0)), y(m_, T(0));
    std::vector<bool> col_known(n_, false), row_known(m_, false);
    for (std::size_t k = 0; k < nc; ++k) {
      if (!rs.x.empty()) x[red_cols_[k]] = rs.x[k];
      col_known[red_cols_[k]] = true;
    }
    for (std::size_t k = 0; k < nr; ++k) {
      if (!rs.y.empty()) y[red_rows_[k]] = sign_ * rs.y[k];
      row_known[red_rows_[k]] = true;
    }
    for (const auto& rec : stack_)
      if (const auto* r = std::get_if<FreeColumnSingleton>(&rec)) y[r->row] = r->y;

    auto restore_col = [&](std::size_t j) {
      if (col_known[j]) throw StackCorruption("postsolve: column restored twice");
      col_known[j] = true;
    };
    auto restore_row = [&](std::size_t i) {
      if (row_known[i]) throw StackCorruption("postsolve: row restored twice");
      row_known[i] = true;
    };
    // c_j - sum over rows other than `skip` of a_ij y_i (original costs, min sense)
    auto reduced_cost = [&](std::size_t j, std::size_t skip) {
      T s = sign_ * orig_.c[j];
      for (const auto& [i, a] : cols_[j])
        if (i != skip) s -= a * y[i];
      return s;
    };

    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      std::visit(
          [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, FixedColumn>) {
              restore_col(r.col);
              x[r.col] = r.value;
            } else if constexpr (std::is_same_v<R, DroppedRow>) {
              restore_row(r.row);
              y[r.row] = T(0);
            } else if constexpr (std::is_same_v<R, RowSingleton>) {
              restore_row(r.row);
              if (!col_known[r.col]) throw StackCorruption("postsolve: singleton column not yet restored");
              const T s = reduced_cost(r.col, r.row);
              // The part of s_j held by a bound this row introduced moves to the row.
              const bool at_lower = s > T(0) && r.tightened_lower;
              const bool at_upper = s < T(0) && r.tightened_upper;
              y[r.row] = at_lower || at_upper ? s / r.a : T(0);
            } else if constexpr (std::is_same_v<R, ForcingRow>) {
              restore_row(r.row);
              for (const auto& [j, a, v] : r.fixed) {
                restore_col(j);
                x[j] = v;
              }
              T yi = T(0);
              for (const auto& [j, a, v] : r.fixed) {
                const T q = reduced_cost(j, r.row) / a;
                if (r.at_upper ? q < yi : q > yi) yi = q;
              }
              y[r.row] = yi;
            } else if constexpr (std::is_same_v<R, FreeColumnSingleton>) {
              restore_row(r.row);
              restore_col(r.col);
              T other = T(0);
              for (const auto& [k, a] : r.others) other += a * x[k];
              // With y = 0 any activity in [l, u] keeps x_j in its bounds.
              const T rv = r.rhs.finite() ? r.rhs.value() : other;
              x[r.col] = (rv - other) / r.a;
            }
          },
          *it);
    }

    // s = c - A'y over the original problem, then back to the problem's sense.
    std::vector<T> s(n_);
    for (std::size_t j = 0; j < n_; ++j) s[j] = reduced_cost(j, npos);
    out.x = std::move(x);
    out.y.resize(m_);
    out.s.resize(n_);
    for (std::size_t i = 0; i < m_; ++i) out.y[i] = sign_ * y[i];
    for (std::size_t j = 0; j < n_; ++j) out.s[j] = sign_ * s[j];
    out.objective = orig_.objective(out.x);
    // Lagrangian bound from finite bounds only.
    T dual = sign_ * orig_.c0;
    for (std::size_t i = 0; i < m_; ++i) {
      const Bound& b = y[i] > T(0) ? orig_.row_lower[i] : orig_.row_upper[i];
      if (y[i] != T(0) && b.finite()) dual += y[i] * b.value();
    }
    for (std::size_t j = 0; j < n_; ++j) {
      const Bound& b = s[j] > T(0) ? orig_.col_lower[j] : orig_.col_upper[j];
      if (s[j] != T(0) && b.finite()) dual += s[j] * b.value();
    }
    out.dual_objective = sign_ * dual;
    return out;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  struct FixedColumn {
    std::size_t col;
    T value;
  };
  struct DroppedRow {
    std::size_t row;
  };
  struct RowSingleton {
    std::size_t row, col;
    T a;
    Bound old_lower, old_upper;
    bool tightened_lower, tightened_upper;
  };
  struct ForcingRow {
    std::size_t row;
    bool at_upper;  ///< minimal activity equals the upper bound
    std::vector<std::tuple<std::size_t, T, T>> fixed;  ///< (column, a_ij, value)
  };
  struct FreeColumnSingleton {
    std::size_t row, col;
    T a;
    T y;    ///< pinned row dual c_j / a_ij (min sense)
    Bound rhs;  ///< row activity used in the substitution
    std::vector<std::pair<std::size_t, T>> others;
  };
  using Record = std::variant<FixedColumn, DroppedRow, RowSingleton, ForcingRow, FreeColumnSingleton>;

  bool in_progress() const { return status_ == PresolveStatus::InProgress; }

  static Bound div(const Bound& b, const T& a) {
    if (b.finite()) return Bound(b.value() / a);
    const bool pos = b.is_pos_inf() == (a > T(0));
    return pos ? Bound::pos_inf() : Bound::neg_inf();
  }
  static T feas_tol() { return T(1e-9); }
  static bool close(const T& a, const T& b) {
    using std::abs;
    const T scale = abs(a) > T(1) ? abs(a) : T(1);
    return abs(a - b) <= feas_tol() * scale;
  }
  static bool nearly_equal(const Bound& a, const Bound& b) {
    return a.finite() && b.finite() && close(a.value(), b.value());
  }
  static bool inverted(const Bound& lo, const Bound& up) { return lo.as_scalar() > up.as_scalar(); }
  /// b > v (beyond tolerance when tol is set)
  static bool above(const Bound& b, const T& v, bool tol = false) {
    if (b.is_pos_inf()) return true;
    if (!b.finite()) return false;
    return tol ? b.value() > v && !close(b.value(), v) : b.value() > v;
  }
  static bool below(const Bound& b, const T& v, bool tol = false) {
    if (b.is_neg_inf()) return true;
    if (!b.finite()) return false;
    return tol ? b.value() < v && !close(b.value(), v) : b.value() < v;
  }
  static bool above(const Bound& a, const Bound& b, bool tol) { return b.finite() && above(a, b.value(), tol); }
  static bool below(const Bound& a, const Bound& b, bool tol) { return b.finite() && below(a, b.value(), tol); }

  std::size_t singletons() { return reduce_empty_rows() + reduce_row_singletons(); }

  void pass_cleanup() {
    reduce_empty_rows();
    reduce_empty_columns();
  }

  void remove_row(std::size_t i) {
    row_active_[i] = false;
    for (const auto& [j, v] : rows_[i])
      if (col_active_[j]) --col_count_[j];
  }
  void remove_col(std::size_t j) {
    col_active_[j] = false;
    for (const auto& [i, v] : cols_[j])
      if (row_active_[i]) --row_count_[i];
  }

  /// Substitutes x_j = v into rows and objective.
  void fix_column(std::size_t j, T v) {
    for (const auto& [i, a] : cols_[j]) {
      if (!row_active_[i]) continue;
      if (rlo_[i].finite()) rlo_[i] = Bound(rlo_[i].value() - a * v);
      if (rup_[i].finite()) rup_[i] = Bound(rup_[i].value() - a * v);
    }
    c0_ += c_[j] * v;
    remove_col(j);
    stack_.push_back(FixedColumn{j, v});
  }

  std::pair<Bound, Bound> activity(std::size_t i) const {
    T inf = T(0), sup = T(0);
    bool inf_inf = false, sup_inf = false;
    for (const auto& [j, a] : rows_[i]) {
      if (!col_active_[j]) continue;
      const Bound& lo = a > T(0) ? clo_[j] : cup_[j];
      const Bound& up = a > T(0) ? cup_[j] : clo_[j];
      if (lo.finite()) inf += a * lo.value();
      else inf_inf = true;
      if (up.finite()) sup += a * up.value();
      else sup_inf = true;
    }
    return {inf_inf ? Bound::neg_inf() : Bound(inf), sup_inf ? Bound::pos_inf() : Bound(sup)};
  }

  void force_row(std::size_t i, bool at_upper) {
    ForcingRow rec{i, at_upper, {}};
    std::vector<std::pair<std::size_t, T>> cols;
    for (const auto& [j, a] : rows_[i])
      if (col_active_[j]) cols.push_back({j, a});
    for (const auto& [j, a] : cols) {
      // minimal activity: a > 0 at lower, a < 0 at upper; maximal: the reverse
      const bool lower = (a > T(0)) == at_upper;
      const T v = lower ? clo_[j].value() : cup_[j].value();
      rec.fixed.push_back({j, a, v});
      for (const auto& [k, b] : cols_[j]) {
        if (!row_active_[k] || k == i) continue;
        if (rlo_[k].finite()) rlo_[k] = Bound(rlo_[k].value() - b * v);
        if (rup_[k].finite()) rup_[k] = Bound(rup_[k].value() - b * v);
      }
      c0_ += c_[j] * v;
    }
    for (const auto& [j, a] : cols) remove_col(j);
    row_active_[i] = false;
    stack_.push_back(std::move(rec));
  }

  /// One-row test: does the row force x_j into its own bounds for every
  /// activity in [l, u] and every admissible value of the other columns?
  bool implied_free(std::size_t i, std::size_t j, const T& a) const {
    if (!clo_[j].finite() && !cup_[j].finite()) return true;
    T inf = T(0), sup = T(0);
    bool inf_inf = false, sup_inf = false;
    for (const auto& [k, b] : rows_[i]) {
      if (k == j || !col_active_[k]) continue;
      const Bound& lo = b > T(0) ? clo_[k] : cup_[k];
      const Bound& up = b > T(0) ? cup_[k] : clo_[k];
      if (lo.finite()) inf += b * lo.value();
      else inf_inf = true;
      if (up.finite()) sup += b * up.value();
      else sup_inf = true;
    }
    // a x_j in [l - sup, u - inf]
    const Bound lo_ax = rlo_[i].finite() && !sup_inf ? Bound(rlo_[i].value() - sup) : Bound::neg_inf();
    const Bound up_ax = rup_[i].finite() && !inf_inf ? Bound(rup_[i].value() - inf) : Bound::pos_inf();
    const Bound lo = a > T(0) ? div(lo_ax, a) : div(up_ax, a);
    const Bound up = a > T(0) ? div(up_ax, a) : div(lo_ax, a);
    const bool lo_ok = !clo_[j].finite() || (lo.finite() && lo.value() >= clo_[j].value());
    const bool up_ok = !cup_[j].finite() || (up.finite() && up.value() <= cup_[j].value());
    return lo_ok && up_ok;
  }

  void infeasible_row(std::size_t i, T dir) {
    std::vector<T> ray(m_, T(0));
    ray[i] = dir;
    set_infeasible(std::move(ray));
  }
  void set_infeasible(std::vector<T> ray) {
    status_ = PresolveStatus::Infeasible;
    ray_ = std::move(ray);
  }
  void unbounded_column(std::size_t j, T dir) {
    status_ = PresolveStatus::Unbounded;
    ray_.assign(n_, T(0));
    ray_[j] = dir;
  }

  GeneralLP<T> orig_;
  std::size_t m_ = 0, n_ = 0;
  T sign_ = T(1);
  std::vector<std::vector<std::pair<std::size_t, T>>> rows_, cols_;
  std::vector<bool> row_active_, col_active_;
  std::vector<std::size_t> row_count_, col_count_;
  std::vector<Bound> rlo_, rup_, clo_, cup_;
  std::vector<T> c_;
  T c0_ = T(0);
  std::vector<Record> stack_;
  PresolveStatus status_ = PresolveStatus::InProgress;
  std::vector<T> ray_;
  std::vector<std::size_t> red_rows_, red_cols_;
  bool reduced_built_ = false;
  ScalingFactors<T> scaling_;
  bool scaled_ = false;
};

template <class T>
PresolveState<T> presolve(const GeneralLP<T>& lp) {
  PresolveState<T> state(lp);
  state.run();
  return state;
}

}  // namespace homlp
