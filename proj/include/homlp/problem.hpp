#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "homlp/errors.hpp"
#include "homlp/scalar.hpp"
#include "homlp/sparse.hpp"

namespace homlp {

enum class Sense { Minimize, Maximize };

enum class Status { Optimal, PrimalInfeasible, DualInfeasible, IterationLimit, TimeLimit, NumericalFailure };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::PrimalInfeasible: return "PrimalInfeasible";
    case Status::DualInfeasible: return "DualInfeasible";
    case Status::IterationLimit: return "IterationLimit";
    case Status::TimeLimit: return "TimeLimit";
    case Status::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

/// LP in two-sided form:  min/max c'x + c0  s.t.  lb <= Ax <= ub,  lx <= x <= ux.
template <class T>
struct GeneralLP {
  using Bound = ExtendedReal<T>;

  std::string name;
  Sense sense = Sense::Minimize;
  std::vector<T> c;
  T c0 = T(0);
  SparseMatrix<T> A;
  std::vector<Bound> row_lower, row_upper;
  std::vector<Bound> col_lower, col_upper;
  std::vector<std::string> row_names, col_names;

  std::size_t num_rows() const { return A.rows(); }
  std::size_t num_cols() const { return A.cols(); }

  std::string row_name(std::size_t i) const {
    return i < row_names.size() && !row_names[i].empty() ? row_names[i] : "R" + std::to_string(i + 1);
  }
  std::string col_name(std::size_t j) const {
    return j < col_names.size() && !col_names[j].empty() ? col_names[j] : "C" + std::to_string(j + 1);
  }

  /// c'x + c0 in the problem's own sense.
  T objective(const std::vector<T>& x) const {
    T v = c0;
    for (std::size_t j = 0; j < c.size(); ++j) v += c[j] * x[j];
    return v;
  }
};

/// Internal form:  min c'x + constant  s.t.  Ax = b,  x_i + w_i = u_i (i in I),  x, w >= 0.
template <class T>
struct StandardLP {
  std::shared_ptr<const AbstractMatrix<T>> A;
  std::vector<T> b;
  std::vector<T> c;
  std::vector<std::size_t> upper_index;  ///< the bounded set I, increasing
  std::vector<T> upper;                  ///< u, one entry per element of I
  T objective_constant = T(0);

  std::size_t num_rows() const { return b.size(); }
  std::size_t num_cols() const { return c.size(); }
  std::size_t num_upper() const { return upper_index.size(); }
};

/// Primal-dual result. In standard form all blocks are filled; in the original
/// space w and z are empty and s holds reduced costs c - A'y.
template <class T>
struct Solution {
  Status status = Status::NumericalFailure;
  std::vector<T> x, w, y, s, z;
  T objective = T(0);
  T dual_objective = T(0);
  std::vector<T> primal_ray;  ///< set for DualInfeasible
  std::vector<T> dual_ray;    ///< set for PrimalInfeasible (Farkas ray)
  int iterations = 0;
  double solve_time = 0.0;

  bool consistent() const {
    switch (status) {
      case Status::Optimal: return !x.empty() || !y.empty() || (x.empty() && y.empty() && s.empty());
      case Status::PrimalInfeasible: return !dual_ray.empty();
      case Status::DualInfeasible: return !primal_ray.empty();
      default: return true;
    }
  }
};

struct Diagnostic {
  enum class Kind { DimensionMismatch, InvertedBound, NonFiniteCoefficient, NonFiniteBound };
  Kind kind;
  std::string message;
};

template <class T>
std::vector<Diagnostic> validate(const GeneralLP<T>& lp) {
  std::vector<Diagnostic> out;
  const std::size_t m = lp.num_rows(), n = lp.num_cols();
  auto mismatch = [&](const char* what, std::size_t got, std::size_t want) {
    if (got != want)
      out.push_back({Diagnostic::Kind::DimensionMismatch,
                     std::string("dimension mismatch: ") + what + " has " + std::to_string(got) + ", expected " +
                         std::to_string(want)});
  };
  mismatch("c", lp.c.size(), n);
  mismatch("col_lower", lp.col_lower.size(), n);
  mismatch("col_upper", lp.col_upper.size(), n);
  mismatch("row_lower", lp.row_lower.size(), m);
  mismatch("row_upper", lp.row_upper.size(), m);
  if (!out.empty()) return out;

  for (std::size_t j = 0; j < n; ++j)
    if (!is_finite(lp.c[j]))
      out.push_back({Diagnostic::Kind::NonFiniteCoefficient, "non-finite coefficient: c of " + lp.col_name(j)});
  if (!is_finite(lp.c0)) out.push_back({Diagnostic::Kind::NonFiniteCoefficient, "non-finite coefficient: c0"});
  for (const auto& e : lp.A.triplets())
    if (!is_finite(e.value))
      out.push_back({Diagnostic::Kind::NonFiniteCoefficient,
                     "non-finite coefficient: A(" + lp.row_name(e.row) + ", " + lp.col_name(e.col) + ")"});

  auto check_pair = [&](const ExtendedReal<T>& lo, const ExtendedReal<T>& up, const std::string& who) {
    if ((lo.finite() && !is_finite(lo.value())) || (up.finite() && !is_finite(up.value())))
      out.push_back({Diagnostic::Kind::NonFiniteBound, "non-finite bound on " + who});
    else if (lo.is_pos_inf() || up.is_neg_inf() || lo.as_scalar() > up.as_scalar())
      out.push_back({Diagnostic::Kind::InvertedBound, "inverted bound on " + who});
  };
  for (std::size_t i = 0; i < m; ++i) check_pair(lp.row_lower[i], lp.row_upper[i], "row " + lp.row_name(i));
  for (std::size_t j = 0; j < n; ++j) check_pair(lp.col_lower[j], lp.col_upper[j], "column " + lp.col_name(j));
  return out;
}

/// How original columns and rows correspond to standard-form objects.
template <class T>
struct VariableMap {
  enum class ColumnKind {
    Shifted,  ///< x = offset + x'
    Negated,  ///< x = offset - x'
    Split,    ///< x = x' - x''
    Fixed,    ///< x = offset, no standard column
  };
  struct Column {
    ColumnKind kind = ColumnKind::Shifted;
    std::size_t first = 0;   ///< standard column index (unused for Fixed)
    std::size_t second = 0;  ///< negative part for Split
    T offset = T(0);
    // Fixed columns keep their data so that reduced costs can be recovered.
    T cost = T(0);
    std::vector<std::size_t> rows;
    std::vector<T> coefs;
  };
  enum class RowKind { Equality, Slack, Free };
  struct Row {
    RowKind kind = RowKind::Equality;
    std::size_t std_row = 0;
    std::size_t slack_col = 0;
    T slack_sign = T(1);  ///< +1: a'x + s = ub,  -1: a'x - s = lb
  };

  Sense sense = Sense::Minimize;
  std::size_t std_rows = 0;
  std::size_t std_cols = 0;
  std::vector<Column> columns;
  std::vector<Row> rows;
  std::vector<std::size_t> upper_index;  ///< the standard form's bounded set I

  T sense_sign() const { return sense == Sense::Maximize ? T(-1) : T(1); }
};

namespace detail {
template <class T>
bool gap_is_zero(const T& lo, const T& up) {
  using std::abs;
  const T scale = abs(lo) > T(1) ? abs(lo) : T(1);
  return up - lo <= T(1e-12) * scale;
}
}  // namespace detail

template <class T>
struct StandardForm {
  StandardLP<T> lp;
  VariableMap<T> map;
};

/// Converts to the internal standard form. Ranged and inequality rows receive
/// one slack column; free columns are split; lower bounds are shifted to zero;
/// columns with only an upper bound are negated. Fixed columns (zero gap) are
/// substituted out and recorded as Fixed in the map.
template <class T>
StandardForm<T> to_standard_form(const GeneralLP<T>& lp) {
  using ColumnKind = typename VariableMap<T>::ColumnKind;
  using RowKind = typename VariableMap<T>::RowKind;
  const std::size_t m = lp.num_rows(), n = lp.num_cols();
  for (const auto& d : validate(lp))
    if (d.kind == Diagnostic::Kind::InvertedBound) throw InfeasibleBounds(d.message);

  StandardForm<T> out;
  auto& map = out.map;
  map.sense = lp.sense;
  const T sign = map.sense_sign();

  map.rows.resize(m);
  std::size_t std_rows = 0;
  for (std::size_t i = 0; i < m; ++i) {
    auto& rm = map.rows[i];
    const auto& lo = lp.row_lower[i];
    const auto& up = lp.row_upper[i];
    if (!lo.finite() && !up.finite()) {
      rm.kind = RowKind::Free;
      continue;
    }
    rm.std_row = std_rows++;
    rm.kind = lo.finite() && up.finite() && lo.value() == up.value() ? RowKind::Equality : RowKind::Slack;
  }

  std::vector<T> cstd;
  std::vector<std::size_t> upper_index;
  std::vector<T> upper;
  T constant = lp.c0;
  std::vector<T> row_shift(m, T(0));  // sum_j a_ij * offset_j
  std::vector<Triplet<T>> trip;
  trip.reserve(lp.A.nonzeros() + m);

  const auto colp = lp.A.col_ptr();
  const auto rowi = lp.A.row_idx();
  const auto vals = lp.A.values();
  auto emit = [&](std::size_t j, std::size_t col, T scale) {
    for (std::size_t p = colp[j]; p < colp[j + 1]; ++p)
      if (map.rows[rowi[p]].kind != RowKind::Free) trip.push_back({map.rows[rowi[p]].std_row, col, scale * vals[p]});
  };

  map.columns.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto& cm = map.columns[j];
    const auto& lo = lp.col_lower[j];
    const auto& up = lp.col_upper[j];
    if (lo.finite() && up.finite() && detail::gap_is_zero(lo.value(), up.value())) {
      cm.kind = ColumnKind::Fixed;
      cm.offset = lo.value();
      cm.cost = lp.c[j];
      for (std::size_t p = colp[j]; p < colp[j + 1]; ++p) {
        cm.rows.push_back(rowi[p]);
        cm.coefs.push_back(vals[p]);
      }
    } else if (lo.finite()) {
      cm.kind = ColumnKind::Shifted;
      cm.offset = lo.value();
    } else if (up.finite()) {
      cm.kind = ColumnKind::Negated;
      cm.offset = up.value();
    } else {
      cm.kind = ColumnKind::Split;
    }

    if (cm.offset != T(0)) {
      constant += lp.c[j] * cm.offset;
      for (std::size_t p = colp[j]; p < colp[j + 1]; ++p) row_shift[rowi[p]] += vals[p] * cm.offset;
    }
    if (cm.kind == ColumnKind::Fixed) continue;

    cm.first = cstd.size();
    const T coef_sign = cm.kind == ColumnKind::Negated ? T(-1) : T(1);
    cstd.push_back(sign * coef_sign * lp.c[j]);
    emit(j, cm.first, coef_sign);
    if (cm.kind == ColumnKind::Shifted && up.finite()) {
      upper_index.push_back(cm.first);
      upper.push_back(up.value() - lo.value());
    }
    if (cm.kind == ColumnKind::Split) {
      cm.second = cstd.size();
      cstd.push_back(-sign * lp.c[j]);
      emit(j, cm.second, T(-1));
    }
  }

  std::vector<T> b(std_rows, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    auto& rm = map.rows[i];
    const auto& lo = lp.row_lower[i];
    const auto& up = lp.row_upper[i];
    if (rm.kind == RowKind::Free) continue;
    if (rm.kind == RowKind::Equality) {
      b[rm.std_row] = lo.value() - row_shift[i];
      continue;
    }
    rm.slack_col = cstd.size();
    cstd.push_back(T(0));
    if (up.finite()) {
      rm.slack_sign = T(1);
      b[rm.std_row] = up.value() - row_shift[i];
      if (lo.finite()) {
        upper_index.push_back(rm.slack_col);
        upper.push_back(up.value() - lo.value());
      }
    } else {
      rm.slack_sign = T(-1);
      b[rm.std_row] = lo.value() - row_shift[i];
    }
    trip.push_back({rm.std_row, rm.slack_col, rm.slack_sign});
  }

  map.std_rows = std_rows;
  map.std_cols = cstd.size();
  map.upper_index = upper_index;

  out.lp.A = std::make_shared<SparseMatrix<T>>(
      SparseMatrix<T>::from_triplets(map.std_rows, map.std_cols, std::move(trip)));
  out.lp.b = std::move(b);
  out.lp.c = std::move(cstd);
  // Structural columns precede slacks, so I is already increasing.
  out.lp.upper_index = std::move(upper_index);
  out.lp.upper = std::move(upper);
  out.lp.objective_constant = sign * constant;
  return out;
}

/// Maps an original-space primal point to standard form (x' and slacks).
template <class T>
std::vector<T> crush_primal(const GeneralLP<T>& lp, const VariableMap<T>& map, const std::vector<T>& x) {
  using ColumnKind = typename VariableMap<T>::ColumnKind;
  using RowKind = typename VariableMap<T>::RowKind;
  if (x.size() != map.columns.size()) throw MapMismatch("crush: primal length differs from map");
  std::vector<T> xs(map.std_cols, T(0));
  for (std::size_t j = 0; j < map.columns.size(); ++j) {
    const auto& cm = map.columns[j];
    switch (cm.kind) {
      case ColumnKind::Shifted: xs[cm.first] = x[j] - cm.offset; break;
      case ColumnKind::Negated: xs[cm.first] = cm.offset - x[j]; break;
      case ColumnKind::Split:
        xs[cm.first] = x[j] > T(0) ? x[j] : T(0);
        xs[cm.second] = x[j] < T(0) ? -x[j] : T(0);
        break;
      case ColumnKind::Fixed: break;
    }
  }
  std::vector<T> act(lp.num_rows(), T(0));
  lp.A.mul(x, act, T(1), T(0));
  for (std::size_t i = 0; i < map.rows.size(); ++i) {
    const auto& rm = map.rows[i];
    if (rm.kind != RowKind::Slack) continue;
    xs[rm.slack_col] =
        rm.slack_sign > T(0) ? lp.row_upper[i].value() - act[i] : act[i] - lp.row_lower[i].value();
  }
  return xs;
}

/// Maps a standard-form solution back to the original space.
template <class T>
Solution<T> uncrush(const Solution<T>& sol, const VariableMap<T>& map) {
  using ColumnKind = typename VariableMap<T>::ColumnKind;
  using RowKind = typename VariableMap<T>::RowKind;
  const T sign = map.sense_sign();
  Solution<T> out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.solve_time = sol.solve_time;
  out.objective = sign * sol.objective;
  out.dual_objective = sign * sol.dual_objective;

  const bool has_primal = !sol.x.empty();
  const bool has_dual = !sol.y.empty();
  if (has_primal && sol.x.size() != map.std_cols) throw MapMismatch("uncrush: primal length differs from map");
  if (has_dual && sol.y.size() != map.std_rows) throw MapMismatch("uncrush: dual length differs from map");
  if (has_dual && sol.s.size() != map.std_cols) throw MapMismatch("uncrush: reduced-cost length differs from map");
  if (!sol.primal_ray.empty() && sol.primal_ray.size() != map.std_cols)
    throw MapMismatch("uncrush: primal ray length differs from map");
  if (!sol.dual_ray.empty() && sol.dual_ray.size() != map.std_rows)
    throw MapMismatch("uncrush: dual ray length differs from map");

  // Standard reduced cost s - z (z only on bounded columns).
  std::vector<T> red;
  if (has_dual) {
    red = sol.s;
    if (!sol.z.empty()) {
      if (sol.z.size() != map.upper_index.size()) throw MapMismatch("uncrush: bound-dual length differs from map");
      for (std::size_t k = 0; k < sol.z.size(); ++k) red[map.upper_index[k]] -= sol.z[k];
    }
  }

  const std::size_t n = map.columns.size(), m = map.rows.size();
  if (has_dual) {
    out.y.assign(m, T(0));
    for (std::size_t i = 0; i < m; ++i)
      if (map.rows[i].kind != RowKind::Free) out.y[i] = sign * sol.y[map.rows[i].std_row];
  }
  if (has_primal) out.x.assign(n, T(0));
  if (has_dual) out.s.assign(n, T(0));
  for (std::size_t j = 0; j < n; ++j) {
    const auto& cm = map.columns[j];
    switch (cm.kind) {
      case ColumnKind::Shifted:
        if (has_primal) out.x[j] = cm.offset + sol.x[cm.first];
        if (has_dual) out.s[j] = sign * red[cm.first];
        break;
      case ColumnKind::Negated:
        if (has_primal) out.x[j] = cm.offset - sol.x[cm.first];
        if (has_dual) out.s[j] = -sign * red[cm.first];
        break;
      case ColumnKind::Split:
        if (has_primal) out.x[j] = sol.x[cm.first] - sol.x[cm.second];
        if (has_dual) out.s[j] = sign * red[cm.first];
        break;
      case ColumnKind::Fixed:
        if (has_primal) out.x[j] = cm.offset;
        if (has_dual) {
          T r = cm.cost;
          for (std::size_t k = 0; k < cm.rows.size(); ++k) r -= cm.coefs[k] * out.y[cm.rows[k]];
          out.s[j] = r;
        }
        break;
    }
  }

  if (!sol.primal_ray.empty()) {
    out.primal_ray.assign(n, T(0));
    for (std::size_t j = 0; j < n; ++j) {
      const auto& cm = map.columns[j];
      switch (cm.kind) {
        case ColumnKind::Shifted: out.primal_ray[j] = sol.primal_ray[cm.first]; break;
        case ColumnKind::Negated: out.primal_ray[j] = -sol.primal_ray[cm.first]; break;
        case ColumnKind::Split: out.primal_ray[j] = sol.primal_ray[cm.first] - sol.primal_ray[cm.second]; break;
        case ColumnKind::Fixed: break;
      }
    }
  }
  if (!sol.dual_ray.empty()) {
    out.dual_ray.assign(m, T(0));
    for (std::size_t i = 0; i < m; ++i)
      if (map.rows[i].kind != RowKind::Free) out.dual_ray[i] = sol.dual_ray[map.rows[i].std_row];
  }
  return out;
}

}  // namespace homlp
