#pragma once

#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "homlp/errors.hpp"
#include "homlp/problem.hpp"
#include "homlp/scalar.hpp"

namespace homlp {

/// Lexical content of a free-format MPS file. Numbers are kept as text so
/// they can be converted to any scalar type without a detour through double.
struct MpsDocument {
  struct Row {
    char type;  // 'N', 'E', 'L', 'G'
    std::string name;
  };
  struct Entry {
    std::string column;  // column name (COLUMNS) or set name (RHS/RANGES)
    std::string row;
    std::string value;
    int line;
  };
  struct Bound {
    std::string type;
    std::string column;
    std::string value;  // empty for FR/MI/PL
    int line;
  };

  std::string name;
  bool maximize = false;
  std::string objective_row;
  std::vector<Row> rows;  // constraint rows only, in declaration order
  std::vector<std::string> columns;
  std::vector<Entry> coefficients;  // Entry::column is the column name
  std::vector<Entry> rhs;
  std::vector<Entry> ranges;
  std::vector<Bound> bounds;
};

/// Tokenizes and checks the section structure; names are resolved here.
MpsDocument read_mps_document(std::string_view text);

template <class T>
GeneralLP<T> to_general_lp(const MpsDocument& doc) {
  using Bound = ExtendedReal<T>;
  GeneralLP<T> lp;
  lp.name = doc.name;
  lp.sense = doc.maximize ? Sense::Maximize : Sense::Minimize;

  std::unordered_map<std::string, std::size_t> row_index, col_index;
  for (std::size_t i = 0; i < doc.rows.size(); ++i) row_index.emplace(doc.rows[i].name, i);
  for (std::size_t j = 0; j < doc.columns.size(); ++j) col_index.emplace(doc.columns[j], j);
  const std::size_t m = doc.rows.size(), n = doc.columns.size();

  auto num = [](const std::string& s, int line) {
    try {
      return ScalarTraits<T>::parse(s);
    } catch (const std::exception&) {
      throw MpsSyntaxError("invalid number '" + s + "'", line);
    }
  };

  lp.c.assign(n, T(0));
  std::vector<Triplet<T>> trip;
  for (const auto& e : doc.coefficients) {
    const std::size_t j = col_index.at(e.column);
    const T v = num(e.value, e.line);
    if (e.row == doc.objective_row) {
      lp.c[j] += v;
    } else {
      trip.push_back({row_index.at(e.row), j, v});
    }
  }
  lp.A = SparseMatrix<T>::from_triplets(m, n, std::move(trip));

  std::vector<T> rhs(m, T(0));
  for (const auto& e : doc.rhs) {
    const T v = num(e.value, e.line);
    if (e.row == doc.objective_row)
      lp.c0 = -v;
    else
      rhs[row_index.at(e.row)] = v;
  }
  std::vector<T> range(m, T(0));
  std::vector<bool> has_range(m, false);
  for (const auto& e : doc.ranges) {
    const std::size_t i = row_index.at(e.row);
    range[i] = num(e.value, e.line);
    has_range[i] = true;
  }

  lp.row_lower.resize(m);
  lp.row_upper.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    using std::abs;
    const T b = rhs[i];
    const T r = range[i];
    switch (doc.rows[i].type) {
      case 'E':
        if (!has_range[i]) {
          lp.row_lower[i] = b;
          lp.row_upper[i] = b;
        } else if (r >= T(0)) {
          lp.row_lower[i] = b;
          lp.row_upper[i] = b + r;
        } else {
          lp.row_lower[i] = b + r;
          lp.row_upper[i] = b;
        }
        break;
      case 'L':
        lp.row_lower[i] = has_range[i] ? Bound(b - abs(r)) : Bound::neg_inf();
        lp.row_upper[i] = b;
        break;
      case 'G':
        lp.row_lower[i] = b;
        lp.row_upper[i] = has_range[i] ? Bound(b + abs(r)) : Bound::pos_inf();
        break;
    }
  }

  lp.col_lower.assign(n, Bound(T(0)));
  lp.col_upper.assign(n, Bound::pos_inf());
  std::vector<bool> lower_declared(n, false);
  for (const auto& bd : doc.bounds) {
    const std::size_t j = col_index.at(bd.column);
    const std::string& t = bd.type;
    if (t == "UP") {
      const T v = num(bd.value, bd.line);
      lp.col_upper[j] = v;
      if (v < T(0) && !lower_declared[j]) lp.col_lower[j] = Bound::neg_inf();
    } else if (t == "LO") {
      lp.col_lower[j] = num(bd.value, bd.line);
      lower_declared[j] = true;
    } else if (t == "FX") {
      const T v = num(bd.value, bd.line);
      lp.col_lower[j] = v;
      lp.col_upper[j] = v;
      lower_declared[j] = true;
    } else if (t == "FR") {
      lp.col_lower[j] = Bound::neg_inf();
      lp.col_upper[j] = Bound::pos_inf();
      lower_declared[j] = true;
    } else if (t == "MI") {
      lp.col_lower[j] = Bound::neg_inf();
      lower_declared[j] = true;
    } else if (t == "PL") {
      lp.col_upper[j] = Bound::pos_inf();
    }
  }

  lp.row_names.reserve(m);
  for (const auto& r : doc.rows) lp.row_names.push_back(r.name);
  lp.col_names = doc.columns;
  return lp;
}

template <class T>
GeneralLP<T> parse_mps(std::string_view text) {
  return to_general_lp<T>(read_mps_document(text));
}

/// Writes free-format MPS that parses back to the same GeneralLP.
template <class T>
std::string write_mps(const GeneralLP<T>& lp) {
  auto fmt = [](const T& v) { return ScalarTraits<T>::format(v); };
  const std::size_t m = lp.num_rows(), n = lp.num_cols();
  std::ostringstream os;
  os << "NAME " << (lp.name.empty() ? "LP" : lp.name) << "\n";
  if (lp.sense == Sense::Maximize) os << "OBJSENSE\n    MAX\n";
  const std::string obj = "OBJ";
  os << "ROWS\n N  " << obj << "\n";
  std::vector<char> type(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& lo = lp.row_lower[i];
    const auto& up = lp.row_upper[i];
    if (lo.finite() && up.finite())
      type[i] = lo.value() == up.value() ? 'E' : 'L';
    else if (up.finite())
      type[i] = 'L';
    else if (lo.finite())
      type[i] = 'G';
    else
      type[i] = 'N';
    os << " " << type[i] << "  " << lp.row_name(i) << "\n";
  }
  os << "COLUMNS\n";
  const auto colp = lp.A.col_ptr();
  const auto rowi = lp.A.row_idx();
  const auto vals = lp.A.values();
  for (std::size_t j = 0; j < n; ++j) {
    const std::string cn = lp.col_name(j);
    if (lp.c[j] != T(0) || colp[j] == colp[j + 1]) os << "    " << cn << "  " << obj << "  " << fmt(lp.c[j]) << "\n";
    for (std::size_t p = colp[j]; p < colp[j + 1]; ++p)
      os << "    " << cn << "  " << lp.row_name(rowi[p]) << "  " << fmt(vals[p]) << "\n";
  }
  os << "RHS\n";
  if (lp.c0 != T(0)) os << "    RHS  " << obj << "  " << fmt(-lp.c0) << "\n";
  for (std::size_t i = 0; i < m; ++i) {
    T b = T(0);
    if (type[i] == 'E' || type[i] == 'L') b = lp.row_upper[i].value();
    if (type[i] == 'G') b = lp.row_lower[i].value();
    if (b != T(0)) os << "    RHS  " << lp.row_name(i) << "  " << fmt(b) << "\n";
  }
  bool any_range = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (type[i] != 'L' || !lp.row_lower[i].finite()) continue;
    if (!any_range) os << "RANGES\n";
    any_range = true;
    os << "    RNG  " << lp.row_name(i) << "  " << fmt(lp.row_upper[i].value() - lp.row_lower[i].value()) << "\n";
  }
  bool any_bound = false;
  auto bound = [&](const char* t, std::size_t j, const std::string& v) {
    if (!any_bound) os << "BOUNDS\n";
    any_bound = true;
    os << " " << t << " BND  " << lp.col_name(j);
    if (!v.empty()) os << "  " << v;
    os << "\n";
  };
  for (std::size_t j = 0; j < n; ++j) {
    const auto& lo = lp.col_lower[j];
    const auto& up = lp.col_upper[j];
    if (lo.finite() && up.finite() && lo.value() == up.value()) {
      bound("FX", j, fmt(lo.value()));
      continue;
    }
    if (!lo.finite() && !up.finite()) {
      bound("FR", j, "");
      continue;
    }
    if (!lo.finite()) bound("MI", j, "");
    if (lo.finite() && (lo.value() != T(0) || (up.finite() && up.value() < T(0)))) bound("LO", j, fmt(lo.value()));
    if (up.finite()) bound("UP", j, fmt(up.value()));
  }
  os << "ENDATA\n";
  return os.str();
}

/// Text report of a solution in the original space. See README for the layout.
template <class T>
std::string write_solution(const Solution<T>& sol, const std::vector<std::string>& row_names,
                           const std::vector<std::string>& col_names, const std::vector<T>& row_activity = {}) {
  auto fmt = [](const T& v) { return ScalarTraits<T>::format(v); };
  auto rname = [&](std::size_t i) {
    return i < row_names.size() && !row_names[i].empty() ? row_names[i] : "R" + std::to_string(i + 1);
  };
  auto cname = [&](std::size_t j) {
    return j < col_names.size() && !col_names[j].empty() ? col_names[j] : "C" + std::to_string(j + 1);
  };
  std::ostringstream os;
  os << "status " << status_name(sol.status) << "\n";
  os << "iterations " << sol.iterations << "\n";
  if (sol.status == Status::PrimalInfeasible) {
    os << "dual_ray " << sol.dual_ray.size() << "\n";
    for (std::size_t i = 0; i < sol.dual_ray.size(); ++i) os << rname(i) << " " << fmt(sol.dual_ray[i]) << "\n";
    return os.str();
  }
  if (sol.status == Status::DualInfeasible) {
    os << "primal_ray " << sol.primal_ray.size() << "\n";
    for (std::size_t j = 0; j < sol.primal_ray.size(); ++j) os << cname(j) << " " << fmt(sol.primal_ray[j]) << "\n";
    return os.str();
  }
  os << "objective " << fmt(sol.objective) << "\n";
  os << "columns " << sol.x.size() << "\n";
  for (std::size_t j = 0; j < sol.x.size(); ++j)
    os << cname(j) << " " << fmt(sol.x[j]) << " " << fmt(j < sol.s.size() ? sol.s[j] : T(0)) << "\n";
  os << "rows " << sol.y.size() << "\n";
  for (std::size_t i = 0; i < sol.y.size(); ++i)
    os << rname(i) << " " << fmt(i < row_activity.size() ? row_activity[i] : T(0)) << " " << fmt(sol.y[i]) << "\n";
  return os.str();
}

}  // namespace homlp
