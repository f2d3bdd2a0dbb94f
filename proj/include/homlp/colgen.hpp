#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <vector>

#include "homlp/block_angular.hpp"
#include "homlp/factory.hpp"
#include "homlp/errors.hpp"
#include "homlp/ipm.hpp"

namespace homlp {

enum class ColumnKind { Point, Ray, Linking, Artificial };

template <class T>
struct MasterColumn {
  ColumnKind kind = ColumnKind::Point;
  std::size_t block = 0;  ///< owning block; R for pure linking columns
  bool convexity = false; ///< has a 1 in its block's convexity row
  T cost = T(0);
  std::vector<T> link;    ///< coefficients in the m0 linking rows
  std::vector<T> point;   ///< subproblem point or ray, when the oracle supplies one
};

/// Restricted master problem
///
///   min  sum c_k lambda_k
///   s.t. sum_{k in block r, not a ray} lambda_k = 1     (r = 0..R-1)
///        sum_k a_k lambda_k = b0
///        lambda >= 0
///
/// Columns are append-only. Rays and linking columns (including the linking
/// slack/surplus artificials) sit in A_0 because they have no convexity entry.
template <class T>
class MasterProblem {
 public:
  MasterProblem() = default;
  MasterProblem(std::size_t R, std::size_t m0, std::vector<T> b0) : R_(R), m0_(m0), b0_(std::move(b0)) {
    if (b0_.size() != m0_) throw PreconditionError("master: b0 length differs from m0");
  }

  std::size_t blocks() const { return R_; }
  std::size_t linking_rows() const { return m0_; }
  const std::vector<T>& b0() const { return b0_; }
  const std::vector<MasterColumn<T>>& columns() const { return cols_; }
  std::size_t size() const { return cols_.size(); }

  std::size_t add_point(std::size_t r, T cost, std::vector<T> link, std::vector<T> point = {}) {
    return add({ColumnKind::Point, check_block(r), true, cost, check_link(std::move(link)), std::move(point)});
  }
  std::size_t add_ray(std::size_t r, T cost, std::vector<T> link, std::vector<T> ray = {}) {
    return add({ColumnKind::Ray, check_block(r), false, cost, check_link(std::move(link)), std::move(ray)});
  }
  std::size_t add_linking(T cost, std::vector<T> link) {
    return add({ColumnKind::Linking, R_, false, cost, check_link(std::move(link)), {}});
  }
  /// Artificial in block r's convexity row, or a linking artificial for r == R.
  std::size_t add_artificial(std::size_t r, T cost, std::vector<T> link) {
    if (r > R_) throw PreconditionError("master: block index out of range");
    return add({ColumnKind::Artificial, r, r < R_, cost, check_link(std::move(link)), {}});
  }

  /// Cost, structured matrix and right-hand side of the current master. order[k]
  /// is the master column stored at matrix column k.
  struct Built {
    std::shared_ptr<UnitBlockAngularMatrix<T>> matrix;
    std::vector<T> cost, rhs;
    std::vector<std::size_t> order;
  };

  Built build() const {
    Built b;
    b.matrix = std::make_shared<UnitBlockAngularMatrix<T>>(R_, m0_);
    for (std::size_t r = 0; r <= R_; ++r)
      for (std::size_t k = 0; k < cols_.size(); ++k) {
        const auto& c = cols_[k];
        const bool here = r < R_ ? c.convexity && c.block == r : !c.convexity;
        if (!here) continue;
        b.matrix->add_column(r, c.link);
        b.cost.push_back(c.cost);
        b.order.push_back(k);
      }
    b.rhs.assign(R_, T(1));
    b.rhs.insert(b.rhs.end(), b0_.begin(), b0_.end());
    return b;
  }

  /// Largest finite cost among non-artificial columns.
  T cost_scale() const {
    using std::abs;
    T v = T(0);
    for (const auto& c : cols_)
      if (c.kind != ColumnKind::Artificial) v = std::max<T>(v, abs(c.cost));
    return v;
  }

 private:
  std::size_t check_block(std::size_t r) const {
    if (r >= R_) throw PreconditionError("master: block index out of range");
    return r;
  }
  std::vector<T> check_link(std::vector<T> a) const {
    if (a.size() != m0_) throw PreconditionError("master: column length differs from m0");
    return a;
  }
  std::size_t add(MasterColumn<T> c) {
    cols_.push_back(std::move(c));
    return cols_.size() - 1;
  }

  std::size_t R_ = 0, m0_ = 0;
  std::vector<T> b0_;
  std::vector<MasterColumn<T>> cols_;
};

template <class T>
T default_penalty(const std::vector<T>& b0) {
  using std::abs;
  T v = T(1);
  for (const auto& e : b0) v = std::max<T>(v, abs(e));
  return T(1e4) * v;
}

/// Master with only artificials: one per convexity row and a slack/surplus
/// pair per linking row, all at cost `penalty` (an l1 penalty on violation).
template <class T>
MasterProblem<T> initialize_rmp(std::size_t R, std::size_t m0, std::vector<T> b0, T penalty) {
  if (!(penalty > T(0))) throw PreconditionError("initialize_rmp: penalty must be positive");
  MasterProblem<T> mp(R, m0, std::move(b0));
  for (std::size_t r = 0; r < R; ++r) mp.add_artificial(r, penalty, std::vector<T>(m0, T(0)));
  for (std::size_t i = 0; i < m0; ++i)
    for (T sgn : {T(1), T(-1)}) {
      std::vector<T> e(m0, T(0));
      e[i] = sgn;
      mp.add_artificial(R, penalty, std::move(e));
    }
  return mp;
}

template <class T>
MasterProblem<T> initialize_rmp(std::size_t R, std::size_t m0, std::vector<T> b0) {
  const T p = default_penalty(b0);
  return initialize_rmp(R, m0, std::move(b0), p);
}

template <class T>
T reduced_cost(const MasterColumn<T>& col, const std::vector<T>& pi, T sigma) {
  T v = col.cost;
  for (std::size_t i = 0; i < pi.size(); ++i) v -= pi[i] * col.link[i];
  if (col.convexity) v -= sigma;
  return v;
}

template <class T>
struct PricingResult {
  enum class Kind { Point, Ray, Infeasible } kind = Kind::Point;
  T value = T(0);  ///< (c - pi'A) w - sigma for points, (c - pi'A) d for rays
  T cost = T(0);   ///< c_r'w (or c_r'd)
  std::vector<T> link;
  std::vector<T> point;
};

/// Subproblem of one block: min over its domain of (c_r - pi'A_r) x - sigma.
template <class T>
class PricingOracle {
 public:
  virtual ~PricingOracle() = default;
  virtual PricingResult<T> solve(const std::vector<T>& pi, T sigma) = 0;
};

/// Oracle over an explicit list of extreme points and rays.
template <class T>
class EnumeratedOracle final : public PricingOracle<T> {
 public:
  struct Item {
    T cost;
    std::vector<T> link;
  };
  EnumeratedOracle(std::vector<Item> points, std::vector<Item> rays = {}, bool infeasible = false)
      : points_(std::move(points)), rays_(std::move(rays)), infeasible_(infeasible) {}

  PricingResult<T> solve(const std::vector<T>& pi, T sigma) override {
    PricingResult<T> out;
    if (infeasible_ || points_.empty()) {
      out.kind = PricingResult<T>::Kind::Infeasible;
      return out;
    }
    auto value = [&](const Item& it) {
      T v = it.cost;
      for (std::size_t i = 0; i < pi.size(); ++i) v -= pi[i] * it.link[i];
      return v;
    };
    for (std::size_t k = 0; k < rays_.size(); ++k)
      if (value(rays_[k]) < T(0)) {
        out.kind = PricingResult<T>::Kind::Ray;
        out.value = value(rays_[k]);
        out.cost = rays_[k].cost;
        out.link = rays_[k].link;
        out.point = {T(k)};
        return out;
      }
    std::size_t best = 0;
    for (std::size_t k = 1; k < points_.size(); ++k)
      if (value(points_[k]) < value(points_[best])) best = k;
    out.value = value(points_[best]) - sigma;
    out.cost = points_[best].cost;
    out.link = points_[best].link;
    out.point = {T(best)};
    return out;
  }

 private:
  std::vector<Item> points_, rays_;
  bool infeasible_;
};

template <class T>
struct PricedColumn {
  std::size_t block;
  PricingResult<T> result;
};

struct PricingOutcome {
  bool infeasible = false;
  std::size_t infeasible_block = 0;
};

/// Visits blocks in a permutation drawn from rng and stops after
/// max_new_columns columns with reduced cost below -eps.
template <class T>
std::vector<PricedColumn<T>> price(const std::vector<T>& pi, const std::vector<T>& sigma,
                                   std::vector<std::unique_ptr<PricingOracle<T>>>& oracles,
                                   std::size_t max_new_columns, T eps, std::mt19937_64& rng,
                                   PricingOutcome* outcome = nullptr) {
  using std::abs;
  if (oracles.size() != sigma.size()) throw PreconditionError("price: one oracle per block required");
  if (max_new_columns == 0) throw PreconditionError("price: max_new_columns must be positive");
  std::vector<std::size_t> perm(oracles.size());
  std::iota(perm.begin(), perm.end(), std::size_t(0));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<PricedColumn<T>> out;
  for (std::size_t r : perm) {
    PricingResult<T> res = oracles[r]->solve(pi, sigma[r]);
    if (res.kind == PricingResult<T>::Kind::Infeasible) {
      if (outcome) *outcome = {true, r};
      out.clear();
      return out;
    }
    if (res.link.size() != pi.size()) throw PreconditionError("price: oracle column has wrong length");
    T check = res.cost;
    for (std::size_t i = 0; i < pi.size(); ++i) check -= pi[i] * res.link[i];
    if (res.kind == PricingResult<T>::Kind::Point) check -= sigma[r];
    if (abs(check - res.value) > T(1e-9) * (T(1) + abs(res.value)))
      throw PreconditionError("price: oracle value does not match its column");
    if (res.value < -eps) {
      out.push_back({r, std::move(res)});
      if (out.size() >= max_new_columns) break;
    }
  }
  return out;
}

enum class ColgenStatus { Optimal, Infeasible, MasterInfeasible, IterationLimit, NumericalFailure };

inline const char* colgen_status_name(ColgenStatus s) {
  switch (s) {
    case ColgenStatus::Optimal: return "Optimal";
    case ColgenStatus::Infeasible: return "PrimalInfeasible";
    case ColgenStatus::MasterInfeasible: return "MasterInfeasible";
    case ColgenStatus::IterationLimit: return "IterationLimit";
    case ColgenStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

struct ColgenIteration {
  int iteration = 0;
  double objective = 0;
  double master_time = 0;
  double pricing_time = 0;
  std::size_t columns_added = 0;
  int ipm_iterations = 0;
};

struct ColgenOptions {
  std::size_t max_new_columns = 0;  ///< 0 selects max(1, R/10)
  int max_iterations = 1000;
  std::uint64_t seed = 1;
  KKTBackend backend = KKTBackend::BlockAngular;
};

template <class T>
struct ColgenResult {
  ColgenStatus status = ColgenStatus::IterationLimit;
  T objective = T(0);
  std::vector<T> lambda;  ///< one value per master column
  std::vector<T> pi, sigma;
  std::vector<ColgenIteration> log;
};

namespace detail {
inline void write_colgen_row(std::ostream& os, const ColgenIteration& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%.12g,%.6f,%.6f,%zu,%d\n", r.iteration, r.objective, r.master_time,
                r.pricing_time, r.columns_added, r.ipm_iterations);
  os << buf;
}
}  // namespace detail

/// Solve the RMP, price at its optimal duals, append columns, repeat.
template <class T>
ColgenResult<T> run_colgen(MasterProblem<T>& mp, std::vector<std::unique_ptr<PricingOracle<T>>>& oracles,
                           const Parameters<T>& params, const ColgenOptions& opt = {}, std::ostream* log = nullptr) {
  using clock = std::chrono::steady_clock;
  using std::abs;
  const std::size_t R = mp.blocks();
  if (oracles.size() != R) throw PreconditionError("run_colgen: one oracle per block required");
  const std::size_t budget = opt.max_new_columns ? opt.max_new_columns : std::max<std::size_t>(1, R / 10);
  std::mt19937_64 rng(opt.seed);
  ColgenResult<T> res;
  if (log) *log << "iter,objective,master_time,pricing_time,columns_added,ipm_iterations\n";

  for (int iter = 1;; ++iter) {
    if (iter > opt.max_iterations) {
      res.status = ColgenStatus::IterationLimit;
      break;
    }
    ColgenIteration row;
    row.iteration = iter;

    const auto t0 = clock::now();
    auto built = mp.build();
    StandardLP<T> lp;
    lp.A = built.matrix;
    lp.b = built.rhs;
    lp.c = built.cost;
    std::shared_ptr<const AbstractMatrix<T>> A = built.matrix;
    if (opt.backend != KKTBackend::BlockAngular)
      A = std::make_shared<SparseMatrix<T>>(built.matrix->to_sparse());
    lp.A = A;
    KKTOptions ko;
    ko.backend = opt.backend;
    auto kkt = make_kkt_solver<T>(A, ko);
    const Solution<T> sol = solve(lp, params, *kkt);
    row.master_time = std::chrono::duration<double>(clock::now() - t0).count();
    row.ipm_iterations = sol.iterations;
    if (sol.status != Status::Optimal) {
      // Artificials make every RMP feasible and bounded.
      res.status = ColgenStatus::NumericalFailure;
      res.log.push_back(row);
      if (log) detail::write_colgen_row(*log, row);
      break;
    }
    res.objective = sol.objective;
    row.objective = to_double(sol.objective);
    res.lambda.assign(mp.size(), T(0));
    for (std::size_t k = 0; k < built.order.size(); ++k) res.lambda[built.order[k]] = sol.x[k];
    res.sigma.assign(sol.y.begin(), sol.y.begin() + std::ptrdiff_t(R));
    res.pi.assign(sol.y.begin() + std::ptrdiff_t(R), sol.y.end());

    const auto t1 = clock::now();
    const T eps = T(1e-6) * (T(1) + mp.cost_scale());
    PricingOutcome outcome;
    auto cols = price(res.pi, res.sigma, oracles, budget, eps, rng, &outcome);
    row.pricing_time = std::chrono::duration<double>(clock::now() - t1).count();
    if (outcome.infeasible) {
      res.status = ColgenStatus::Infeasible;
      res.log.push_back(row);
      if (log) detail::write_colgen_row(*log, row);
      break;
    }
    for (auto& pc : cols) {
      if (pc.result.kind == PricingResult<T>::Kind::Ray)
        mp.add_ray(pc.block, pc.result.cost, std::move(pc.result.link), std::move(pc.result.point));
      else
        mp.add_point(pc.block, pc.result.cost, std::move(pc.result.link), std::move(pc.result.point));
    }
    row.columns_added = cols.size();
    res.log.push_back(row);
    if (log) detail::write_colgen_row(*log, row);
    if (cols.empty()) {
      res.status = ColgenStatus::Optimal;
      break;
    }
  }

  if (res.status == ColgenStatus::Optimal) {
    T scale = T(1);
    for (const auto& v : mp.b0()) scale = std::max<T>(scale, abs(v));
    const T tol = T(1e-6) * scale;
    for (std::size_t k = 0; k < mp.size(); ++k)
      if (mp.columns()[k].kind == ColumnKind::Artificial && res.lambda[k] > tol) {
        res.status = ColgenStatus::MasterInfeasible;
        break;
      }
  }
  return res;
}


/// Random master in the block-angular text format's data model: `columns`
/// points per block with dense-ish linking coefficients, plus a slack/surplus
/// pair per linking row in A_0 so every instance is feasible and bounded.
template <class T>
BlockAngularInstance<T> generate_synthetic_master(std::size_t R, std::size_t m0, double density, std::uint64_t seed,
                                                  std::size_t columns = 4) {
  if (!(density > 0.0 && density <= 1.0)) throw PreconditionError("synthetic master: density must lie in (0, 1]");
  if (R == 0 || columns == 0) throw PreconditionError("synthetic master: need at least one block and column");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), cost(1.0, 10.0);
  std::bernoulli_distribution keep(density);
  BlockAngularInstance<T> inst;
  inst.matrix = std::make_shared<UnitBlockAngularMatrix<T>>(R, m0);
  std::vector<T> b(m0, T(0));
  std::vector<T> a(m0);
  for (std::size_t r = 0; r < R; ++r) {
    const std::size_t chosen = std::uniform_int_distribution<std::size_t>(0, columns - 1)(rng);
    for (std::size_t k = 0; k < columns; ++k) {
      for (std::size_t i = 0; i < m0; ++i) a[i] = keep(rng) ? T(coef(rng)) : T(0);
      inst.matrix->add_column(r, a);
      inst.cost.push_back(T(cost(rng)));
      if (k == chosen)
        for (std::size_t i = 0; i < m0; ++i) b[i] += a[i];
    }
  }
  for (std::size_t i = 0; i < m0; ++i)
    for (T sgn : {T(1), T(-1)}) {
      std::fill(a.begin(), a.end(), T(0));
      a[i] = sgn;
      inst.matrix->add_column(R, a);
      inst.cost.push_back(T(1));
    }
  inst.rhs = b;
  return inst;
}

}  // namespace homlp
