#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "homlp/errors.hpp"
#include "homlp/kkt.hpp"
#include "homlp/newton.hpp"
#include "homlp/problem.hpp"

namespace homlp {

template <class T>
struct Parameters {
  T eps_p = sqrt_epsilon<T>();
  T eps_d = sqrt_epsilon<T>();
  T eps_g = sqrt_epsilon<T>();
  T eps_i = sqrt_epsilon<T>();
  T gamma_min = T(0.1);
  T beta = T(0.1);
  int max_corrections = 5;
  int max_iterations = 100;
  double time_limit = std::numeric_limits<double>::infinity();  ///< seconds
  T step_damping = T(0.9995);
  T correction_factor = T(1.10);
  /// Regularization schedule. Setting both reg_initial and reg_floor to zero
  /// gives the unregularized configuration used by invariant tests.
  T reg_initial = T(1);
  T reg_floor = sqrt_epsilon<T>();
  T reg_divisor = T(10);
  T reg_rescue_factor = T(100);
  int reg_rescue_limit = 3;

  void check() const {
    if (!(eps_p >= T(0) && eps_d >= T(0) && eps_g >= T(0) && eps_i >= T(0)))
      throw PreconditionError("tolerances must be nonnegative");
    if (!(beta > T(0) && beta <= T(1))) throw PreconditionError("beta must lie in (0, 1]");
    if (!(gamma_min > T(0))) throw PreconditionError("gamma_min must be positive");
    if (max_iterations < 0) throw PreconditionError("max_iterations must be nonnegative");
  }
};

template <class T>
struct Regularizations {
  T rho_p = T(1), rho_d = T(1), rho_g = T(1);
  int rescues = 0;  ///< consecutive increases
};

template <class T>
Regularizations<T> initial_regularizations(const Parameters<T>& p) {
  return {p.reg_initial, p.reg_initial, p.reg_initial, 0};
}

/// Per-iteration decay rho <- max(floor, rho / divisor).
template <class T>
Regularizations<T> update_regularizations(Regularizations<T> r, const Parameters<T>& p) {
  auto f = [&](T v) {
    v /= p.reg_divisor;
    return v < p.reg_floor ? p.reg_floor : v;
  };
  r.rho_p = f(r.rho_p);
  r.rho_d = f(r.rho_d);
  r.rho_g = f(r.rho_g);
  return r;
}

/// Increase after a breakdown. Returns false once the consecutive-rescue
/// limit has been used up.
template <class T>
bool rescue_regularizations(Regularizations<T>& r, const Parameters<T>& p) {
  if (r.rescues >= p.reg_rescue_limit) return false;
  r.rho_p *= p.reg_rescue_factor;
  r.rho_d *= p.reg_rescue_factor;
  r.rho_g *= p.reg_rescue_factor;
  ++r.rescues;
  return true;
}

template <class T>
void compute_residuals(Iterate<T>& it, const StandardLP<T>& lp) {
  const std::size_t n = lp.num_cols(), m = lp.num_rows(), nu = lp.num_upper();
  it.rp.resize(m);
  it.rd.resize(n);
  it.ru.resize(nu);
  lp.A->mul(it.x, it.rp, T(-1), T(0));
  for (std::size_t i = 0; i < m; ++i) it.rp[i] += lp.b[i] * it.tau;
  lp.A->mul_transpose(it.y, it.rd, T(-1), T(0));
  for (std::size_t j = 0; j < n; ++j) it.rd[j] += lp.c[j] * it.tau - it.s[j];
  T uz = T(0);
  for (std::size_t k = 0; k < nu; ++k) {
    const std::size_t j = lp.upper_index[k];
    it.ru[k] = lp.upper[k] * it.tau - it.x[j] - it.w[k];
    it.rd[j] += it.z[k];
    uz += lp.upper[k] * it.z[k];
  }
  T cx = T(0), by = T(0);
  for (std::size_t j = 0; j < n; ++j) cx += lp.c[j] * it.x[j];
  for (std::size_t i = 0; i < m; ++i) by += lp.b[i] * it.y[i];
  it.rg = cx - by + uz + it.kappa;

  T comp = it.tau * it.kappa;
  for (std::size_t j = 0; j < n; ++j) comp += it.x[j] * it.s[j];
  for (std::size_t k = 0; k < nu; ++k) comp += it.w[k] * it.z[k];
  it.mu = comp / T(n + nu + 1);
}

template <class T>
Iterate<T> initialize(const StandardLP<T>& lp) {
  const std::size_t n = lp.num_cols(), m = lp.num_rows(), nu = lp.num_upper();
  Iterate<T> it;
  it.x.assign(n, T(1));
  it.s.assign(n, T(1));
  it.w.assign(nu, T(1));
  it.z.assign(nu, T(1));
  it.y.assign(m, T(0));
  it.tau = T(1);
  it.kappa = T(1);
  compute_residuals(it, lp);
  return it;
}

namespace detail {
template <class T>
T norm_inf(const std::vector<T>& v) {
  using std::abs;
  T r = T(0);
  for (const auto& e : v) r = abs(e) > r ? abs(e) : r;
  return r;
}
template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  T r = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
  return r;
}
}  // namespace detail

enum class Progress { Continue, Optimal, PrimalInfeasible, DualInfeasible, IterationLimit, TimeLimit };

/// Scaled quantities used by the stopping tests.
template <class T>
struct Measures {
  T primal = T(0);  ///< ||r_p|| / (tau (1 + ||b||))
  T upper = T(0);   ///< ||r_u|| / (tau (1 + ||u||))
  T dual = T(0);    ///< ||r_d|| / (tau (1 + ||c||))
  T gap = T(0);     ///< |c'x - (b'y - u'z)| / (tau + |b'y - u'z|)
  T primal_objective = T(0);  ///< c'x (unscaled by tau)
  T dual_objective = T(0);    ///< b'y - u'z
};

template <class T>
Measures<T> measures(const Iterate<T>& it, const StandardLP<T>& lp) {
  using std::abs;
  Measures<T> r;
  r.primal = detail::norm_inf(it.rp) / (it.tau * (T(1) + detail::norm_inf(lp.b)));
  r.upper = detail::norm_inf(it.ru) / (it.tau * (T(1) + detail::norm_inf(lp.upper)));
  r.dual = detail::norm_inf(it.rd) / (it.tau * (T(1) + detail::norm_inf(lp.c)));
  r.primal_objective = detail::dot(lp.c, it.x);
  r.dual_objective = detail::dot(lp.b, it.y) - detail::dot(lp.upper, it.z);
  r.gap = abs(r.primal_objective - r.dual_objective) / (it.tau + abs(r.dual_objective));
  return r;
}

template <class T>
Progress check_termination(const Iterate<T>& it, const StandardLP<T>& lp, const Parameters<T>& p,
                           double elapsed = 0.0) {
  const auto ms = measures(it, lp);
  if (ms.primal < p.eps_p && ms.upper < p.eps_d && ms.dual < p.eps_d && ms.gap < p.eps_g) return Progress::Optimal;
  if (it.mu < p.eps_i && it.tau / it.kappa < p.eps_i) {
    const bool unbounded = ms.primal_objective < -p.eps_i;
    const bool infeasible = -ms.dual_objective < -p.eps_i;
    if (unbounded && infeasible) {
      // Both objectives certify something; keep the ray whose homogeneous
      // equations hold more accurately (A x = 0, U x + w = 0 against A'y + s - U'z = 0).
      using std::abs;
      const T ray_p = std::max(detail::norm_inf(it.rp), detail::norm_inf(it.ru)) / abs(ms.primal_objective);
      const T ray_d = detail::norm_inf(it.rd) / abs(ms.dual_objective);
      return ray_d < ray_p ? Progress::PrimalInfeasible : Progress::DualInfeasible;
    }
    if (unbounded) return Progress::DualInfeasible;
    if (infeasible) return Progress::PrimalInfeasible;
  }
  if (it.iteration >= p.max_iterations) return Progress::IterationLimit;
  if (elapsed >= p.time_limit) return Progress::TimeLimit;
  return Progress::Continue;
}

/// Largest alpha in [0, 1] keeping (x, w, s, z, tau, kappa) + alpha d >= 0.
template <class T>
T max_step(const Iterate<T>& it, const Direction<T>& d) {
  T a = T(1);
  auto ratio = [&a](const T& v, const T& dv) {
    if (dv < T(0)) {
      const T r = -v / dv;
      if (r < a) a = r;
    }
  };
  for (std::size_t j = 0; j < it.x.size(); ++j) ratio(it.x[j], d.dx[j]);
  for (std::size_t j = 0; j < it.s.size(); ++j) ratio(it.s[j], d.ds[j]);
  for (std::size_t k = 0; k < it.w.size(); ++k) ratio(it.w[k], d.dw[k]);
  for (std::size_t k = 0; k < it.z.size(); ++k) ratio(it.z[k], d.dz[k]);
  ratio(it.tau, d.dtau);
  ratio(it.kappa, d.dkappa);
  return a;
}

/// gamma = (1 - a)^2 min(gamma_min, 1 - a), eta = 1 - gamma.
template <class T>
std::pair<T, T> mehrotra_gamma(T alpha_aff, T gamma_min) {
  const T one_minus = T(1) - alpha_aff;
  const T g = one_minus * one_minus * (gamma_min < one_minus ? gamma_min : one_minus);
  return {g, T(1) - g};
}

template <class T>
NewtonRhs<T> predictor_rhs(const Iterate<T>& it) {
  NewtonRhs<T> r;
  r.xi_d = it.rd;
  r.xi_p = it.rp;
  r.xi_u = it.ru;
  r.xi_g = it.rg;
  r.xi_xs.resize(it.x.size());
  for (std::size_t j = 0; j < it.x.size(); ++j) r.xi_xs[j] = -it.x[j] * it.s[j];
  r.xi_wz.resize(it.w.size());
  for (std::size_t k = 0; k < it.w.size(); ++k) r.xi_wz[k] = -it.w[k] * it.z[k];
  r.xi_tk = -it.tau * it.kappa;
  return r;
}

template <class T>
NewtonRhs<T> corrector_rhs(const Iterate<T>& it, const Direction<T>& aff, T gamma, T eta) {
  NewtonRhs<T> r;
  const T gm = gamma * it.mu;
  r.xi_d = it.rd;
  r.xi_p = it.rp;
  r.xi_u = it.ru;
  for (auto& v : r.xi_d) v *= eta;
  for (auto& v : r.xi_p) v *= eta;
  for (auto& v : r.xi_u) v *= eta;
  r.xi_g = eta * it.rg;
  r.xi_xs.resize(it.x.size());
  for (std::size_t j = 0; j < it.x.size(); ++j) r.xi_xs[j] = -it.x[j] * it.s[j] + gm - aff.dx[j] * aff.ds[j];
  r.xi_wz.resize(it.w.size());
  for (std::size_t k = 0; k < it.w.size(); ++k) r.xi_wz[k] = -it.w[k] * it.z[k] + gm - aff.dw[k] * aff.dz[k];
  r.xi_tk = -it.tau * it.kappa + gm - aff.dtau * aff.dkappa;
  return r;
}

template <class T>
Direction<T> predictor(const Iterate<T>& it, NewtonSystem<T>& ns) {
  Direction<T> d;
  ns.solve(predictor_rhs(it), d);
  return d;
}

template <class T>
Direction<T> corrector(const Iterate<T>& it, const Direction<T>& aff, T gamma, T eta, NewtonSystem<T>& ns) {
  Direction<T> d;
  ns.solve(corrector_rhs(it, aff, gamma, eta), d);
  return d;
}

/// Right-hand side of one centrality correction: zero residual blocks and the
/// mean-shifted targets in the complementarity rows.
template <class T>
NewtonRhs<T> centrality_rhs(const Iterate<T>& it, const Direction<T>& d, T alpha, T gamma, T beta) {
  const std::size_t n = it.x.size(), m = it.y.size(), nu = it.w.size();
  const T abar = T(2) * alpha < T(1) ? T(2) * alpha : T(1);
  const T mu_l = gamma * it.mu * beta;
  const T mu_u = gamma * it.mu / beta;
  auto target = [&](T prod) {
    if (prod < mu_l) return mu_l - prod;
    if (prod > mu_u) return mu_u - prod;
    return T(0);
  };
  NewtonRhs<T> r;
  r.resize(n, m, nu);
  T sum = T(0);
  for (std::size_t j = 0; j < n; ++j) {
    r.xi_xs[j] = target((it.x[j] + abar * d.dx[j]) * (it.s[j] + abar * d.ds[j]));
    sum += r.xi_xs[j];
  }
  for (std::size_t k = 0; k < nu; ++k) {
    r.xi_wz[k] = target((it.w[k] + abar * d.dw[k]) * (it.z[k] + abar * d.dz[k]));
    sum += r.xi_wz[k];
  }
  r.xi_tk = target((it.tau + abar * d.dtau) * (it.kappa + abar * d.dkappa));
  sum += r.xi_tk;
  const T shift = sum / T(n + nu + 1);
  for (auto& v : r.xi_xs) v -= shift;
  for (auto& v : r.xi_wz) v -= shift;
  r.xi_tk -= shift;
  return r;
}

template <class T>
struct Correction {
  Direction<T> direction;  ///< current direction plus the correction
  T alpha = T(0);          ///< its maximum step
  bool accepted = false;
};

template <class T>
Correction<T> centrality_correction(const Iterate<T>& it, const Direction<T>& d, T alpha, T gamma,
                                    const Parameters<T>& p, NewtonSystem<T>& ns) {
  Correction<T> out;
  Direction<T> dc;
  ns.solve(centrality_rhs(it, d, alpha, gamma, p.beta), dc);
  out.direction = d;
  auto add = [](std::vector<T>& a, const std::vector<T>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  };
  add(out.direction.dx, dc.dx);
  add(out.direction.dw, dc.dw);
  add(out.direction.dy, dc.dy);
  add(out.direction.ds, dc.ds);
  add(out.direction.dz, dc.dz);
  out.direction.dtau += dc.dtau;
  out.direction.dkappa += dc.dkappa;
  out.alpha = max_step(it, out.direction);
  out.accepted = out.alpha > alpha;
  return out;
}

/// Moves by alpha along d; residuals and mu are recomputed.
template <class T>
void take_step(Iterate<T>& it, const Direction<T>& d, T alpha, const StandardLP<T>& lp) {
  auto axpy = [alpha](std::vector<T>& a, const std::vector<T>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += alpha * b[i];
  };
  axpy(it.x, d.dx);
  axpy(it.w, d.dw);
  axpy(it.y, d.dy);
  axpy(it.s, d.ds);
  axpy(it.z, d.dz);
  it.tau += alpha * d.dtau;
  it.kappa += alpha * d.dkappa;
  compute_residuals(it, lp);
}

/// Data handed to an observer after every step.
template <class T>
struct IterationInfo {
  const Iterate<T>& iterate;  ///< after the step, residuals current
  const Iterate<T>& previous;
  const Direction<T>& direction;
  T alpha;  ///< step actually taken
  T eta;
  Regularizations<T> reg;  ///< values used for this step
  int factorizations;      ///< kkt updates during this iteration
  long cache_solves;       ///< (p, q) solves during this iteration
  int corrections;         ///< accepted centrality corrections
};

template <class T>
using Observer = std::function<void(const IterationInfo<T>&)>;

namespace detail {
template <class T>
bool all_finite(const Direction<T>& d) {
  auto ok = [](const std::vector<T>& v) {
    for (const auto& e : v)
      if (!is_finite(e)) return false;
    return true;
  };
  return ok(d.dx) && ok(d.dw) && ok(d.dy) && ok(d.ds) && ok(d.dz) && is_finite(d.dtau) && is_finite(d.dkappa);
}

inline std::string fmt_e(double v, int width = 10) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%*.2e", width, v);
  return buf;
}
}  // namespace detail

template <class T>
void write_log_header(std::ostream& os, const StandardLP<T>& lp, const std::string& backend) {
  os << "arithmetic " << ScalarTraits<T>::name << "  backend " << backend << "\n";
  os << "rows " << lp.num_rows() << "  cols " << lp.num_cols() << "  bounded " << lp.num_upper() << "  nonzeros "
     << lp.A->nonzeros() << "\n";
  os << " iter         mu      pres      dres       gap     alpha     rho_p     rho_d     rho_g    time\n";
}

/// Solves the standard-form LP with the homogeneous algorithm.
template <class T>
Solution<T> solve(const StandardLP<T>& lp, const Parameters<T>& params, KKTSolver<T>& kkt,
                  std::ostream* log = nullptr, const Observer<T>& observer = {}) {
  using clock = std::chrono::steady_clock;
  params.check();
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  Iterate<T> it = initialize(lp);
  NewtonSystem<T> ns(lp, kkt);
  Regularizations<T> reg = initial_regularizations(params);
  if (log) write_log_header(*log, lp, kkt.name());

  Solution<T> sol;
  Progress prog = Progress::Continue;
  T last_alpha = T(0);
  for (;;) {
    prog = check_termination(it, lp, params, elapsed());
    if (log) {
      const auto ms = measures(it, lp);
      const T dres = ms.dual > ms.upper ? ms.dual : ms.upper;
      *log << (it.iteration < 10 ? "    " : it.iteration < 100 ? "   " : "  ") << it.iteration
           << detail::fmt_e(to_double(it.mu), 11) << detail::fmt_e(to_double(ms.primal))
           << detail::fmt_e(to_double(dres)) << detail::fmt_e(to_double(ms.gap))
           << detail::fmt_e(to_double(last_alpha)) << detail::fmt_e(to_double(reg.rho_p))
           << detail::fmt_e(to_double(reg.rho_d)) << detail::fmt_e(to_double(reg.rho_g));
      char buf[32];
      std::snprintf(buf, sizeof buf, "%8.2f", elapsed());
      *log << buf << "\n";
    }
    if (prog != Progress::Continue) break;

    Direction<T> d;
    T alpha = T(0), eta = T(1);
    int factorizations = 0, corrections = 0;
    const long cache_before = ns.cache_solves();
    bool failed = false;
    for (;;) {
      try {
        ++factorizations;
        ns.update(it, reg.rho_p, reg.rho_d, reg.rho_g);
        const Direction<T> aff = predictor(it, ns);
        if (!detail::all_finite(aff)) throw NumericalBreakdown("non-finite predictor");
        const T alpha_aff = max_step(it, aff);
        const auto [gamma, eta_] = mehrotra_gamma(alpha_aff, params.gamma_min);
        eta = eta_;
        d = corrector(it, aff, gamma, eta, ns);
        if (!detail::all_finite(d)) throw NumericalBreakdown("non-finite corrector");
        alpha = max_step(it, d);
        for (int k = 0; k < params.max_corrections; ++k) {
          auto c = centrality_correction(it, d, alpha, gamma, params, ns);
          if (!c.accepted || !detail::all_finite(c.direction)) break;
          const T prev = alpha;
          d = std::move(c.direction);
          alpha = c.alpha;
          ++corrections;
          if (alpha < params.correction_factor * prev) break;
        }
        break;
      } catch (const NumericalBreakdown&) {
      } catch (const DegenerateTau&) {
      }
      if (!rescue_regularizations(reg, params)) {
        failed = true;
        break;
      }
    }
    if (failed) {
      sol.status = Status::NumericalFailure;
      break;
    }

    const Regularizations<T> used = reg;
    const T step = params.step_damping * alpha;
    std::optional<Iterate<T>> previous;
    if (observer) previous = it;
    take_step(it, d, step, lp);
    ++it.iteration;
    last_alpha = step;
    reg = update_regularizations(reg, params);
    reg.rescues = 0;
    if (observer) {
      observer(IterationInfo<T>{it, *previous, d, step, eta, used, factorizations, ns.cache_solves() - cache_before,
                                corrections});
    }
  }

  sol.iterations = it.iteration;
  sol.solve_time = elapsed();
  const T tau = it.tau;
  switch (prog) {
    case Progress::Optimal:
      sol.status = Status::Optimal;
      break;
    case Progress::PrimalInfeasible:
      sol.status = Status::PrimalInfeasible;
      break;
    case Progress::DualInfeasible:
      sol.status = Status::DualInfeasible;
      break;
    case Progress::IterationLimit:
      sol.status = Status::IterationLimit;
      break;
    case Progress::TimeLimit:
      sol.status = Status::TimeLimit;
      break;
    case Progress::Continue:
      break;  // NumericalFailure already recorded
  }

  auto scaled = [](std::vector<T> v, T f) {
    for (auto& e : v) e *= f;
    return v;
  };
  if (sol.status == Status::PrimalInfeasible) {
    T nrm = detail::norm_inf(it.y);
    if (!(nrm > T(0))) nrm = T(1);
    sol.dual_ray = scaled(it.y, T(1) / nrm);
    sol.s = scaled(it.s, T(1) / nrm);
    sol.z = scaled(it.z, T(1) / nrm);
  } else if (sol.status == Status::DualInfeasible) {
    T nrm = detail::norm_inf(it.x);
    if (!(nrm > T(0))) nrm = T(1);
    sol.primal_ray = scaled(it.x, T(1) / nrm);
  } else {
    // Best available point, meaningful as a solution when Optimal.
    const T inv = T(1) / tau;
    sol.x = scaled(it.x, inv);
    sol.w = scaled(it.w, inv);
    sol.y = scaled(it.y, inv);
    sol.s = scaled(it.s, inv);
    sol.z = scaled(it.z, inv);
    sol.objective = detail::dot(lp.c, sol.x) + lp.objective_constant;
    sol.dual_objective = detail::dot(lp.b, sol.y) - detail::dot(lp.upper, sol.z) + lp.objective_constant;
  }
  if (log) *log << "status " << status_name(sol.status) << "  iterations " << sol.iterations << "\n";
  return sol;
}

/// Both sides of the identity
///   rho_p (x - xb)'x + rho_d (y - yb)'y + rho_g (tau - taub) tau = x's + tau kappa
/// for a point satisfying the regularized embedding's equality constraints
/// (no bounds) with centers (xb, yb, taub).
template <class T>
std::pair<T, T> regularized_identity(const std::vector<T>& x, const std::vector<T>& y,
                                     const std::vector<T>& s, T tau, T kappa, const std::vector<T>& xb,
                                     const std::vector<T>& yb, T taub, T rho_p, T rho_d, T rho_g) {
  T lhs = rho_g * (tau - taub) * tau;
  for (std::size_t j = 0; j < x.size(); ++j) lhs += rho_p * (x[j] - xb[j]) * x[j];
  for (std::size_t i = 0; i < y.size(); ++i) lhs += rho_d * (y[i] - yb[i]) * y[i];
  T rhs = tau * kappa;
  for (std::size_t j = 0; j < x.size(); ++j) rhs += x[j] * s[j];
  return {lhs, rhs};
}

}  // namespace homlp
