#pragma once

#include <ostream>
#include <vector>

#include "homlp/factory.hpp"
#include "homlp/ipm.hpp"
#include "homlp/presolve.hpp"
#include "homlp/problem.hpp"

namespace homlp {

template <class T>
struct PipelineOptions {
  bool presolve = true;
  KKTOptions kkt;
  Parameters<T> params;
};

template <class T>
struct PipelineResult {
  Solution<T> solution;
  std::vector<T> row_activity;  ///< A x in the original space (empty without x)
  PresolveStatus presolve_status = PresolveStatus::InProgress;
  std::size_t rows = 0, cols = 0, nonzeros = 0;                    ///< original sizes
  std::size_t reduced_rows = 0, reduced_cols = 0, reduced_nonzeros = 0;
};

/// validate -> presolve -> scale -> standard form -> solve -> uncrush ->
/// unscale -> postsolve. Without presolve the problem is neither reduced nor
/// scaled.
template <class T>
PipelineResult<T> solve_lp(const GeneralLP<T>& lp, const PipelineOptions<T>& opt, std::ostream* log = nullptr,
                           const Observer<T>& observer = {}) {
  for (const auto& d : validate(lp)) {
    if (d.kind == Diagnostic::Kind::InvertedBound) throw InfeasibleBounds(d.message);
    throw PreconditionError(d.message);
  }
  PipelineResult<T> res;
  res.rows = res.reduced_rows = lp.num_rows();
  res.cols = res.reduced_cols = lp.num_cols();
  res.nonzeros = res.reduced_nonzeros = lp.A.nonzeros();

  auto run_ipm = [&](const GeneralLP<T>& p) {
    const StandardForm<T> sf = to_standard_form(p);
    auto kkt = make_kkt_solver<T>(sf.lp.A, opt.kkt);
    const Solution<T> sol = solve(sf.lp, opt.params, *kkt, log, observer);
    return uncrush(sol, sf.map);
  };

  if (opt.presolve) {
    PresolveState<T> state(lp);
    state.run();
    res.presolve_status = state.status();
    const bool terminal = state.status() != PresolveStatus::InProgress;
    if (terminal && state.status() != PresolveStatus::ReducedToEmpty && !state.certificate_valid()) {
      // The ray only holds for bounds tightened during presolve.
      if (log) *log << "presolve " << presolve_status_name(state.status()) << ", ray not valid for the original bounds\n";
      res.solution = run_ipm(lp);
    } else if (terminal) {
      if (log)
        *log << "arithmetic " << ScalarTraits<T>::name << "  backend none\n"
             << "presolve " << presolve_status_name(state.status()) << "\n";
      res.solution = state.terminal_solution();
      res.reduced_rows = res.reduced_cols = res.reduced_nonzeros = 0;
    } else {
      const GeneralLP<T> reduced = state.reduced();
      res.reduced_rows = reduced.num_rows();
      res.reduced_cols = reduced.num_cols();
      res.reduced_nonzeros = reduced.A.nonzeros();
      if (log)
        *log << "presolve rows " << res.rows << " -> " << res.reduced_rows << "  cols " << res.cols << " -> "
             << res.reduced_cols << "  nonzeros " << res.nonzeros << " -> " << res.reduced_nonzeros << "\n";
      const GeneralLP<T> scaled = state.scale(reduced);
      res.solution = state.postsolve(run_ipm(scaled));
    }
  } else {
    res.solution = run_ipm(lp);
  }

  if (res.solution.x.size() == lp.num_cols()) {
    res.row_activity.assign(lp.num_rows(), T(0));
    lp.A.mul(std::span<const T>(res.solution.x), std::span<T>(res.row_activity), T(1), T(0));
  }
  return res;
}

}  // namespace homlp
