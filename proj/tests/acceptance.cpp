// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dw_toys.hpp"
#include "homlp/block_angular.hpp"
#include "homlp/colgen.hpp"
#include "homlp/factory.hpp"
#include "homlp/ipm.hpp"
#include "homlp/mps.hpp"
#include "homlp/newton.hpp"
#include "homlp/pipeline.hpp"
#include "oracle.hpp"

using namespace homlp;
using oracle::Mat;
using oracle::Vec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

struct Verdict {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

GeneralLP<double> load(const std::string& name) {
  return parse_mps<double>(oracle::read_text(oracle::data_path(name)));
}

PipelineResult<double> run_pipeline(const GeneralLP<double>& lp, bool presolve, const Observer<double>& obs = {},
                                    const Parameters<double>& params = {}, KKTBackend backend = KKTBackend::Ldl) {
  PipelineOptions<double> opt;
  opt.presolve = presolve;
  opt.params = params;
  opt.kkt.backend = backend;
  return solve_lp(lp, opt, nullptr, obs);
}

std::vector<std::pair<std::string, double>> optimal_fixtures() {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [name, ref] : oracle::references())
    if (ref.status == "Optimal") out.emplace_back(name, ref.objective);
  return out;
}

StandardLP<double> master_lp(const BlockAngularInstance<double>& inst, bool structured) {
  StandardLP<double> lp;
  lp.b.assign(inst.matrix->blocks(), 1.0);
  lp.b.insert(lp.b.end(), inst.rhs.begin(), inst.rhs.end());
  lp.c = inst.cost;
  if (structured)
    lp.A = inst.matrix;
  else
    lp.A = std::make_shared<SparseMatrix<double>>(inst.matrix->to_sparse());
  return lp;
}

Solution<double> solve_with(const StandardLP<double>& lp, KKTBackend backend, const Parameters<double>& p = {},
                            const Observer<double>& obs = {}) {
  KKTOptions o;
  o.backend = backend;
  auto kkt = make_kkt_solver<double>(lp.A, o);
  return solve(lp, p, *kkt, nullptr, obs);
}

// 1. Regression set against independent reference objectives.
Verdict regression() {
  Verdict v;
  const auto t0 = Clock::now();
  double worst = 0;
  int count = 0;
  for (const auto& [name, ref] : optimal_fixtures()) {
    const auto res = run_pipeline(load(name), true);
    ++count;
    if (res.solution.status != Status::Optimal) {
      v.fail(name + " returned " + status_name(res.solution.status));
      continue;
    }
    const double e = rel(res.solution.objective, ref);
    worst = std::max(worst, e);
    if (e > 1e-6) v.fail(name + " objective off by " + std::to_string(e));
  }
  const double t = seconds_since(t0);
  if (count < 12) v.fail("only " + std::to_string(count) + " fixtures");
  if (t >= 5) v.fail("took " + std::to_string(t) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d problems, worst relative error %.2e, %.2f s", count, worst, t);
  if (v.pass) v.detail = buf;
  return v;
}

// 2. Infeasibility and unboundedness certificates.
Verdict certificates() {
  Verdict v;
  const auto t0 = Clock::now();
  int count = 0;
  for (const auto& [name, ref] : oracle::references()) {
    if (ref.status == "Optimal") continue;
    const auto lp = load(name);
    for (bool presolve : {true, false}) {
      const auto res = run_pipeline(lp, presolve);
      const std::string tag = name + (presolve ? " (presolve)" : "");
      ++count;
      if (status_name(res.solution.status) != ref.status) {
        v.fail(tag + " returned " + status_name(res.solution.status));
        continue;
      }
      if (res.solution.status == Status::PrimalInfeasible) {
        const auto f = oracle::farkas(lp, res.solution.dual_ray);
        if (!(f.margin >= 1e-7) || f.leak > 1e-7) v.fail(tag + " Farkas check failed");
      } else {
        const auto r = oracle::improving_ray(lp, res.solution.primal_ray);
        if (r.violation > 1e-7 || !(r.slope < 0)) v.fail(tag + " ray check failed");
      }
    }
  }
  const double t = seconds_since(t0);
  if (count < 12) v.fail("only " + std::to_string(count / 2) + " certificate problems");
  if (t >= 1) v.fail("took " + std::to_string(t) + " s");
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d problems, presolve on and off, %.3f s", count / 2, t);
  if (v.pass) v.detail = buf;
  return v;
}

// 3. Newton directions against the dense seven-block system.
Verdict newton_oracle() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> logrho(-8, 0);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng() % 8, n = std::min<std::size_t>(20, m + 1 + rng() % 12);
    const auto lp = oracle::random_standard_lp(rng, m, n, 0.4, trial % 2 == 0);
    const auto it = oracle::random_iterate(rng, lp);
    const auto r = oracle::random_rhs(rng, lp);
    const double rp = std::pow(10.0, logrho(rng)), rd = std::pow(10.0, logrho(rng)), rg = std::pow(10.0, logrho(rng));
    KKTOptions o;
    o.backend = trial % 3 == 2 ? KKTBackend::Dense : KKTBackend::Ldl;
    auto kkt = make_kkt_solver<double>(lp.A, o);
    NewtonSystem<double> ns(lp, *kkt);
    ns.update(it, rp, rd, rg);
    Direction<double> d;
    ns.solve(r, d);
    const Mat K = oracle::newton_matrix(lp, it, rp, rd, rg);
    const Vec dv = oracle::stack(d), rhs = oracle::stack(r);
    const Vec res = K * dv - rhs;
    const Eigen::Index nu = Eigen::Index(lp.num_upper());
    const std::vector<Eigen::Index> sizes{Eigen::Index(n), Eigen::Index(m), nu, 1, Eigen::Index(n), nu, 1};
    Eigen::Index at = 0;
    for (Eigen::Index s : sizes) {
      if (s > 0) {
        const double num = res.segment(at, s).lpNorm<Eigen::Infinity>();
        const double den = rhs.segment(at, s).lpNorm<Eigen::Infinity>() +
                           K.middleRows(at, s).cwiseAbs().rowwise().sum().maxCoeff() * dv.lpNorm<Eigen::Infinity>();
        worst = std::max(worst, den > 0 ? num / den : num);
      }
      at += s;
    }
  }
  const double t = seconds_since(t0);
  if (worst > 1e-8) v.fail("blockwise residual " + std::to_string(worst));
  if (t >= 10) v.fail("took " + std::to_string(t) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "50 systems, worst blockwise relative residual %.2e, %.2f s", worst, t);
  if (v.pass) v.detail = buf;
  return v;
}

// 4. Structured factorization and IPM against the generic paths.
Verdict block_equivalence() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> P(0.05, 5.0), U(-1, 1);
  double worst_solve = 0, worst_obj = 0;
  int worst_iter = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t R = 1 + rng() % 64, m0 = 1 + rng() % 8;
    const double density = 0.2 + 0.8 * double(rng() % 100) / 100.0;
    const auto inst = generate_synthetic_master<double>(R, m0, density, 1000 + trial, 1 + rng() % 5);
    const auto& M = *inst.matrix;

    std::vector<double> theta(M.cols());
    for (auto& e : theta) e = P(rng);
    const double rho = 1e-6;
    BlockAngularFactor<double> F(M);
    F.factorize(theta, rho);
    std::vector<double> xi(M.rows());
    for (auto& e : xi) e = U(rng);
    const Vec rhs = oracle::vec(xi);
    const Vec ref = oracle::normal_matrix(M, theta, rho).ldlt().solve(rhs);
    F.solve_normal(xi);
    worst_solve = std::max(worst_solve, (oracle::vec(xi) - ref).lpNorm<Eigen::Infinity>() /
                                            std::max(1.0, ref.lpNorm<Eigen::Infinity>()));

    const auto a = solve_with(master_lp(inst, true), KKTBackend::BlockAngular);
    const auto b = solve_with(master_lp(inst, false), KKTBackend::Ldl);
    if (a.status != Status::Optimal || b.status != Status::Optimal) {
      v.fail("instance " + std::to_string(trial) + " not solved to optimality");
      continue;
    }
    worst_obj = std::max(worst_obj, rel(a.objective, b.objective));
    worst_iter = std::max(worst_iter, std::abs(a.iterations - b.iterations));
  }
  const double t = seconds_since(t0);
  if (worst_solve > 1e-9) v.fail("normal solve error " + std::to_string(worst_solve));
  if (worst_obj > 1e-7) v.fail("objective difference " + std::to_string(worst_obj));
  if (worst_iter > 3) v.fail("iteration difference " + std::to_string(worst_iter));
  if (t >= 30) v.fail("took " + std::to_string(t) + " s");
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "20 instances, solve error %.2e, objective difference %.2e, iteration difference %d, %.2f s",
                worst_solve, worst_obj, worst_iter, t);
  if (v.pass) v.detail = buf;
  return v;
}

// 5. Structured backend speed on a dense synthetic master.
Verdict structured_speed() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto inst = generate_synthetic_master<double>(2048, 24, 0.9, 7, 16);
  auto timed = [&](bool structured) {
    double best = 1e300;
    Solution<double> sol;
    for (int rep = 0; rep < 3; ++rep) {
      const auto lp = master_lp(inst, structured);
      const auto s = Clock::now();
      sol = solve_with(lp, structured ? KKTBackend::BlockAngular : KKTBackend::Ldl);
      best = std::min(best, seconds_since(s));
    }
    return std::make_pair(best, sol);
  };
  const auto [ts, ss] = timed(true);
  const auto [tg, sg] = timed(false);
  const double ratio = ts / tg, total = seconds_since(t0);
  if (ss.status != Status::Optimal || sg.status != Status::Optimal) v.fail("master not solved to optimality");
  if (ratio > 0.5) v.fail("time ratio " + std::to_string(ratio));
  if (total >= 300) v.fail("took " + std::to_string(total) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "structured %.3f s, sparse %.3f s, ratio %.2f", ts, tg, ratio);
  v.detail = v.pass ? buf : v.detail + " (" + buf + ")";
  return v;
}

// 6. Presolve: rule suite, objective equivalence, feasibility, no fill-in.
Verdict presolve_equivalence() {
  Verdict v;
#ifdef HOMLP_UNIT_TESTS
  const std::string cmd = std::string(HOMLP_UNIT_TESTS) + " --test-suite=presolve --minimal > /dev/null 2>&1";
  if (std::system(cmd.c_str()) != 0) v.fail("presolve rule suite failed");
#endif
  Parameters<double> tight;
  tight.eps_p = tight.eps_d = tight.eps_g = 1e-9;
  double worst_obj = 0, worst_viol = 0;
  for (const auto& [name, ref] : optimal_fixtures()) {
    const auto lp = load(name);
    const auto on = run_pipeline(lp, true, {}, tight);
    const auto off = run_pipeline(lp, false, {}, tight);
    if (on.solution.status != Status::Optimal || off.solution.status != Status::Optimal) {
      v.fail(name + " not optimal");
      continue;
    }
    worst_obj = std::max(worst_obj, rel(on.solution.objective, off.solution.objective));
    worst_viol = std::max(worst_viol, oracle::constraint_violation(lp, on.solution.x));
    if (on.reduced_nonzeros > on.nonzeros) v.fail(name + " gained nonzeros");
  }
  if (worst_obj > 1e-8) v.fail("objective difference " + std::to_string(worst_obj));
  if (worst_viol > 1e-7) v.fail("constraint violation " + std::to_string(worst_viol));
  char buf[160];
  std::snprintf(buf, sizeof buf, "objective difference %.2e, violation %.2e, no fill-in", worst_obj, worst_viol);
  if (v.pass) v.detail = buf;
  return v;
}

// 7. Column generation on toy decompositions.
Verdict column_generation() {
  Verdict v;
  const auto t0 = Clock::now();
  double worst = 0;
  const auto all = toys::load();
  for (const auto& t : all) {
    auto mp = toys::master(t);
    auto oracles = toys::oracles(t);
    const auto res = run_colgen(mp, oracles, Parameters<double>{});
    if (res.status != ColgenStatus::Optimal) {
      v.fail(t.name + " ended " + colgen_status_name(res.status));
      continue;
    }
    worst = std::max(worst, rel(res.objective, t.objective));
    for (std::size_t k = 1; k < res.log.size(); ++k)
      if (res.log[k].objective > res.log[k - 1].objective + 1e-7 * (1 + std::abs(res.log[k - 1].objective)))
        v.fail(t.name + " objective increased");
  }
  const double t = seconds_since(t0);
  if (all.size() < 5) v.fail("fewer than 5 instances");
  if (worst > 1e-6) v.fail("objective difference " + std::to_string(worst));
  if (t >= 20) v.fail("took " + std::to_string(t) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu instances, worst relative difference %.2e, %.2f s", all.size(), worst, t);
  if (v.pass) v.detail = buf;
  return v;
}

// Hilbert-matrix equality constraints with x = e feasible.
template <class T>
StandardLP<T> hilbert_lp(int m, int n) {
  std::vector<Triplet<T>> t;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) t.push_back({std::size_t(i), std::size_t(j), T(1) / T(i + j + 1)});
  StandardLP<T> lp;
  lp.A = std::make_shared<SparseMatrix<T>>(SparseMatrix<T>::from_triplets(std::size_t(m), std::size_t(n), t));
  lp.b.assign(std::size_t(m), T(0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) lp.b[std::size_t(i)] += T(1) / T(i + j + 1);
  lp.c.resize(std::size_t(n));
  for (int j = 0; j < n; ++j) lp.c[std::size_t(j)] = T(1 + j % 3);
  return lp;
}

// 8. Extended precision.
Verdict extended_precision() {
  Verdict v;
  const auto t0 = Clock::now();
  Parameters<Quad> q16;
  q16.eps_p = q16.eps_d = q16.eps_g = q16.eps_i = Quad(1e-16);
  Parameters<double> d16;
  d16.eps_p = d16.eps_d = d16.eps_g = d16.eps_i = 1e-16;
  const auto refs = oracle::references();
  int double_reached = 0;
  for (const char* name : {"diet.mps", "transport.mps", "klee3.mps"}) {
    const auto text = oracle::read_text(oracle::data_path(name));
    PipelineOptions<Quad> oq;
    oq.presolve = false;
    oq.params = q16;
    const auto q = solve_lp(parse_mps<Quad>(text), oq);
    if (q.solution.status != Status::Optimal) v.fail(std::string(name) + " not solved to 1e-16 in extended precision");
    else if (rel(double(q.solution.objective), refs.at(name).objective) > 1e-12)
      v.fail(std::string(name) + " extended objective differs from the reference");
    PipelineOptions<double> od;
    od.presolve = false;
    od.params = d16;
    double_reached += solve_lp(parse_mps<double>(text), od).solution.status == Status::Optimal;
  }

  // Same tolerance in both arithmetics on an ill-conditioned instance.
  const auto ld = hilbert_lp<double>(8, 8);
  const auto lq = hilbert_lp<Quad>(8, 8);
  const Parameters<double> pd;
  Parameters<Quad> pq;
  pq.eps_p = pq.eps_d = pq.eps_g = pq.eps_i = Quad(pd.eps_p);
  auto kd = make_kkt_solver<double>(ld.A, KKTOptions{});
  auto kq = make_kkt_solver<Quad>(lq.A, KKTOptions{});
  const auto sd = solve(ld, pd, *kd);
  const auto sq = solve(lq, pq, *kq);
  if (sq.status != Status::Optimal) v.fail("ill-conditioned instance not solved in extended precision");
  if (!(sq.iterations < sd.iterations)) v.fail("extended precision did not need fewer iterations");
  const double t = seconds_since(t0);
  if (t >= 120) v.fail("took " + std::to_string(t) + " s");
  char buf[224];
  std::snprintf(buf, sizeof buf,
                "3 problems at 1e-16 (double reached it on %d), Hilbert 8x8: extended %d iterations (%s), "
                "double %d (%s), %.2f s",
                double_reached, sq.iterations, status_name(sq.status), sd.iterations, status_name(sd.status), t);
  v.detail = v.pass ? buf : v.detail + " (" + buf + ")";
  return v;
}

// 9. Iteration invariants on the regression solves plus the constructed checks.
Verdict invariants() {
  Verdict v;
  long steps = 0;
  int upticks = 0;
  auto watch = [&](const std::string& name) {
    return Observer<double>([&, name](const IterationInfo<double>& info) {
      ++steps;
      const auto& it = info.iterate;
      bool positive = it.tau > 0 && it.kappa > 0;
      for (const auto* vec : {&it.x, &it.s, &it.w, &it.z})
        for (double e : *vec) positive = positive && e > 0;
      if (!positive) v.fail(name + ": positivity lost at iteration " + std::to_string(it.iteration));
      if (info.cache_solves != info.factorizations || info.factorizations < 1)
        v.fail(name + ": (p, q) solves do not match factorizations");
      if (it.mu > info.previous.mu) {
        if (it.mu > 1.1 * info.previous.mu)
          v.fail(name + ": mu rose by more than 10% at iteration " + std::to_string(it.iteration));
        else
          ++upticks;
      }
    });
  };
  for (const auto& [name, ref] : oracle::references()) {
    const auto lp = load(name);
    run_pipeline(lp, true, watch(name));
    run_pipeline(lp, false, watch(name));
  }

  // unregularized configuration: residuals contract by 1 - alpha eta
  Parameters<double> p0;
  p0.reg_initial = 0;
  p0.reg_floor = 0;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> P(0.1, 2.0), U(-1, 1);
  double worst_contraction = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto lp = oracle::random_standard_lp(rng, 4, 10, 0.4, trial % 2 == 1);
    std::vector<double> x0(10, 0.5);
    lp.A->mul(x0, lp.b, 1.0, 0.0);
    for (auto& c : lp.c) c = P(rng);
    const auto sol = solve_with(lp, KKTBackend::Dense, p0, [&](const IterationInfo<double>& info) {
      const double f = 1 - info.alpha * info.eta;
      auto check = [&](const std::vector<double>& now, const std::vector<double>& before) {
        const double scale = detail::norm_inf(before);
        for (std::size_t i = 0; i < now.size(); ++i)
          worst_contraction = std::max(worst_contraction, std::abs(now[i] - f * before[i]) / (scale + 1e-3));
      };
      check(info.iterate.rp, info.previous.rp);
      check(info.iterate.rd, info.previous.rd);
      check(info.iterate.ru, info.previous.ru);
      worst_contraction = std::max(worst_contraction, std::abs(info.iterate.rg - f * info.previous.rg) /
                                                          (std::abs(info.previous.rg) + 1e-3));
    });
    if (sol.status != Status::Optimal) v.fail("unregularized solve did not converge");
  }
  if (worst_contraction > 1e-10) v.fail("residual contraction error " + std::to_string(worst_contraction));

  // regularized self-dual identity at constructed points
  double worst_identity = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto lp = oracle::random_standard_lp(rng, 3, 7, 0.5, false);
    auto it = oracle::random_iterate(rng, lp);
    const double rp = P(rng), rd = P(rng), rg = P(rng), taubar = P(rng);
    std::vector<double> xbar(7), ybar(3);
    for (auto& e : xbar) e = U(rng);
    for (auto& e : ybar) e = U(rng);
    lp.A->mul(it.x, lp.b, 1.0 / it.tau, 0.0);
    for (std::size_t i = 0; i < 3; ++i) lp.b[i] += rd * (it.y[i] - ybar[i]) / it.tau;
    lp.A->mul_transpose(it.y, it.s, -1.0, 0.0);
    for (std::size_t j = 0; j < 7; ++j) it.s[j] += lp.c[j] * it.tau + rp * (it.x[j] - xbar[j]);
    it.kappa = detail::dot(lp.b, it.y) - detail::dot(lp.c, it.x) + rg * (it.tau - taubar);
    double lhs = rg * (it.tau - taubar) * it.tau;
    for (std::size_t j = 0; j < 7; ++j) lhs += rp * (it.x[j] - xbar[j]) * it.x[j];
    for (std::size_t i = 0; i < 3; ++i) lhs += rd * (it.y[i] - ybar[i]) * it.y[i];
    const double rhs = detail::dot(it.x, it.s) + it.tau * it.kappa;
    worst_identity = std::max(worst_identity, std::abs(lhs - rhs) / (1 + std::abs(rhs)));
  }
  if (worst_identity > 1e-12) v.fail("self-dual identity error " + std::to_string(worst_identity));

  char buf[192];
  std::snprintf(buf, sizeof buf,
                "%ld regression steps, %d small mu upticks flagged, unregularized contraction error %.1e on random LPs, "
                "identity error %.1e", steps,
                upticks, worst_contraction, worst_identity);
  if (v.pass) v.detail = buf;
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"regression objectives", regression},
      {"infeasibility certificates", certificates},
      {"Newton directions vs dense oracle", newton_oracle},
      {"block-angular equivalence", block_equivalence},
      {"structured speedup", structured_speed},
      {"presolve equivalence", presolve_equivalence},
      {"column generation", column_generation},
      {"extended precision", extended_precision},
      {"invariants", invariants},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::printf("criterion %zu %s: %s  %s\n", k + 1, criteria[k].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
