#include <doctest.h>

#include <random>

#include "homlp/factory.hpp"
#include "homlp/newton.hpp"
#include "oracle.hpp"

using namespace homlp;
using oracle::Mat;
using oracle::Vec;

namespace {

std::shared_ptr<const SparseMatrix<double>> sparse(const std::vector<std::vector<double>>& rows, std::size_t n) {
  std::vector<Triplet<double>> t;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rows[i][j] != 0.0) t.push_back({i, j, rows[i][j]});
  return std::make_shared<SparseMatrix<double>>(SparseMatrix<double>::from_triplets(rows.size(), n, t));
}

std::shared_ptr<const SparseMatrix<double>> random_sparse(std::mt19937_64& rng, std::size_t m, std::size_t n,
                                                          double density) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), B(0.0, 1.0);
  std::vector<Triplet<double>> t;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (B(rng) < density) t.push_back({i, j, U(rng)});
  return std::make_shared<SparseMatrix<double>>(SparseMatrix<double>::from_triplets(m, n, t));
}

// Dense augmented matrix [[-(inv(theta) + rho_p), A'], [A, rho_d]].
Mat augmented(const Mat& A, const std::vector<double>& theta, double rp, double rd) {
  const Eigen::Index m = A.rows(), n = A.cols();
  Mat K = Mat::Zero(n + m, n + m);
  for (Eigen::Index j = 0; j < n; ++j) K(j, j) = -(1.0 / theta[std::size_t(j)] + rp);
  K.topRightCorner(n, m) = A.transpose();
  K.bottomLeftCorner(m, n) = A;
  K.bottomRightCorner(m, m) = rd * Mat::Identity(m, m);
  return K;
}

Vec solve_with(KKTSolver<double>& kkt, const std::vector<double>& xd, const std::vector<double>& xp) {
  std::vector<double> dx(xd.size()), dy(xp.size());
  kkt.solve(xd, xp, dx, dy);
  Vec out(Eigen::Index(dx.size() + dy.size()));
  out << oracle::vec(dx), oracle::vec(dy);
  return out;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t k, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> v(k);
  for (auto& e : v) e = U(rng);
  return v;
}

KKTOptions with(KKTBackend b) {
  KKTOptions o;
  o.backend = b;
  return o;
}

}  // namespace

TEST_SUITE("kkt") {
  TEST_CASE("setup of the sparse backend") {
    auto kkt = make_kkt_solver<double>(sparse({{1, 2, 0}, {0, 1, 1}}, 3), with(KKTBackend::Ldl));
    CHECK(kkt->name().find("LDL") != std::string::npos);
    CHECK(kkt->updates() == 0);
  }

  TEST_CASE("setup of the dense backend on a 2x2 matrix") {
    auto kkt = make_kkt_solver<double>(sparse({{1, 2}, {3, 4}}, 2), with(KKTBackend::Dense));
    CHECK(kkt->factor_nonzeros() == 1);
  }

  TEST_CASE("dense and ldl backends reject a block-angular matrix") {
    auto M = std::make_shared<UnitBlockAngularMatrix<double>>(1, 1);
    M->add_column(0, std::vector<double>{1.0});
    CHECK_THROWS_AS(make_kkt_solver<double>(M, with(KKTBackend::Dense)), UnsupportedMatrixKind);
    CHECK_THROWS_AS(make_kkt_solver<double>(M, with(KKTBackend::Ldl)), UnsupportedMatrixKind);
    CHECK_THROWS_AS(make_kkt_solver<double>(sparse({{1}}, 1), with(KKTBackend::BlockAngular)),
                    UnsupportedMatrixKind);
  }

  TEST_CASE("solve before update is an error") {
    auto kkt = make_kkt_solver<double>(sparse({{1}}, 1), with(KKTBackend::Ldl));
    std::vector<double> a{1}, b{1}, x(1), y(1);
    CHECK_THROWS_AS(kkt->solve(a, b, x, y), PreconditionError);
  }

  TEST_CASE("theta = e, rho = 1 factorizes [[-2I, A'], [A, I]]") {
    const auto A = sparse({{1, 2, 0}, {0, 1, -1}}, 3);
    for (auto b : {KKTBackend::Ldl, KKTBackend::Dense}) {
      auto kkt = make_kkt_solver<double>(A, with(b));
      const std::vector<double> theta(3, 1.0);
      kkt->update(theta, 1.0, 1.0);
      for (double d : kkt->diagonal()) CHECK(d == 2.0);
      const Mat K = augmented(oracle::dense(*A), theta, 1.0, 1.0);
      const std::vector<double> xd{1, -2, 0.5}, xp{3, 1};
      Vec rhs(5);
      rhs << 1, -2, 0.5, 3, 1;
      CHECK((K * solve_with(*kkt, xd, xp) - rhs).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }

  TEST_CASE("rank-deficient A still factorizes") {
    const auto A = sparse({{1, 1, 0}, {2, 2, 0}, {0, 0, 0}}, 3);
    for (auto b : {KKTBackend::Ldl, KKTBackend::Dense}) {
      auto kkt = make_kkt_solver<double>(A, with(b));
      const std::vector<double> theta(3, 1.0);
      CHECK_NOTHROW(kkt->update(theta, 1e-8, 1e-8));
      const Mat K = augmented(oracle::dense(*A), theta, 1e-8, 1e-8);
      const std::vector<double> xd{1, 0, 1}, xp{1, 2, 3};
      Vec rhs(6);
      rhs << 1, 0, 1, 1, 2, 3;
      const Vec d = solve_with(*kkt, xd, xp);
      CHECK((K * d - rhs).lpNorm<Eigen::Infinity>() / (1 + rhs.lpNorm<Eigen::Infinity>()) < 1e-8);
    }
  }

  TEST_CASE("theta containing zero is a precondition violation") {
    auto kkt = make_kkt_solver<double>(sparse({{1, 1}}, 2), with(KKTBackend::Ldl));
    const std::vector<double> theta{1.0, 0.0};
    CHECK_THROWS_AS(kkt->update(theta, 1.0, 1.0), PreconditionError);
    const std::vector<double> short_theta{1.0};
    CHECK_THROWS_AS(kkt->update(short_theta, 1.0, 1.0), PreconditionError);
    const std::vector<double> ok{1.0, 1.0};
    CHECK_THROWS_AS(kkt->update(ok, -1.0, 1.0), PreconditionError);
  }

  TEST_CASE("zero right-hand side gives zero") {
    std::mt19937_64 rng(1);
    auto kkt = make_kkt_solver<double>(random_sparse(rng, 4, 6, 0.5), with(KKTBackend::Ldl));
    kkt->update(random_vector(rng, 6, 0.5, 2.0), 1e-6, 1e-6);
    const Vec d = solve_with(*kkt, std::vector<double>(6, 0.0), std::vector<double>(4, 0.0));
    CHECK(d.lpNorm<Eigen::Infinity>() == 0.0);
  }

  TEST_CASE("A = [1], theta = 1, rho = 1, xi = (1, 1) gives (0, 1)") {
    for (auto b : {KKTBackend::Ldl, KKTBackend::Dense}) {
      auto kkt = make_kkt_solver<double>(sparse({{1}}, 1), with(b));
      kkt->update(std::vector<double>{1.0}, 1.0, 1.0);
      const Vec d = solve_with(*kkt, {1.0}, {1.0});
      CHECK(d(0) == doctest::Approx(0.0).epsilon(1e-15));
      CHECK(d(1) == doctest::Approx(1.0).epsilon(1e-15));
      // -2*0 + 1*1 = 1 and 0 + 1 = 1
      CHECK(-2 * d(0) + d(1) == doctest::Approx(1.0));
      CHECK(d(0) + d(1) == doctest::Approx(1.0));
    }
  }

  TEST_CASE("random 5x8 systems match the dense oracle") {
    std::mt19937_64 rng(58);
    for (int trial = 0; trial < 20; ++trial) {
      const auto A = random_sparse(rng, 5, 8, 0.5);
      const auto theta = random_vector(rng, 8, 1e-3, 1e3);
      const auto xd = random_vector(rng, 8, -1, 1), xp = random_vector(rng, 5, -1, 1);
      const Mat K = augmented(oracle::dense(*A), theta, 1e-6, 1e-6);
      Vec rhs(13);
      rhs << oracle::vec(xd), oracle::vec(xp);
      const Vec ref = K.fullPivLu().solve(rhs);
      for (auto b : {KKTBackend::Ldl, KKTBackend::Dense}) {
        auto kkt = make_kkt_solver<double>(A, with(b));
        kkt->update(theta, 1e-6, 1e-6);
        const Vec d = solve_with(*kkt, xd, xp);
        CHECK((K * d - rhs).lpNorm<Eigen::Infinity>() <= 1e-8 * (1 + rhs.lpNorm<Eigen::Infinity>()));
        CHECK((d - ref).lpNorm<Eigen::Infinity>() <= 1e-8 * (1 + ref.lpNorm<Eigen::Infinity>()));
      }
    }
  }

  TEST_CASE("backends agree on random 10x20 systems") {
    std::mt19937_64 rng(1020);
    for (int trial = 0; trial < 10; ++trial) {
      const auto A = random_sparse(rng, 10, 20, 0.3);
      const auto theta = random_vector(rng, 20, 0.1, 10);
      const auto xd = random_vector(rng, 20, -1, 1), xp = random_vector(rng, 10, -1, 1);
      auto ldl = make_kkt_solver<double>(A, with(KKTBackend::Ldl));
      auto dense = make_kkt_solver<double>(A, with(KKTBackend::Dense));
      ldl->update(theta, 1e-8, 1e-8);
      dense->update(theta, 1e-8, 1e-8);
      CHECK((solve_with(*ldl, xd, xp) - solve_with(*dense, xd, xp)).lpNorm<Eigen::Infinity>() < 1e-8);
    }
  }

  TEST_CASE("a dense column does not densify the augmented factor") {
    const std::size_t m = 300, n = 301;
    std::vector<Triplet<double>> t;
    for (std::size_t i = 0; i < m; ++i) {
      t.push_back({i, 0, 1.0});  // dense column
      t.push_back({i, i + 1, 2.0});
    }
    auto A = std::make_shared<SparseMatrix<double>>(SparseMatrix<double>::from_triplets(m, n, t));
    auto kkt = make_kkt_solver<double>(A, with(KKTBackend::Ldl));
    kkt->update(std::vector<double>(n, 1.0), 1e-6, 1e-6);
    const std::size_t structure = A->nonzeros() + n + m;
    CHECK(kkt->factor_nonzeros() <= 2 * structure);
    // the normal-equations route fills m(m-1)/2 entries
    auto dense = make_kkt_solver<double>(A, with(KKTBackend::Dense));
    CHECK(kkt->factor_nonzeros() * 20 < dense->factor_nonzeros());
  }

  TEST_CASE("sparse backend in extended precision") {
    std::vector<Triplet<Quad>> t{{0, 0, Quad(2)}, {0, 1, Quad(1)}, {1, 1, Quad(3)}, {2, 2, Quad(1)}, {2, 0, Quad(-1)}};
    auto A = std::make_shared<SparseMatrix<Quad>>(SparseMatrix<Quad>::from_triplets(3, 3, t));
    KKTOptions o;
    auto kkt = make_kkt_solver<Quad>(A, o);
    const std::vector<Quad> theta{Quad(1), Quad(2), Quad(3)};
    kkt->update(theta, Quad(1e-10), Quad(1e-10));
    const std::vector<Quad> xd{Quad(1), Quad(-1), Quad(2)}, xp{Quad(0.5), Quad(1), Quad(-1)};
    std::vector<Quad> dx(3), dy(3), rd(3), rp(3);
    kkt->solve(xd, xp, dx, dy);
    CHECK(kkt->residual(xd, xp, dx, dy, rd, rp) < Quad(1e-28));
  }

  TEST_CASE("newton solve with zero right-hand side gives zero") {
    std::mt19937_64 rng(3);
    const auto lp = oracle::random_standard_lp(rng, 3, 6, 0.5, true);
    const auto it = oracle::random_iterate(rng, lp);
    auto kkt = make_kkt_solver<double>(lp.A, with(KKTBackend::Ldl));
    NewtonSystem<double> ns(lp, *kkt);
    ns.update(it, 1e-6, 1e-6, 1e-6);
    NewtonRhs<double> r;
    r.resize(6, 3, lp.num_upper());
    Direction<double> d;
    ns.solve(r, d);
    CHECK(oracle::stack(d).lpNorm<Eigen::Infinity>() == 0.0);
  }

  TEST_CASE("n=2, m=1, no bounds, all-ones iterate, rho=(1,1,1) matches the dense seven-block solve") {
    StandardLP<double> lp;
    lp.A = sparse({{1, 2}}, 2);
    lp.b = {3};
    lp.c = {1, -1};
    Iterate<double> it;
    it.x = {1, 1};
    it.s = {1, 1};
    it.y = {1};
    it.tau = it.kappa = 1;
    NewtonRhs<double> r;
    r.resize(2, 1, 0);
    r.xi_d = {0.5, -1};
    r.xi_p = {2};
    r.xi_g = 1;
    r.xi_xs = {1, 2};
    r.xi_tk = -1;
    for (auto b : {KKTBackend::Ldl, KKTBackend::Dense}) {
      auto kkt = make_kkt_solver<double>(lp.A, with(b));
      NewtonSystem<double> ns(lp, *kkt);
      ns.update(it, 1, 1, 1);
      Direction<double> d;
      ns.solve(r, d);
      const Mat K = oracle::newton_matrix(lp, it, 1, 1, 1);
      const Vec ref = K.fullPivLu().solve(oracle::stack(r));
      CHECK((oracle::stack(d) - ref).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }

  TEST_CASE("n=3 with one bounded variable matches the dense seven-block solve") {
    StandardLP<double> lp;
    lp.A = sparse({{1, 1, 1}}, 3);
    lp.b = {2};
    lp.c = {1, 2, -1};
    lp.upper_index = {2};
    lp.upper = {1.5};
    Iterate<double> it;
    it.x = {0.5, 1, 0.7};
    it.s = {1, 0.3, 2};
    it.w = {0.8};
    it.z = {1.2};
    it.y = {0.1};
    it.tau = 1.1;
    it.kappa = 0.9;
    std::mt19937_64 rng(7);
    const auto r = oracle::random_rhs(rng, lp);
    auto kkt = make_kkt_solver<double>(lp.A, with(KKTBackend::Ldl));
    NewtonSystem<double> ns(lp, *kkt);
    ns.update(it, 1e-4, 1e-4, 1e-4);
    Direction<double> d;
    ns.solve(r, d);
    const Mat K = oracle::newton_matrix(lp, it, 1e-4, 1e-4, 1e-4);
    const Vec rhs = oracle::stack(r);
    CHECK(oracle::newton_residual(K, oracle::stack(d), rhs) < 1e-10);
    const Vec ref = K.fullPivLu().solve(rhs);
    CHECK((oracle::stack(d) - ref).lpNorm<Eigen::Infinity>() < 1e-8 * (1 + ref.lpNorm<Eigen::Infinity>()));
  }

  TEST_CASE("random Newton systems satisfy the seven-block equations") {
    std::mt19937_64 rng(49);
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t m = 1 + rng() % 10, n = m + 1 + rng() % 30;
      const auto lp = oracle::random_standard_lp(rng, m, n, 0.3, true);
      const auto it = oracle::random_iterate(rng, lp);
      const auto r = oracle::random_rhs(rng, lp);
      auto kkt = make_kkt_solver<double>(lp.A, with(trial % 2 ? KKTBackend::Dense : KKTBackend::Ldl));
      NewtonSystem<double> ns(lp, *kkt);
      ns.update(it, 1e-6, 1e-6, 1e-6);
      Direction<double> d;
      ns.solve(r, d);
      CHECK(oracle::newton_residual(oracle::newton_matrix(lp, it, 1e-6, 1e-6, 1e-6), oracle::stack(d),
                                    oracle::stack(r)) <= 1e-8);
    }
  }

  TEST_CASE("the (p, q) solve happens once per update") {
    std::mt19937_64 rng(8);
    const auto lp = oracle::random_standard_lp(rng, 4, 9, 0.4, true);
    const auto it = oracle::random_iterate(rng, lp);
    auto kkt = make_kkt_solver<double>(lp.A, with(KKTBackend::Ldl));
    NewtonSystem<double> ns(lp, *kkt);
    Direction<double> d;
    for (int k = 1; k <= 3; ++k) {
      ns.update(it, 1e-6, 1e-6, 1e-6);
      for (int s = 0; s < 4; ++s) ns.solve(oracle::random_rhs(rng, lp), d);
      CHECK(ns.cache_solves() == k);
      CHECK(kkt->updates() == k);
      CHECK(kkt->solves() == 5 * k);
    }
  }
}
