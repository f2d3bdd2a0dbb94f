#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "homlp/errors.hpp"
#include "homlp/kkt.hpp"
#include "homlp/problem.hpp"

namespace homlp {

/// Primal-dual point of the homogeneous embedding with its residuals.
template <class T>
struct Iterate {
  std::vector<T> x, w, y, s, z;
  T tau = T(1);
  T kappa = T(1);
  std::vector<T> rp, ru, rd;
  T rg = T(0);
  T mu = T(0);
  int iteration = 0;
};

template <class T>
struct Direction {
  std::vector<T> dx, dw, dy, ds, dz;
  T dtau = T(0);
  T dkappa = T(0);

  void resize(std::size_t n, std::size_t m, std::size_t nu) {
    dx.assign(n, T(0));
    dw.assign(nu, T(0));
    dy.assign(m, T(0));
    ds.assign(n, T(0));
    dz.assign(nu, T(0));
    dtau = dkappa = T(0);
  }
};

/// Right-hand side of the seven-block Newton system
///
///   -rho_p dx + A'dy + ds - U'dz - c dtau          = xi_d
///    A dx + rho_d dy - b dtau                      = xi_p
///    U dx + dw - u dtau                            = xi_u
///   -c'dx + b'dy - u'dz + rho_g dtau - dkappa      = xi_g
///    S dx + X ds                                   = xi_xs
///    Z dw + W dz                                   = xi_wz
///    kappa dtau + tau dkappa                       = xi_tk
template <class T>
struct NewtonRhs {
  std::vector<T> xi_d, xi_p, xi_u;
  T xi_g = T(0);
  std::vector<T> xi_xs, xi_wz;
  T xi_tk = T(0);

  void resize(std::size_t n, std::size_t m, std::size_t nu) {
    xi_d.assign(n, T(0));
    xi_p.assign(m, T(0));
    xi_u.assign(nu, T(0));
    xi_xs.assign(n, T(0));
    xi_wz.assign(nu, T(0));
    xi_g = xi_tk = T(0);
  }
};

/// Reduces Newton solves to augmented-system solves with the bound block
/// folded into the diagonal. The solution (p, q) of K [p; q] = [c_hat; b] is
/// computed once per update() and reused by every solve().
template <class T>
class NewtonSystem {
 public:
  NewtonSystem(const StandardLP<T>& lp, KKTSolver<T>& kkt) : lp_(lp), kkt_(kkt) {
    const std::size_t n = lp.num_cols(), m = lp.num_rows(), nu = lp.num_upper();
    theta_.assign(n, T(0));
    chat_.assign(n, T(0));
    ghat_.assign(n, T(0));
    zw_.assign(nu, T(0));
    p_.assign(n, T(0));
    q_.assign(m, T(0));
    xd_.assign(n, T(0));
    up_.assign(n, T(0));
    vp_.assign(m, T(0));
    tmp_.assign(nu, T(0));
  }

  /// Refreshes Theta, the factorization and the cached (p, q).
  void update(const Iterate<T>& it, T rho_p, T rho_d, T rho_g) {
    const std::size_t n = lp_.num_cols(), nu = lp_.num_upper();
    x_ = &it.x;
    s_ = &it.s;
    w_ = &it.w;
    z_ = &it.z;
    tau_ = it.tau;
    kappa_ = it.kappa;
    rho_g_ = rho_g;

    std::vector<T>& inv = xd_;  // X^-1 S + U' W^-1 Z U
    for (std::size_t j = 0; j < n; ++j) inv[j] = it.s[j] / it.x[j];
    uzu_ = T(0);
    for (std::size_t j = 0; j < n; ++j) chat_[j] = ghat_[j] = lp_.c[j];
    for (std::size_t k = 0; k < nu; ++k) {
      const std::size_t j = lp_.upper_index[k];
      zw_[k] = it.z[k] / it.w[k];
      inv[j] += zw_[k];
      const T t = zw_[k] * lp_.upper[k];
      chat_[j] -= t;
      ghat_[j] += t;
      uzu_ += t * lp_.upper[k];
    }
    for (std::size_t j = 0; j < n; ++j) {
      theta_[j] = T(1) / inv[j];
      // x_j underflowed against s_j: no usable scaling left
      if (!(theta_[j] > T(0))) throw NumericalBreakdown("scaling matrix degenerated");
    }

    kkt_.update(theta_, rho_p, rho_d);
    kkt_.solve(chat_, lp_.b, p_, q_);
    ++cache_solves_;

    denom_ = rho_g_ + kappa_ / tau_ + uzu_;
    for (std::size_t j = 0; j < n; ++j) denom_ -= ghat_[j] * p_[j];
    for (std::size_t i = 0; i < lp_.num_rows(); ++i) denom_ += lp_.b[i] * q_[i];
    if (!(denom_ > T(0)) || !is_finite(denom_)) throw DegenerateTau("tau step denominator is not positive");
  }

  void solve(const NewtonRhs<T>& r, Direction<T>& d) {
    const std::size_t n = lp_.num_cols(), m = lp_.num_rows(), nu = lp_.num_upper();
    const auto& x = *x_;
    const auto& s = *s_;
    const auto& w = *w_;
    const auto& z = *z_;
    d.resize(n, m, nu);

    // tmp = W^-1 (xi_wz - Z xi_u)
    T xg = r.xi_g + r.xi_tk / tau_;
    for (std::size_t j = 0; j < n; ++j) xd_[j] = r.xi_d[j] - r.xi_xs[j] / x[j];
    for (std::size_t k = 0; k < nu; ++k) {
      tmp_[k] = (r.xi_wz[k] - z[k] * r.xi_u[k]) / w[k];
      xd_[lp_.upper_index[k]] += tmp_[k];
      xg += lp_.upper[k] * tmp_[k];
    }
    kkt_.solve(xd_, r.xi_p, up_, vp_);

    T num = xg;
    for (std::size_t j = 0; j < n; ++j) num += ghat_[j] * up_[j];
    for (std::size_t i = 0; i < m; ++i) num -= lp_.b[i] * vp_[i];
    const T dtau = num / denom_;

    d.dtau = dtau;
    for (std::size_t j = 0; j < n; ++j) d.dx[j] = up_[j] + dtau * p_[j];
    for (std::size_t i = 0; i < m; ++i) d.dy[i] = vp_[i] + dtau * q_[i];
    for (std::size_t k = 0; k < nu; ++k) {
      const std::size_t j = lp_.upper_index[k];
      d.dw[k] = r.xi_u[k] - d.dx[j] + lp_.upper[k] * dtau;
      d.dz[k] = (r.xi_wz[k] - z[k] * d.dw[k]) / w[k];
    }
    for (std::size_t j = 0; j < n; ++j) d.ds[j] = (r.xi_xs[j] - s[j] * d.dx[j]) / x[j];
    d.dkappa = (r.xi_tk - kappa_ * dtau) / tau_;
  }

  std::span<const T> theta() const { return theta_; }
  long cache_solves() const { return cache_solves_; }
  KKTSolver<T>& kkt() { return kkt_; }

 private:
  const StandardLP<T>& lp_;
  KKTSolver<T>& kkt_;
  const std::vector<T>* x_ = nullptr;
  const std::vector<T>* s_ = nullptr;
  const std::vector<T>* w_ = nullptr;
  const std::vector<T>* z_ = nullptr;
  T tau_ = T(1), kappa_ = T(1), rho_g_ = T(0);
  T uzu_ = T(0), denom_ = T(1);
  std::vector<T> theta_, chat_, ghat_, zw_, p_, q_;
  std::vector<T> xd_, up_, vp_, tmp_;
  long cache_solves_ = 0;
};

}  // namespace homlp
