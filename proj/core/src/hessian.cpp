#include "dcs/hessian.hpp"

#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>

namespace dcs {

namespace {

// First-order differentials of one local direction.
struct Direction {
  double dnu = 0.0;
  Matrix S;      // d Omega
  Vector m;      // d mu
  Vector r;      // m + S z
  Vector oir;    // Omega^{-1} r
  Matrix oiS;    // Omega^{-1} S
  double dq = 0.0;
  double dw = 0.0;
};

std::vector<Direction> local_directions(const Vector& v, const Matrix& omega_inv, double nu) {
  const auto n = v.size();
  const auto nv = vech_size(n);
  const Vector z = omega_inv * v;
  const double q = v.dot(z);
  const bool gaussian = std::isinf(nu);
  std::vector<Direction> dirs(static_cast<std::size_t>(1 + nv + n));
  for (auto& d : dirs) {
    d.S = Matrix::Zero(n, n);
    d.m = Vector::Zero(n);
  }
  dirs[0].dnu = 1.0;
  for (Eigen::Index k = 0; k < nv; ++k) {
    auto [r, c] = vech_position(k, n);
    auto& S = dirs[static_cast<std::size_t>(1 + k)].S;
    S(r, c) = 1.0;
    S(c, r) = 1.0;
  }
  for (Eigen::Index k = 0; k < n; ++k) dirs[static_cast<std::size_t>(1 + nv + k)].m(k) = 1.0;
  for (auto& d : dirs) {
    d.r = d.m + d.S * z;
    d.oir = omega_inv * d.r;
    d.oiS = omega_inv * d.S;
    d.dq = -2.0 * d.m.dot(z) - z.dot(d.S * z);
    if (!gaussian) d.dw = d.dq / nu - q * d.dnu / (nu * nu);
  }
  return dirs;
}

}  // namespace

Vector UJacobians2::a_prime() const {
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = u[static_cast<std::size_t>(i)](0, 0);
  return out;
}

Matrix UJacobians2::B_prime(Eigen::Index i) const {
  return u.at(static_cast<std::size_t>(i)).block(1, 1, vech_size(n), vech_size(n));
}

Matrix UJacobians2::C_prime(Eigen::Index i) const {
  return u.at(static_cast<std::size_t>(i)).block(mu_begin(), mu_begin(), n, n);
}

Matrix UJacobians2::aB_prime() const {
  Matrix out(n, vech_size(n));
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = u[static_cast<std::size_t>(i)].block(0, 1, 1, vech_size(n));
  return out;
}

Matrix UJacobians2::aC_prime() const {
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = u[static_cast<std::size_t>(i)].block(0, mu_begin(), 1, n);
  return out;
}

Matrix UJacobians2::BC_prime(Eigen::Index i) const {
  return u.at(static_cast<std::size_t>(i)).block(1, mu_begin(), vech_size(n), n);
}

UJacobians2 second_u_jacobians(const Vector& v, const Matrix& omega_inv, double nu) {
  const auto n = v.size();
  if (omega_inv.rows() != n || omega_inv.cols() != n) throw InvalidInput("second_u_jacobians: dimension mismatch");
  if (!(nu > 0.0)) throw InvalidInput("degrees of freedom must be positive");
  const bool gaussian = std::isinf(nu);
  const double dn = static_cast<double>(n);
  const auto dirs = local_directions(v, omega_inv, nu);
  const auto L = static_cast<Eigen::Index>(dirs.size());

  UJacobians2 out;
  out.n = n;
  out.u.assign(static_cast<std::size_t>(n), Matrix::Zero(L, L));
  out.ell = Matrix::Zero(L, L);

  const double q = v.dot(omega_inv * v);
  const double w = gaussian ? 1.0 : 1.0 + q / nu;
  const double c2 = gaussian ? 0.0
                             : 0.25 * boost::math::trigamma(0.5 * (nu + dn)) -
                                   0.25 * boost::math::trigamma(0.5 * nu) + dn / (2.0 * nu * nu);

  for (Eigen::Index i = 0; i < L; ++i) {
    const auto& di = dirs[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i; j < L; ++j) {
      const auto& dj = dirs[static_cast<std::size_t>(j)];
      const double d2q = 2.0 * di.r.dot(dj.oir);
      const double tr = 0.5 * (di.oiS * dj.oiS).trace();
      double ell = 0.0;
      if (gaussian) {
        ell = tr - 0.5 * d2q;
      } else {
        const double d2w = d2q / nu - (dj.dq * di.dnu + di.dq * dj.dnu) / (nu * nu) +
                           2.0 * q * di.dnu * dj.dnu / (nu * nu * nu);
        ell = c2 * di.dnu * dj.dnu + tr - (dj.dnu * di.dw + di.dnu * dj.dw) / (2.0 * w) -
              0.5 * (nu + dn) * (d2w / w - di.dw * dj.dw / (w * w));
        const Vector d2u = (dj.m * di.dw + di.m * dj.dw) / (w * w) - v * (d2w / (w * w)) +
                           v * (2.0 * di.dw * dj.dw / (w * w * w));
        for (Eigen::Index k = 0; k < n; ++k) {
          auto& h = out.u[static_cast<std::size_t>(k)];
          h(i, j) = d2u(k);
          h(j, i) = d2u(k);
        }
      }
      out.ell(i, j) = ell;
      out.ell(j, i) = ell;
    }
  }
  return out;
}

Deriv2Paths::Deriv2Paths(Eigen::Index n, std::vector<std::vector<Matrix>> second)
    : n_(n), h_(std::move(second)) {}

const Matrix& Deriv2Paths::second(Eigen::Index t, Eigen::Index i) const {
  return h_.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(i));
}

namespace {

SecondOrderFilter run_second_order(const ModelParams& params, const Matrix& y, const std::optional<Vector>& mu_init,
                                   bool keep_paths) {
  const auto n = params.dim();
  const ThetaLayout lay{n};
  const auto p = lay.size();
  const auto nv = lay.nvech();
  const auto L = 1 + nv + n;
  const auto T = y.rows();

  SecondOrderFilter out;
  out.filter = filter_pass(params, y, mu_init);
  const FilterOutput& f = out.filter;
  const ScaleFactor sf = factor_scale(params.scale());
  const double nu = params.dof();
  const Matrix& phi = params.ar();
  const Matrix& gain = params.gain();

  // Local-to-theta map: rows (nu, vech Omega) are fixed selections, rows mu are J_t.
  Matrix G = Matrix::Zero(L, p);
  G.topLeftCorner(1 + nv, 1 + nv).setIdentity();

  Matrix jac = initial_jacobian(n, !mu_init.has_value());
  std::vector<Matrix> h(static_cast<std::size_t>(n), Matrix::Zero(p, p));
  std::vector<Matrix> jacs;
  std::vector<std::vector<Matrix>> hs;
  if (keep_paths) {
    jacs.reserve(static_cast<std::size_t>(T + 1));
    hs.reserve(static_cast<std::size_t>(T + 1));
  }
  Matrix hess = Matrix::Zero(p, p);
  Matrix centered;  // d(mu - omega)/d theta'

  for (Eigen::Index t = 0; t < T; ++t) {
    if (keep_paths) {
      jacs.push_back(jac);
      hs.push_back(h);
    }
    const Vector v = f.v.row(t).transpose();
    const Vector mu = f.mu.row(t).transpose();
    const ScorePartials sp = score_partials(v, sf, nu, f.w(t), f.b(t));
    const UJacobians uj =
        u_jacobians(v, sf.inverse, nu, f.w(t), f.b(t), mu, params.mean(), phi, f.u.row(t).transpose());
    const UJacobians2 u2 = second_u_jacobians(v, sf.inverse, nu);

    G.bottomRows(n) = jac;
    hess.noalias() += G.transpose() * u2.ell * G;
    for (Eigen::Index k = 0; k < n; ++k) hess += sp.sigma(k) * h[static_cast<std::size_t>(k)];

    // d^2 u_j = G' U_j G + sum_k C_jk H_k
    std::vector<Matrix> d2u(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      Matrix m = G.transpose() * u2.u[static_cast<std::size_t>(j)] * G;
      for (Eigen::Index k = 0; k < n; ++k) m += uj.C(j, k) * h[static_cast<std::size_t>(k)];
      d2u[static_cast<std::size_t>(j)] = std::move(m);
    }
    // du/d theta' for the gain forcing
    Matrix du = uj.C * jac;
    du.col(ThetaLayout::nu()) += uj.a;
    du.middleCols(ThetaLayout::scale_begin(), nv) += uj.B;

    centered = jac;
    centered.middleCols(lay.mean_begin(), n) -= Matrix::Identity(n, n);

    std::vector<Matrix> next(static_cast<std::size_t>(n), Matrix::Zero(p, p));
    for (Eigen::Index i = 0; i < n; ++i) {
      Matrix& hn = next[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < n; ++j) {
        if (phi(i, j) != 0.0) hn += phi(i, j) * h[static_cast<std::size_t>(j)];
        if (gain(i, j) != 0.0) hn += gain(i, j) * d2u[static_cast<std::size_t>(j)];
        // Phi_ij and K_ij sit at column-major position i + j n
        const auto a_idx = lay.ar_begin() + i + j * n;
        const auto k_idx = lay.gain_begin() + i + j * n;
        hn.row(a_idx) += centered.row(j);
        hn.col(a_idx) += centered.row(j).transpose();
        hn.row(k_idx) += du.row(j);
        hn.col(k_idx) += du.row(j).transpose();
      }
    }
    h = std::move(next);
    jac = propagate_jacobian(uj, params, jac);
  }
  if (keep_paths) {
    jacs.push_back(jac);
    hs.push_back(h);
    out.paths = DerivPaths(n, std::move(jacs));
    out.paths2 = Deriv2Paths(n, std::move(hs));
  }
  out.hessian = 0.5 * (hess + hess.transpose());
  return out;
}

}  // namespace

SecondOrderFilter filter_with_second_derivatives(const ModelParams& params, const Matrix& y,
                                                 const std::optional<Vector>& mu_init) {
  return run_second_order(params, y, mu_init, true);
}

Matrix observed_hessian(const ModelParams& params, const Matrix& y, const std::optional<Vector>& mu_init) {
  return run_second_order(params, y, mu_init, false).hessian;
}

}  // namespace dcs
