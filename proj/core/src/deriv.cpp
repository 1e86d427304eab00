#include "dcs/deriv.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>

namespace dcs {

namespace {

// 1 on the diagonal vech slots, 2 off the diagonal: (x kron x)' D_N = multiplier .* vech(x x').
double vech_multiplicity(Eigen::Index r, Eigen::Index c) { return r == c ? 1.0 : 2.0; }

}  // namespace

ScorePartials score_partials(const Vector& v, const ScaleFactor& scale, double nu, double w, double b) {
  const auto n = scale.dim();
  if (v.size() != n) throw InvalidInput("score_partials: dimension mismatch");
  const double dn = static_cast<double>(n);
  const Vector z = scale.inverse * v;
  const bool gaussian = std::isinf(nu);
  const double factor = gaussian ? 1.0 : (nu + dn) / (nu * w);

  ScorePartials p;
  if (!gaussian) {
    p.alpha = 0.5 * (boost::math::digamma(0.5 * (nu + dn)) - boost::math::digamma(0.5 * nu) - dn / nu +
                     (nu + dn) / nu * b - std::log(w));
  }
  p.beta.resize(vech_size(n));
  for (Eigen::Index k = 0; k < p.beta.size(); ++k) {
    auto [r, c] = vech_position(k, n);
    p.beta(k) = 0.5 * vech_multiplicity(r, c) * (factor * z(r) * z(c) - scale.inverse(r, c));
  }
  p.sigma = factor * z;
  return p;
}

ScorePartials score_partials(const Vector& v, const Matrix& omega_scale, double nu, double w, double b) {
  return score_partials(v, factor_scale(omega_scale), nu, w, b);
}

UJacobians u_jacobians(const Vector& v, const Matrix& omega_inv, double nu, double w, double b,
                       const Vector& mu, const Vector& omega, const Matrix& phi, const Vector& u) {
  const auto n = v.size();
  if (omega_inv.rows() != n || mu.size() != n || omega.size() != n || phi.rows() != n || u.size() != n) {
    throw InvalidInput("u_jacobians: dimension mismatch");
  }
  const Matrix eye = Matrix::Identity(n, n);
  UJacobians j;
  j.a = Vector::Zero(n);
  j.B = Matrix::Zero(n, vech_size(n));
  j.Cst = eye - phi;
  j.D = kron((mu - omega).transpose(), eye);
  j.E = kron(u.transpose(), eye);
  if (std::isinf(nu)) {
    j.C = -eye;
    return j;
  }
  const Vector z = omega_inv * v;
  const double q = v.dot(z);
  const double one_minus_b = 1.0 - b;
  j.C = (2.0 * one_minus_b * one_minus_b / nu) * v * z.transpose() - one_minus_b * eye;
  j.a = v * (q / (nu * nu * w * w));
  for (Eigen::Index k = 0; k < j.B.cols(); ++k) {
    auto [r, c] = vech_position(k, n);
    j.B.col(k) = v * (vech_multiplicity(r, c) * z(r) * z(c) / (nu * w * w));
  }
  return j;
}

Matrix propagate_jacobian(const UJacobians& jac, const ModelParams& params, const Matrix& j_t) {
  const ThetaLayout lay{params.dim()};
  const auto n = lay.n;
  const Matrix& gain = params.gain();
  Matrix next = (params.ar() + gain * jac.C) * j_t;
  next.col(ThetaLayout::nu()) += gain * jac.a;
  next.middleCols(ThetaLayout::scale_begin(), lay.nvech()) += gain * jac.B;
  next.middleCols(lay.mean_begin(), n) += jac.Cst;
  next.middleCols(lay.ar_begin(), n * n) += jac.D;
  next.middleCols(lay.gain_begin(), n * n) += jac.E;
  return next;
}

Matrix initial_jacobian(Eigen::Index n, bool start_at_mean) {
  const ThetaLayout lay{n};
  Matrix j = Matrix::Zero(n, lay.size());
  if (start_at_mean) j.middleCols(lay.mean_begin(), n).setIdentity();
  return j;
}

DerivPaths::DerivPaths(Eigen::Index n, std::vector<Matrix> jacobians)
    : layout_{n}, jac_(std::move(jacobians)) {}

Vector DerivPaths::dnu(Eigen::Index t) const { return jacobian(t).col(ThetaLayout::nu()); }
Matrix DerivPaths::dscale(Eigen::Index t) const {
  return jacobian(t).middleCols(ThetaLayout::scale_begin(), layout_.nvech());
}
Matrix DerivPaths::dmean(Eigen::Index t) const { return jacobian(t).middleCols(layout_.mean_begin(), layout_.n); }
Matrix DerivPaths::dar(Eigen::Index t) const {
  return jacobian(t).middleCols(layout_.ar_begin(), layout_.n * layout_.n);
}
Matrix DerivPaths::dgain(Eigen::Index t) const {
  return jacobian(t).middleCols(layout_.gain_begin(), layout_.n * layout_.n);
}

FilterDerivatives filter_with_derivatives(const ModelParams& params, const Matrix& y,
                                          const std::optional<Vector>& mu_init) {
  FilterDerivatives out;
  out.filter = filter_pass(params, y, mu_init);
  const auto n = params.dim();
  const auto T = y.rows();
  const ScaleFactor sf = factor_scale(params.scale());
  const double nu = params.dof();

  std::vector<Matrix> jac;
  jac.reserve(static_cast<std::size_t>(T + 1));
  jac.push_back(initial_jacobian(n, !mu_init.has_value()));
  for (Eigen::Index t = 0; t < T; ++t) {
    const Vector mu = out.filter.mu.row(t).transpose();
    const UJacobians uj = u_jacobians(out.filter.v.row(t).transpose(), sf.inverse, nu, out.filter.w(t),
                                      out.filter.b(t), mu, params.mean(), params.ar(),
                                      out.filter.u.row(t).transpose());
    jac.push_back(propagate_jacobian(uj, params, jac.back()));
  }
  out.paths = DerivPaths(n, std::move(jac));
  return out;
}

Matrix location_information_kernel(double nu, const Matrix& omega_inv) {
  if (std::isinf(nu)) return omega_inv;
  const double dn = static_cast<double>(omega_inv.rows());
  return ((nu + dn) / (nu + dn + 2.0)) * omega_inv;
}

Matrix static_information(double nu, const Matrix& omega_inv) {
  const auto n = omega_inv.rows();
  const ThetaLayout lay{n};
  const double dn = static_cast<double>(n);
  Matrix info = Matrix::Zero(lay.size(), lay.size());
  const Matrix dup = duplication_matrix(n);
  const Matrix kk = dup.transpose() * kron(omega_inv, omega_inv) * dup;
  const auto sb = ThetaLayout::scale_begin();
  const auto nv = lay.nvech();
  if (std::isinf(nu)) {
    info.block(sb, sb, nv, nv) = 0.5 * kk;
    return info;
  }
  const Vector dvec = dup.transpose() * vec(omega_inv);
  const double s = nu + dn;
  info(0, 0) = 0.25 * (boost::math::trigamma(0.5 * nu) - boost::math::trigamma(0.5 * s) -
                       2.0 * dn * (s + 4.0) / (nu * s * (s + 2.0)));
  info.block(sb, sb, nv, nv) = (s / (2.0 * (s + 2.0))) * kk - (1.0 / (2.0 * (s + 2.0))) * dvec * dvec.transpose();
  const Vector cross = -(1.0 / (s * (s + 2.0))) * dvec;
  info.block(sb, 0, nv, 1) = cross;
  info.block(0, sb, 1, nv) = cross.transpose();
  return info;
}

ScoreInformation score_and_information(const ModelParams& params, const Matrix& y,
                                       const std::optional<Vector>& mu_init, bool keep_contributions) {
  const auto n = params.dim();
  const ThetaLayout lay{n};
  const auto p = lay.size();
  const auto T = y.rows();
  const FilterOutput f = filter_pass(params, y, mu_init);
  const ScaleFactor sf = factor_scale(params.scale());
  const double nu = params.dof();
  const Matrix kernel = location_information_kernel(nu, sf.inverse);

  ScoreInformation out;
  out.loglik = f.loglik;
  out.length = T;
  out.score = Vector::Zero(p);
  Matrix quad = Matrix::Zero(p, p);
  if (keep_contributions) out.contributions.resize(T, p);

  Matrix jac = initial_jacobian(n, !mu_init.has_value());
  Vector s_t(p);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Vector v = f.v.row(t).transpose();
    const ScorePartials sp = score_partials(v, sf, nu, f.w(t), f.b(t));
    s_t.noalias() = jac.transpose() * sp.sigma;
    s_t(ThetaLayout::nu()) += sp.alpha;
    s_t.segment(ThetaLayout::scale_begin(), lay.nvech()) += sp.beta;
    out.score += s_t;
    if (keep_contributions) out.contributions.row(t) = s_t.transpose();
    quad.noalias() += jac.transpose() * kernel * jac;

    const Vector mu = f.mu.row(t).transpose();
    const UJacobians uj =
        u_jacobians(v, sf.inverse, nu, f.w(t), f.b(t), mu, params.mean(), params.ar(), f.u.row(t).transpose());
    jac = propagate_jacobian(uj, params, jac);
  }
  out.information = static_cast<double>(T) * static_information(nu, sf.inverse) + quad;
  out.information = 0.5 * (out.information + out.information.transpose()).eval();
  return out;
}

Vector analytic_score(const ModelParams& params, const Matrix& y, const std::optional<Vector>& mu_init) {
  return score_and_information(params, y, mu_init).score;
}

Matrix conditional_information(const ModelParams& params, const Matrix& y, const std::optional<Vector>& mu_init) {
  return score_and_information(params, y, mu_init).information;
}

Matrix outer_product_of_gradients(const ModelParams& params, const Matrix& y,
                                  const std::optional<Vector>& mu_init) {
  const ScoreInformation si = score_and_information(params, y, mu_init, true);
  return si.contributions.transpose() * si.contributions;
}

}  // namespace dcs
