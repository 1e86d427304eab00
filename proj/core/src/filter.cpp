#include "dcs/filter.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <ostream>

namespace dcs {

namespace {

void require_dof(double nu) {
  if (!(nu > 0.0)) throw InvalidInput("degrees of freedom must be positive");
}

FilterOutput run_filter(const ModelParams& params, const Matrix& y, const std::optional<Vector>& mu_init,
                        bool gaussian) {
  const auto n = params.dim();
  const auto T = y.rows();
  if (T < 1) throw InvalidInput("filter needs at least one observation");
  if (y.cols() != n) {
    throw InvalidInput("series has " + std::to_string(y.cols()) + " columns, model has N = " +
                       std::to_string(n));
  }
  if (!y.allFinite()) throw InvalidInput("series contains NaN or infinite values");
  if (mu_init && mu_init->size() != n) throw InvalidInput("mu_init has wrong length");
  const double nu = gaussian ? std::numeric_limits<double>::infinity() : params.dof();
  require_dof(nu);

  const ScaleFactor sf = factor_scale(params.scale());
  const Vector& omega = params.mean();
  const Matrix& phi = params.ar();
  const Matrix& gain = params.gain();

  FilterOutput out;
  out.mu.resize(T + 1, n);
  out.v.resize(T, n);
  out.u.resize(T, n);
  out.w.resize(T);
  out.b.resize(T);
  out.ell.resize(T);
  out.std_resid.resize(T, n);

  const double half_n = 0.5 * static_cast<double>(n);
  const double constant =
      std::isinf(nu) ? -half_n * std::log(2.0 * std::numbers::pi) - 0.5 * sf.log_det
                     : log_gamma_ratio(nu, n) - half_n * std::log(std::numbers::pi * nu) - 0.5 * sf.log_det;

  Vector mu = mu_init ? *mu_init : omega;
  for (Eigen::Index t = 0; t < T; ++t) {
    out.mu.row(t) = mu.transpose();
    const Vector v = y.row(t).transpose() - mu;
    const Vector z = sf.inverse * v;
    const double q = v.dot(z);
    double w = 1.0;
    double ell = 0.0;
    if (std::isinf(nu)) {
      ell = constant - 0.5 * q;
    } else {
      w = 1.0 + q / nu;
      ell = constant - 0.5 * (nu + static_cast<double>(n)) * std::log1p(q / nu);
    }
    const Vector u = v / w;
    out.v.row(t) = v.transpose();
    out.u.row(t) = u.transpose();
    out.w(t) = w;
    out.b(t) = 1.0 - 1.0 / w;
    out.ell(t) = ell;
    out.std_resid.row(t) =
        sf.lower.triangularView<Eigen::Lower>().solve(v).transpose();
    mu = omega + phi * (mu - omega) + gain * u;
  }
  out.mu.row(T) = mu.transpose();
  out.loglik = out.ell.sum();
  return out;
}

}  // namespace

double log_gamma_ratio(double nu, Eigen::Index n) {
  // Gamma(a) / Gamma(a + delta) without cancellation at large a
  return -std::log(boost::math::tgamma_delta_ratio(0.5 * nu, 0.5 * static_cast<double>(n)));
}

ScoreTriple score_weight(const Vector& v, const Matrix& omega_inv, double nu) {
  if (!v.allFinite() || !omega_inv.allFinite()) throw InvalidInput("score_weight: non-finite input");
  if (omega_inv.rows() != v.size() || omega_inv.cols() != v.size()) {
    throw InvalidInput("score_weight: dimension mismatch");
  }
  require_dof(nu);
  if (std::isinf(nu)) return {v, 1.0, 0.0};
  const double q = v.dot(omega_inv * v);
  const double w = 1.0 + q / nu;
  return {v / w, w, 1.0 - 1.0 / w};
}

FilterOutput filter_pass(const ModelParams& params, const Matrix& y, const std::optional<Vector>& mu_init) {
  return run_filter(params, y, mu_init, params.is_gaussian());
}

FilterOutput gaussian_filter_pass(const ModelParams& params, const Matrix& y,
                                  const std::optional<Vector>& mu_init) {
  return run_filter(params, y, mu_init, true);
}

double loglik_obs(const Vector& v, const ScaleFactor& scale, double nu) {
  require_dof(nu);
  const auto n = scale.dim();
  if (v.size() != n) throw InvalidInput("loglik_obs: dimension mismatch");
  const double q = v.dot(scale.inverse * v);
  const double half_n = 0.5 * static_cast<double>(n);
  if (std::isinf(nu)) {
    return -half_n * std::log(2.0 * std::numbers::pi) - 0.5 * scale.log_det - 0.5 * q;
  }
  return log_gamma_ratio(nu, n) - half_n * std::log(std::numbers::pi * nu) - 0.5 * scale.log_det -
         0.5 * (nu + static_cast<double>(n)) * std::log1p(q / nu);
}

double loglik_obs(const Vector& v, const Matrix& omega_scale, double nu) {
  return loglik_obs(v, factor_scale(omega_scale), nu);
}

double u_moment(double nu, Eigen::Index n, double c, int s) {
  require_dof(nu);
  if (!(c > 0.0) || s < 1) throw InvalidInput("u_moment requires c > 0 and s >= 1");
  const double a = 0.5 * static_cast<double>(n);
  const double bnu = 0.5 * nu;
  const double ds = static_cast<double>(s);
  const double log_ratio = std::lgamma(a + ds) + std::lgamma(bnu + ds) - std::lgamma(a + bnu + 2.0 * ds) -
                           (std::lgamma(a) + std::lgamma(bnu) - std::lgamma(a + bnu));
  return std::pow(nu * c, ds) * std::exp(log_ratio);
}

Matrix u_covariance(double nu, const Matrix& omega_scale) {
  require_dof(nu);
  if (std::isinf(nu)) return omega_scale;
  const double n = static_cast<double>(omega_scale.rows());
  return (nu * nu / ((nu + n) * (nu + n + 2.0))) * omega_scale;
}

void write_filter_csv(std::ostream& os, const FilterOutput& out) {
  const auto n = out.dim();
  os << "t";
  for (const char* prefix : {"mu_", "v_", "u_"}) {
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << prefix << (i + 1);
  }
  os << ",w,b,ell\n";
  os.precision(17);
  for (Eigen::Index t = 0; t < out.length(); ++t) {
    os << (t + 1);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << out.mu(t, i);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << out.v(t, i);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << out.u(t, i);
    os << ',' << out.w(t) << ',' << out.b(t) << ',' << out.ell(t) << '\n';
  }
}

}  // namespace dcs
