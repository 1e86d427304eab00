#include "dcs/diagnostics.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <ostream>

namespace dcs {

Matrix forecast(const ModelParams& params, const Vector& mu_next, int horizon) {
  const auto n = params.dim();
  if (horizon < 1) throw InvalidInput("forecast horizon must be at least 1");
  if (mu_next.size() != n) throw InvalidInput("mu_next has the wrong length");
  Matrix out(horizon, n);
  Vector dev = mu_next - params.mean();
  for (int l = 0; l < horizon; ++l) {
    out.row(l) = (params.mean() + dev).transpose();
    dev = params.ar() * dev;
  }
  return out;
}

PortmanteauResult portmanteau(const Matrix& resid, int lags) {
  const auto T = resid.rows();
  const auto n = resid.cols();
  if (lags < 1) throw InvalidInput("portmanteau needs at least one lag");
  if (T <= 5 * static_cast<Eigen::Index>(lags)) throw InvalidInput("portmanteau needs T > 5 m");
  const Matrix e = resid.rowwise() - resid.colwise().mean();
  const double dT = static_cast<double>(T);
  const Matrix g0 = e.transpose() * e / dT;
  Eigen::LDLT<Matrix> g0_ldlt(g0);
  if (g0_ldlt.info() != Eigen::Success || g0_ldlt.rcond() < 1e-12) {
    throw InvalidInput("lag-0 autocovariance is singular");
  }
  const Matrix g0_inv = g0_ldlt.solve(Matrix::Identity(n, n));
  double q = 0.0;
  for (int i = 1; i <= lags; ++i) {
    const Matrix gi = e.bottomRows(T - i).transpose() * e.topRows(T - i) / dT;
    q += (gi.transpose() * g0_inv * gi * g0_inv).trace() / (dT - i);
  }
  PortmanteauResult out;
  out.q = std::max(0.0, dT * dT * q);
  out.lags = lags;
  out.df = static_cast<int>(n * n) * lags;
  boost::math::chi_squared dist(out.df);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.q));
  return out;
}

InformationCriteria information_criteria(double loglik, Eigen::Index p, Eigen::Index T) {
  if (T < 1) throw InvalidInput("information criteria need T > 0");
  const double dp = static_cast<double>(p);
  return {2.0 * dp - 2.0 * loglik, dp * std::log(static_cast<double>(T)) - 2.0 * loglik};
}

Matrix newey_west(const Matrix& x, const Vector& e, int lag) {
  const auto T = x.rows();
  const auto k = x.cols();
  if (e.size() != T) throw InvalidInput("newey_west: residual length mismatch");
  if (lag < 0) throw InvalidInput("newey_west: lag must be non-negative");
  if (T <= k + lag) throw InvalidInput("newey_west needs T > k + L");
  const Matrix xtx = x.transpose() * x;
  Eigen::ColPivHouseholderQR<Matrix> qr(xtx);
  if (qr.rank() < k) throw InvalidInput("newey_west: regressors are rank deficient");
  const Matrix bread = qr.inverse();
  const Matrix g = x.array().colwise() * e.array();
  Matrix s = g.transpose() * g;
  for (int l = 1; l <= lag; ++l) {
    const double weight = 1.0 - static_cast<double>(l) / (lag + 1.0);
    const Matrix gl = g.bottomRows(T - l).transpose() * g.topRows(T - l);
    s += weight * (gl + gl.transpose());
  }
  return bread * s * bread;
}

IrfResult local_projection_irf(const FilterOutput& filter, int horizon, const LagRule& lag_rule, double shock_scale) {
  const auto T = filter.length();
  const auto n = filter.dim();
  if (horizon < 0) throw InvalidInput("IRF horizon must be non-negative");
  if (T <= horizon + 10 * n) throw InvalidInput("local projections need T > H + 10 N");
  IrfResult out;
  out.horizon = horizon;
  out.n = n;
  for (int h = 0; h <= horizon; ++h) {
    const Eigen::Index rows = T - h;
    Matrix x(rows, n + 1);
    x.col(0).setOnes();
    x.rightCols(n) = filter.u.topRows(rows);
    const Matrix lhs = filter.mu.middleRows(h + 1, rows);
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    if (qr.rank() < n + 1) throw InvalidInput("local projection regressors are rank deficient");
    const Matrix coef = qr.solve(lhs);
    const Matrix resid = lhs - x * coef;
    const int lag = lag_rule ? lag_rule(h) : h;

    Matrix resp(n, n), se(n, n);
    Vector sd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Matrix cov = newey_west(x, resid.col(i), lag);
      for (Eigen::Index j = 0; j < n; ++j) {
        resp(i, j) = shock_scale * coef(1 + j, i);
        se(i, j) = std::abs(shock_scale) * std::sqrt(std::max(0.0, cov(1 + j, 1 + j)));
      }
      sd(i) = std::sqrt(resid.col(i).squaredNorm() / static_cast<double>(rows - n - 1));
    }
    out.response.push_back(resp);
    out.std_err.push_back(se);
    out.lower.push_back(resp - 1.96 * se);
    out.upper.push_back(resp + 1.96 * se);
    out.resid_sd.push_back(sd);
  }
  return out;
}

void write_irf_csv(std::ostream& os, const IrfResult& irf) {
  os << "response,shock,horizon,point,lo,hi\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < irf.n; ++i) {
    for (Eigen::Index j = 0; j < irf.n; ++j) {
      for (int h = 0; h <= irf.horizon; ++h) {
        const auto k = static_cast<std::size_t>(h);
        os << (i + 1) << ',' << (j + 1) << ',' << h << ',' << irf.response[k](i, j) << ','
           << irf.lower[k](i, j) << ',' << irf.upper[k](i, j) << '\n';
      }
    }
  }
}

void write_forecast_csv(std::ostream& os, const Matrix& path) {
  os << "step";
  for (Eigen::Index i = 0; i < path.cols(); ++i) os << ",y_hat_" << (i + 1);
  os << '\n';
  os.precision(17);
  for (Eigen::Index l = 0; l < path.rows(); ++l) {
    os << (l + 1);
    for (Eigen::Index i = 0; i < path.cols(); ++i) os << ',' << path(l, i);
    os << '\n';
  }
}

}  // namespace dcs
