#pragma once

#include "dcs/filter.hpp"

#include <functional>
#include <iosfwd>

namespace dcs {

/// Rows l = 1..L of y_hat_{T+l} = omega + Phi^{l-1} (mu_{T+1|T} - omega).
[[nodiscard]] Matrix forecast(const ModelParams& params, const Vector& mu_next, int horizon);

struct PortmanteauResult {
  double q = 0.0;
  int df = 0;
  double p_value = 1.0;
  int lags = 0;
};

/// Hosking's multivariate portmanteau on demeaned residuals; df = N^2 m.
[[nodiscard]] PortmanteauResult portmanteau(const Matrix& resid, int lags);

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// aic = 2p - 2 loglik, bic = p ln T - 2 loglik.
[[nodiscard]] InformationCriteria information_criteria(double loglik, Eigen::Index p, Eigen::Index T);

/// Newey-West HAC covariance of OLS coefficients with Bartlett weights 1 - l/(L+1).
[[nodiscard]] Matrix newey_west(const Matrix& regressors, const Vector& residuals, int lag);

struct IrfResult {
  int horizon = 0;
  Eigen::Index n = 0;
  /// response[h](i, j): response of location component i to a unit shock in u_j, h steps after impact.
  std::vector<Matrix> response;
  std::vector<Matrix> std_err;
  std::vector<Matrix> lower;
  std::vector<Matrix> upper;
  /// Residual standard deviation of each (h, i) projection.
  std::vector<Vector> resid_sd;
};

using LagRule = std::function<int(int)>;

/**
 * Local projections of mu_{t+h+1|t+h} on (1, u_t), h = 0..H, every response
 * component on all shocks jointly. Bands are point +/- 1.96 Newey-West SE
 * with lag lag_rule(h) (default h). `shock_scale` multiplies the shock size.
 */
[[nodiscard]] IrfResult local_projection_irf(const FilterOutput& filter, int horizon, const LagRule& lag_rule = {},
                                             double shock_scale = 1.0);

/// Long format: response,shock,horizon,point,lo,hi (1-based component indices).
void write_irf_csv(std::ostream& os, const IrfResult& irf);
/// Columns step,y_hat_1..y_hat_N.
void write_forecast_csv(std::ostream& os, const Matrix& path);

}  // namespace dcs
