#include "dcs/estimate.hpp"

#include "dcs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dcs {

namespace {

constexpr double kLoglikSlack = 1e-8;

struct Evaluation {
  bool ok = false;
  ScoreInformation si;
};

bool inside_bounds(const ModelParams& params, bool gaussian, const ScoringOptions& opt) {
  if (gaussian) return true;
  const double nu = params.dof();
  return std::isfinite(nu) && nu >= opt.nu_min && nu <= opt.nu_max;
}

bool admissible_candidate(const ModelParams& params, bool gaussian, const Matrix& y, const ScoringOptions& opt) {
  if (!inside_bounds(params, gaussian, opt)) return false;
  if (!params.scale().allFinite() || !params.ar().allFinite() || !params.gain().allFinite() ||
      !params.mean().allFinite()) {
    return false;
  }
  const AdmissibilityReport rep = validate(params);
  if (!rep.nu_positive || !rep.scale_positive_definite || !rep.stationary) return false;
  if (opt.enforce_invertibility) {
    return empirical_invertibility(params, y, opt.invertibility_margin, opt.mu_init).feasible;
  }
  return true;
}

Evaluation evaluate(const Vector& theta, Eigen::Index n, bool gaussian, const Matrix& y, const ScoringOptions& opt) {
  Evaluation ev;
  try {
    const ModelParams params = unpack(theta, n, gaussian);
    if (!admissible_candidate(params, gaussian, y, opt)) return ev;
    ev.si = score_and_information(params, y, opt.mu_init);
  } catch (const std::exception&) {
    return ev;
  }
  ev.ok = std::isfinite(ev.si.loglik) && ev.si.score.allFinite() && ev.si.information.allFinite();
  return ev;
}

std::vector<Eigen::Index> free_indices(const std::vector<bool>& fixed) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (!fixed[i]) idx.push_back(static_cast<Eigen::Index>(i));
  }
  return idx;
}

Matrix select(const Matrix& m, const std::vector<Eigen::Index>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return out;
}

double excess_kurtosis(const Eigen::Ref<const Vector>& x) {
  const double mean = x.mean();
  const Vector c = x.array() - mean;
  const double m2 = c.squaredNorm() / static_cast<double>(x.size());
  const double m4 = c.array().pow(4).sum() / static_cast<double>(x.size());
  return m4 / (m2 * m2) - 3.0;
}

}  // namespace

Eigen::Index EstimationResult::free_parameters() const {
  return theta_hat.values.size() - (gaussian ? 1 : 0);
}

EstimationResult fisher_scoring(const Matrix& y, const PackedTheta& theta0, bool gaussian,
                                const ScoringOptions& opt) {
  const auto n = theta0.n;
  const auto p = theta_size(n);
  if (theta0.values.size() != p) throw InvalidInput("theta0 has the wrong length");
  if (y.cols() != n) throw InvalidInput("series dimension does not match theta0");
  if (!opt.fixed.empty() && static_cast<Eigen::Index>(opt.fixed.size()) != p) {
    throw InvalidInput("fixed mask must have one entry per parameter");
  }
  if (!(opt.delta > 0.0) || opt.max_iter < 1) throw InvalidInput("delta must be positive and max_iter >= 1");

  std::vector<bool> fixed = opt.fixed.empty() ? std::vector<bool>(static_cast<std::size_t>(p), false) : opt.fixed;
  if (gaussian) fixed[0] = true;

  Vector theta = theta0.values;
  if (gaussian) theta(0) = 0.0;
  Evaluation cur = evaluate(theta, n, gaussian, y, opt);
  if (!cur.ok) throw InvalidInput("starting value is not admissible or has non-finite likelihood");

  EstimationResult res;
  res.gaussian = gaussian;
  res.length = y.rows();
  Vector best_theta = theta;
  Evaluation best = cur;

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    std::vector<bool> active_fixed = fixed;
    if (!gaussian && !fixed[0]) {
      const double nu = theta(0);
      const double s_nu = cur.si.score(0);
      if ((nu >= opt.nu_max && s_nu > 0.0) || (nu <= opt.nu_min && s_nu < 0.0)) active_fixed[0] = true;
    }
    const auto idx = free_indices(active_fixed);
    if (idx.empty()) {
      res.converged = true;
      break;
    }
    const Matrix info_ff = select(cur.si.information, idx);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(info_ff, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (!(cond <= opt.max_condition)) {
      throw SingularInformation("information matrix is singular or ill-conditioned (condition " +
                                    std::to_string(cond) + ")",
                                PackedTheta{theta, n}, cond);
    }
    Vector s_ff(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) s_ff(static_cast<Eigen::Index>(k)) = cur.si.score(idx[k]);
    const Vector step_ff = info_ff.ldlt().solve(s_ff);
    Vector step = Vector::Zero(p);
    for (std::size_t k = 0; k < idx.size(); ++k) step(idx[k]) = step_ff(static_cast<Eigen::Index>(k));

    const double scale = std::max(theta.norm(), std::numeric_limits<double>::min());
    const double full_rel = step.norm() / scale;

    double alpha = 1.0;
    int halvings = 0;
    bool accepted = false;
    Vector cand;
    Evaluation next;
    for (; halvings <= opt.max_halvings; ++halvings, alpha *= 0.5) {
      cand = theta + alpha * step;
      if (!gaussian) cand(0) = std::clamp(cand(0), opt.nu_min, opt.nu_max);
      next = evaluate(cand, n, gaussian, y, opt);
      if (next.ok && next.si.loglik >= cur.si.loglik - kLoglikSlack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.trace.push_back({full_rel, cur.si.loglik, opt.max_halvings});
      res.step_halvings += opt.max_halvings;
      res.iterations = iter + 1;
      res.converged = full_rel < opt.delta;
      break;
    }
    const double rel = (cand - theta).norm() / scale;
    theta = cand;
    cur = std::move(next);
    res.step_halvings += halvings;
    res.iterations = iter + 1;
    res.trace.push_back({rel, cur.si.loglik, halvings});
    if (cur.si.loglik > best.si.loglik) {
      best_theta = theta;
      best = cur;
    }
    if (full_rel < opt.delta) {
      res.converged = true;
      break;
    }
  }

  res.theta_hat = PackedTheta{best_theta, n};
  res.loglik = best.si.loglik;
  res.info = best.si.information;
  try {
    res.std_err = standard_errors(res.info, gaussian);
    res.info_positive_definite = true;
  } catch (const NotPositiveDefinite&) {
    res.std_err = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
    res.info_positive_definite = false;
  }
  return res;
}

ModelParams moment_start(const Matrix& y) {
  const auto n = y.cols();
  const auto T = y.rows();
  if (T < 2) throw InvalidInput("need at least two observations");
  const Vector mean = y.colwise().mean().transpose();
  const Matrix centered = y.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(T);
  const Matrix eye = Matrix::Identity(n, n);
  return ModelParams::gaussian(mean, cov, 0.8 * eye, 0.5 * eye);
}

ModelParams init_gaussian_qml(const Matrix& y, const ScoringOptions& options) {
  if (y.rows() < 10 * y.cols()) throw InvalidInput("Gaussian QML needs T >= 10 N");
  const ModelParams start = moment_start(y);
  ScoringOptions opt = options;
  opt.enforce_invertibility = false;
  opt.fixed.clear();
  try {
    const EstimationResult fit = fisher_scoring(y, pack(start), true, opt);
    return fit.params();
  } catch (const std::exception&) {
    return start;
  }
}

double nu_from_kurtosis(double k) {
  if (!(k > 0.0)) return 100.0;
  return std::clamp((4.0 * k + 6.0) / k, 4.5, 200.0);
}

double init_nu(const Matrix& std_resid) {
  if (std_resid.rows() < 30) throw InvalidInput("init_nu needs T >= 30");
  double k = 0.0;
  for (Eigen::Index i = 0; i < std_resid.cols(); ++i) k += excess_kurtosis(std_resid.col(i));
  return nu_from_kurtosis(k / static_cast<double>(std_resid.cols()));
}

EstimationResult estimate(const Matrix& y, bool gaussian, const ScoringOptions& options) {
  const ModelParams qml = init_gaussian_qml(y, options);
  if (gaussian) return fisher_scoring(y, pack(qml), true, options);

  const FilterOutput f = gaussian_filter_pass(qml, y, options.mu_init);
  const double nu0 = std::clamp(init_nu(f.std_resid), options.nu_min, options.nu_max);
  const double shrink = nu0 > 2.0 ? (nu0 - 2.0) / nu0 : 1.0;
  ModelParams start(nu0, qml.mean(), shrink * qml.scale(), qml.ar(), qml.gain());
  if (options.enforce_invertibility) {
    for (int k = 0; k < 30 && !empirical_invertibility(start, y, options.invertibility_margin, options.mu_init).feasible;
         ++k) {
      start = ModelParams(nu0, start.mean(), start.scale(), start.ar(), 0.5 * start.gain());
    }
  }
  return fisher_scoring(y, pack(start), false, options);
}

Vector standard_errors(const Matrix& info, bool gaussian) {
  const auto p = info.rows();
  if (info.cols() != p) throw InvalidInput("information matrix must be square");
  const Eigen::Index off = gaussian ? 1 : 0;
  const Matrix block = info.bottomRightCorner(p - off, p - off);
  Eigen::LLT<Matrix> llt(0.5 * (block + block.transpose()));
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("information matrix is not positive definite");
  const Matrix inv = llt.solve(Matrix::Identity(p - off, p - off));
  Vector se(p);
  if (gaussian) se(0) = std::numeric_limits<double>::quiet_NaN();
  se.tail(p - off) = inv.diagonal().cwiseSqrt();
  return se;
}

InvertibilityCheck empirical_invertibility(const ModelParams& params, const Matrix& y, double margin,
                                           const std::optional<Vector>& mu_init) {
  const FilterOutput f = filter_pass(params, y, mu_init);
  const auto n = params.dim();
  const Matrix omega_inv = factor_scale(params.scale()).inverse;
  const Matrix eye = Matrix::Identity(n, n);
  const double nu = params.dof();
  double total = 0.0;
  for (Eigen::Index t = 0; t < f.length(); ++t) {
    Matrix c = -eye;
    if (!std::isinf(nu)) {
      const Vector v = f.v.row(t).transpose();
      const double w = f.w(t);
      c = (2.0 / (nu * w)) * v * (omega_inv * v).transpose() - eye;
      c /= w;
    }
    total += std::log(spectral_norm(params.ar() + params.gain() * c));
  }
  InvertibilityCheck out;
  out.value = total / static_cast<double>(f.length());
  out.feasible = out.value < -margin;
  return out;
}

nlohmann::json to_json(const EstimationResult& result) {
  const ThetaLayout lay = result.theta_hat.layout();
  const auto names = lay.names();
  nlohmann::json j;
  j["theta"] = to_json(result.params());
  nlohmann::json se = nlohmann::json::object();
  nlohmann::json packed = nlohmann::json::object();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (result.gaussian && k == ThetaLayout::nu()) continue;
    packed[names[i]] = result.theta_hat.values(k);
    se[names[i]] = result.std_err.size() > k ? result.std_err(k) : std::numeric_limits<double>::quiet_NaN();
  }
  j["packed"] = packed;
  j["std_err"] = se;
  j["loglik"] = result.loglik;
  const InformationCriteria ic = information_criteria(result.loglik, result.free_parameters(), result.length);
  j["aic"] = ic.aic;
  j["bic"] = ic.bic;
  j["n_params"] = result.free_parameters();
  j["T"] = result.length;
  j["gaussian"] = result.gaussian;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["step_halvings"] = result.step_halvings;
  j["info_positive_definite"] = result.info_positive_definite;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& r : result.trace) {
    trace.push_back({{"relative_step", r.relative_step}, {"loglik", r.loglik}, {"halvings", r.halvings}});
  }
  j["trace"] = trace;
  return j;
}

}  // namespace dcs
