#pragma once

#include "dcs/linalg.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <string>
#include <vector>

namespace dcs {

/**
 * Static parameters of the Student-t score-driven location filter
 *
 *   mu_{t+1|t} - omega = Phi (mu_{t|t-1} - omega) + K u_t,
 *   u_t = v_t / (1 + v_t' Omega^{-1} v_t / nu),  v_t = y_t - mu_{t|t-1}.
 *
 * Accessors are named by role: dof() is nu, mean() is omega, scale() is
 * Omega, ar() is Phi and gain() is K. Gaussian mode (nu -> infinity) is an
 * explicit flag; dof() then returns +infinity so that formulas can branch on
 * std::isinf.
 *
 * Instances are immutable. The scale matrix is symmetrized as (S + S')/2 on
 * construction.
 */
class ModelParams {
 public:
  ModelParams(double nu, Vector mean, Matrix scale, Matrix ar, Matrix gain);

  /// Gaussian-limit parameters (u_t = v_t, normal likelihood).
  static ModelParams gaussian(Vector mean, Matrix scale, Matrix ar, Matrix gain);

  [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }
  [[nodiscard]] bool is_gaussian() const { return gaussian_; }
  [[nodiscard]] double dof() const {
    return gaussian_ ? std::numeric_limits<double>::infinity() : nu_;
  }
  [[nodiscard]] const Vector& mean() const { return mean_; }
  [[nodiscard]] const Matrix& scale() const { return scale_; }
  [[nodiscard]] const Matrix& ar() const { return ar_; }
  [[nodiscard]] const Matrix& gain() const { return gain_; }

  [[nodiscard]] ModelParams with_dof(double nu) const;
  [[nodiscard]] ModelParams as_gaussian() const;

 private:
  ModelParams(bool gaussian, double nu, Vector mean, Matrix scale, Matrix ar, Matrix gain);

  bool gaussian_ = false;
  double nu_ = 0.0;
  Vector mean_;
  Matrix scale_;
  Matrix ar_;
  Matrix gain_;
};

/**
 * Index layout of the packed parameter vector
 * theta = (nu, vech Omega, omega, vec Phi, vec K), vech and vec column-major.
 */
struct ThetaLayout {
  Eigen::Index n = 1;

  [[nodiscard]] Eigen::Index nvech() const { return vech_size(n); }
  [[nodiscard]] static constexpr Eigen::Index nu() { return 0; }
  [[nodiscard]] static constexpr Eigen::Index scale_begin() { return 1; }
  [[nodiscard]] Eigen::Index mean_begin() const { return 1 + nvech(); }
  [[nodiscard]] Eigen::Index ar_begin() const { return mean_begin() + n; }
  [[nodiscard]] Eigen::Index gain_begin() const { return ar_begin() + n * n; }
  [[nodiscard]] Eigen::Index size() const { return gain_begin() + n * n; }

  /// Human-readable names ("nu", "Omega21", "omega1", "Phi12", "K22", ...).
  [[nodiscard]] std::vector<std::string> names() const;
};

[[nodiscard]] inline Eigen::Index theta_size(Eigen::Index n) { return ThetaLayout{n}.size(); }

struct PackedTheta {
  Vector values;
  Eigen::Index n = 1;

  [[nodiscard]] ThetaLayout layout() const { return ThetaLayout{n}; }
};

/// In Gaussian mode the nu slot holds 0 and is ignored by unpack(..., gaussian=true).
[[nodiscard]] PackedTheta pack(const ModelParams& params);
[[nodiscard]] ModelParams unpack(const PackedTheta& theta, bool gaussian = false);
[[nodiscard]] ModelParams unpack(const Vector& values, Eigen::Index n, bool gaussian = false);

struct AdmissibilityReport {
  bool nu_positive = false;
  bool scale_positive_definite = false;
  bool stationary = false;        // spectral radius of Phi < 1
  bool gain_identified = false;   // det K != 0
  double spectral_radius = 0.0;
  double gain_determinant = 0.0;

  [[nodiscard]] bool admissible() const {
    return nu_positive && scale_positive_definite && stationary && gain_identified;
  }
};

[[nodiscard]] AdmissibilityReport validate(const ModelParams& params);

/// {"nu": x | null, "omega": [...], "Omega": [[...]], "Phi": [[...]], "K": [[...]]}
[[nodiscard]] nlohmann::json to_json(const ModelParams& params);
[[nodiscard]] ModelParams params_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json matrix_to_json(const Matrix& m);
[[nodiscard]] Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace dcs
