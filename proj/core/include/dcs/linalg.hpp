#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dcs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised whenever a scale matrix fails its Cholesky factorization.
class NotPositiveDefinite : public std::domain_error {
 public:
  explicit NotPositiveDefinite(const std::string& what) : std::domain_error(what) {}
};

/// Raised for malformed shapes or non-finite inputs.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/**
 * Cached factorization of a scale matrix Omega = L L^T.
 *
 * Everything downstream of the filter works with Omega^{-1} v rather than
 * Omega^{-1/2} epsilon, so the inverse and the log-determinant are computed
 * once here and shared.
 */
struct ScaleFactor {
  Matrix lower;     // L, lower Cholesky factor
  Matrix inverse;   // Omega^{-1}
  double log_det = 0.0;

  [[nodiscard]] Eigen::Index dim() const { return lower.rows(); }
};

/// Throws NotPositiveDefinite if the factorization fails.
[[nodiscard]] ScaleFactor factor_scale(const Matrix& omega_scale);

[[nodiscard]] double spectral_radius(const Matrix& m);
[[nodiscard]] double spectral_norm(const Matrix& m);

/// Symmetric (eigen) square root of a symmetric PSD matrix.
[[nodiscard]] Matrix symmetric_sqrt(const Matrix& s);

[[nodiscard]] Vector vec(const Matrix& m);
/// Column-major lower triangle, diagonal included.
[[nodiscard]] Vector vech(const Matrix& m);
/// Inverse of vech for symmetric matrices.
[[nodiscard]] Matrix unvech(const Vector& v, Eigen::Index n);

/// (row, col) of the k-th vech element, row >= col.
[[nodiscard]] std::pair<Eigen::Index, Eigen::Index> vech_position(Eigen::Index k, Eigen::Index n);

[[nodiscard]] constexpr Eigen::Index vech_size(Eigen::Index n) { return n * (n + 1) / 2; }

/// D_N with vec(S) = D_N vech(S) for symmetric S.
[[nodiscard]] Matrix duplication_matrix(Eigen::Index n);

[[nodiscard]] Matrix kron(const Matrix& a, const Matrix& b);

[[nodiscard]] bool all_finite(const Matrix& m);

}  // namespace dcs
