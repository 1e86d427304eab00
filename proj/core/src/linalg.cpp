#include "dcs/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace dcs {

ScaleFactor factor_scale(const Matrix& omega_scale) {
  if (omega_scale.rows() != omega_scale.cols() || omega_scale.rows() == 0) {
    throw InvalidInput("scale matrix must be square and non-empty");
  }
  if (!all_finite(omega_scale)) {
    throw InvalidInput("scale matrix has non-finite entries");
  }
  Eigen::LLT<Matrix> llt(omega_scale);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("scale matrix is not positive definite");
  }
  ScaleFactor f;
  f.lower = llt.matrixL();
  const auto n = omega_scale.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(f.lower(i, i) > 0.0)) {
      throw NotPositiveDefinite("scale matrix is not positive definite");
    }
    f.log_det += 2.0 * std::log(f.lower(i, i));
  }
  f.inverse = llt.solve(Matrix::Identity(n, n));
  f.inverse = 0.5 * (f.inverse + f.inverse.transpose()).eval();
  return f;
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw InvalidInput("spectral_radius requires a square matrix");
  }
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue solver failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 2 && m.cols() == 2) {
    // closed form: sigma_max^2 = (s + sqrt(s^2 - 4 det^2)) / 2, s = ||m||_F^2
    const double s = m.squaredNorm();
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::max(0.0, s * s - 4.0 * det * det);
    return std::sqrt(0.5 * (s + std::sqrt(disc)));
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix symmetric_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue solver failed");
  }
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Vector vech(const Matrix& m) {
  const auto n = m.rows();
  Vector out(vech_size(n));
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = c; r < n; ++r) out(k++) = m(r, c);
  }
  return out;
}

Matrix unvech(const Vector& v, Eigen::Index n) {
  if (v.size() != vech_size(n)) {
    throw InvalidInput("vech length does not match dimension");
  }
  Matrix m(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = c; r < n; ++r) {
      m(r, c) = v(k);
      m(c, r) = v(k);
      ++k;
    }
  }
  return m;
}

std::pair<Eigen::Index, Eigen::Index> vech_position(Eigen::Index k, Eigen::Index n) {
  Eigen::Index c = 0;
  Eigen::Index remaining = k;
  while (remaining >= n - c) {
    remaining -= n - c;
    ++c;
  }
  return {c + remaining, c};
}

Matrix duplication_matrix(Eigen::Index n) {
  if (n < 1) throw InvalidInput("duplication_matrix requires n >= 1");
  Matrix d = Matrix::Zero(n * n, vech_size(n));
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = c; r < n; ++r) {
      d(r + c * n, k) = 1.0;
      d(c + r * n, k) = 1.0;
      ++k;
    }
  }
  return d;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

bool all_finite(const Matrix& m) {
  return m.allFinite();
}

}  // namespace dcs
