#include "dcs/params.hpp"

#include <cmath>
#include <utility>

namespace dcs {

namespace {

void check_shapes(const Vector& mean, const Matrix& scale, const Matrix& ar, const Matrix& gain) {
  const auto n = mean.size();
  if (n < 1) throw InvalidInput("parameter dimension must be at least 1");
  auto square = [n](const Matrix& m) { return m.rows() == n && m.cols() == n; };
  if (!square(scale) || !square(ar) || !square(gain)) {
    throw InvalidInput("Omega, Phi and K must all be N x N with N = size(omega)");
  }
}

}  // namespace

ModelParams::ModelParams(bool gaussian, double nu, Vector mean, Matrix scale, Matrix ar, Matrix gain)
    : gaussian_(gaussian),
      nu_(gaussian ? 0.0 : nu),
      mean_(std::move(mean)),
      scale_(std::move(scale)),
      ar_(std::move(ar)),
      gain_(std::move(gain)) {
  check_shapes(mean_, scale_, ar_, gain_);
  scale_ = 0.5 * (scale_ + scale_.transpose()).eval();
}

ModelParams::ModelParams(double nu, Vector mean, Matrix scale, Matrix ar, Matrix gain)
    : ModelParams(false, nu, std::move(mean), std::move(scale), std::move(ar), std::move(gain)) {}

ModelParams ModelParams::gaussian(Vector mean, Matrix scale, Matrix ar, Matrix gain) {
  return ModelParams(true, 0.0, std::move(mean), std::move(scale), std::move(ar), std::move(gain));
}

ModelParams ModelParams::with_dof(double nu) const {
  return ModelParams(false, nu, mean_, scale_, ar_, gain_);
}

ModelParams ModelParams::as_gaussian() const {
  return ModelParams(true, 0.0, mean_, scale_, ar_, gain_);
}

std::vector<std::string> ThetaLayout::names() const {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(size()));
  out.emplace_back("nu");
  for (Eigen::Index k = 0; k < nvech(); ++k) {
    auto [r, c] = vech_position(k, n);
    out.push_back("Omega" + std::to_string(r + 1) + std::to_string(c + 1));
  }
  for (Eigen::Index i = 0; i < n; ++i) out.push_back("omega" + std::to_string(i + 1));
  for (const char* block : {"Phi", "K"}) {
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index r = 0; r < n; ++r) {
        out.push_back(std::string(block) + std::to_string(r + 1) + std::to_string(c + 1));
      }
    }
  }
  return out;
}

PackedTheta pack(const ModelParams& params) {
  const ThetaLayout lay{params.dim()};
  const auto n = lay.n;
  PackedTheta theta{Vector(lay.size()), n};
  theta.values(ThetaLayout::nu()) = params.is_gaussian() ? 0.0 : params.dof();
  theta.values.segment(ThetaLayout::scale_begin(), lay.nvech()) = vech(params.scale());
  theta.values.segment(lay.mean_begin(), n) = params.mean();
  theta.values.segment(lay.ar_begin(), n * n) = vec(params.ar());
  theta.values.segment(lay.gain_begin(), n * n) = vec(params.gain());
  return theta;
}

ModelParams unpack(const Vector& values, Eigen::Index n, bool gaussian) {
  const ThetaLayout lay{n};
  if (n < 1 || values.size() != lay.size()) {
    throw InvalidInput("packed theta has length " + std::to_string(values.size()) +
                       ", expected " + std::to_string(lay.size()) + " for N = " +
                       std::to_string(n));
  }
  Matrix scale = unvech(values.segment(ThetaLayout::scale_begin(), lay.nvech()), n);
  Vector mean = values.segment(lay.mean_begin(), n);
  Matrix ar = Eigen::Map<const Matrix>(values.data() + lay.ar_begin(), n, n);
  Matrix gain = Eigen::Map<const Matrix>(values.data() + lay.gain_begin(), n, n);
  if (gaussian) {
    return ModelParams::gaussian(std::move(mean), std::move(scale), std::move(ar), std::move(gain));
  }
  return ModelParams(values(ThetaLayout::nu()), std::move(mean), std::move(scale), std::move(ar),
                     std::move(gain));
}

ModelParams unpack(const PackedTheta& theta, bool gaussian) {
  return unpack(theta.values, theta.n, gaussian);
}

AdmissibilityReport validate(const ModelParams& params) {
  AdmissibilityReport rep;
  rep.nu_positive = params.is_gaussian() || (std::isfinite(params.dof()) && params.dof() > 0.0);
  Eigen::LLT<Matrix> llt(params.scale());
  rep.scale_positive_definite = params.scale().allFinite() && llt.info() == Eigen::Success;
  if (params.ar().allFinite()) {
    rep.spectral_radius = spectral_radius(params.ar());
    rep.stationary = rep.spectral_radius < 1.0;
  } else {
    rep.spectral_radius = std::numeric_limits<double>::infinity();
  }
  rep.gain_determinant = params.gain().determinant();
  rep.gain_identified = std::isfinite(rep.gain_determinant) && rep.gain_determinant != 0.0;
  return rep;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw InvalidInput("expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidInput("ragged matrix in JSON");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

nlohmann::json to_json(const ModelParams& params) {
  nlohmann::json j;
  if (params.is_gaussian()) {
    j["nu"] = nullptr;
  } else {
    j["nu"] = params.dof();
  }
  j["omega"] = std::vector<double>(params.mean().data(), params.mean().data() + params.dim());
  j["Omega"] = matrix_to_json(params.scale());
  j["Phi"] = matrix_to_json(params.ar());
  j["K"] = matrix_to_json(params.gain());
  return j;
}

ModelParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("parameter JSON must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "nu" && key != "omega" && key != "Omega" && key != "Phi" && key != "K") {
      throw InvalidInput("unknown parameter key '" + key + "'");
    }
  }
  const auto& om = j.at("omega");
  Vector mean(static_cast<Eigen::Index>(om.size()));
  for (std::size_t i = 0; i < om.size(); ++i) mean(static_cast<Eigen::Index>(i)) = om.at(i).get<double>();
  Matrix scale = matrix_from_json(j.at("Omega"));
  Matrix ar = matrix_from_json(j.at("Phi"));
  Matrix gain = matrix_from_json(j.at("K"));
  if (!j.contains("nu") || j.at("nu").is_null()) {
    return ModelParams::gaussian(std::move(mean), std::move(scale), std::move(ar), std::move(gain));
  }
  return ModelParams(j.at("nu").get<double>(), std::move(mean), std::move(scale), std::move(ar),
                     std::move(gain));
}

}  // namespace dcs
