#include "ndswarm/view.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace ndswarm {

namespace {

constexpr std::array<std::string_view, 6> kPlaneNames = {"XY", "XZ", "XT", "YZ", "YT", "ZT"};

void require_rows(const Eigen::Ref<const Eigen::MatrixXd>& spatial) {
  if (spatial.rows() != static_cast<Eigen::Index>(kSpatialAxes)) {
    throw ProjectionError("view expects " + std::to_string(kSpatialAxes) + " spatial rows, got " +
                          std::to_string(spatial.rows()));
  }
}

}  // namespace

std::pair<SpatialAxis, SpatialAxis> plane_axes(RotationPlane plane) {
  switch (plane) {
    case RotationPlane::XY: return {SpatialAxis::X, SpatialAxis::Y};
    case RotationPlane::XZ: return {SpatialAxis::X, SpatialAxis::Z};
    case RotationPlane::XT: return {SpatialAxis::X, SpatialAxis::T};
    case RotationPlane::YZ: return {SpatialAxis::Y, SpatialAxis::Z};
    case RotationPlane::YT: return {SpatialAxis::Y, SpatialAxis::T};
    case RotationPlane::ZT: return {SpatialAxis::Z, SpatialAxis::T};
  }
  throw std::invalid_argument("bad rotation plane");
}

std::string_view plane_name(RotationPlane plane) {
  return kPlaneNames[static_cast<std::size_t>(plane)];
}

std::optional<RotationPlane> parse_plane(std::string_view name) {
  for (std::size_t i = 0; i < kPlaneNames.size(); ++i) {
    if (kPlaneNames[i] == name) return static_cast<RotationPlane>(i);
  }
  return std::nullopt;
}

Rotation4 plane_rotation(RotationPlane plane, double radians) {
  const auto [a, b] = plane_axes(plane);
  const auto i = static_cast<Eigen::Index>(index_of(a));
  const auto j = static_cast<Eigen::Index>(index_of(b));
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  Rotation4 r = Rotation4::Identity();
  r(i, i) = c;
  r(j, j) = c;
  r(i, j) = -s;
  r(j, i) = s;
  return r;
}

ViewState::ViewState(const Rotation4& rotation, const Vector4& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation_.allFinite() || !translation_.allFinite()) {
    throw std::invalid_argument("view state must be finite");
  }
  if (orthonormality_error(rotation_) > 1e-9 || std::abs(rotation_.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("view rotation is not in SO(4)");
  }
}

Homogeneous5 ViewState::homogeneous() const {
  Homogeneous5 v = Homogeneous5::Identity();
  v.topLeftCorner<4, 4>() = rotation_;
  v.topRightCorner<4, 1>() = translation_;
  return v;
}

double orthonormality_error(const Rotation4& r) {
  return (r.transpose() * r - Rotation4::Identity()).cwiseAbs().maxCoeff();
}

Rotation4 reorthonormalize(const Rotation4& r) {
  Eigen::JacobiSVD<Rotation4> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Rotation4 q = svd.matrixU() * svd.matrixV().transpose();
  if (q.determinant() < 0.0) {
    Rotation4 u = svd.matrixU();
    u.col(3) = -u.col(3);
    q = u * svd.matrixV().transpose();
  }
  return q;
}

ViewState rotate(const ViewState& vs, RotationPlane plane, double radians) {
  Rotation4 r = plane_rotation(plane, radians) * vs.rotation();
  if (orthonormality_error(r) > kOrthonormalDrift) r = reorthonormalize(r);
  return ViewState(r, vs.translation());
}

ViewState translate(const ViewState& vs, const Vector4& delta) {
  return ViewState(vs.rotation(), vs.translation() + delta);
}

SpatialMatrix apply_view(const ViewState& vs, const Eigen::Ref<const Eigen::MatrixXd>& spatial) {
  require_rows(spatial);
  SpatialMatrix out = vs.rotation() * spatial;
  out.colwise() += vs.translation();
  return out;
}

SpatialMatrix apply_view_homogeneous(const ViewState& vs,
                                     const Eigen::Ref<const Eigen::MatrixXd>& spatial) {
  require_rows(spatial);
  Eigen::Matrix<double, 5, Eigen::Dynamic> hom(5, spatial.cols());
  hom.topRows<4>() = spatial;
  hom.row(4).setOnes();
  const Eigen::Matrix<double, 5, Eigen::Dynamic> viewed = vs.homogeneous() * hom;
  return viewed.topRows<4>();
}

nlohmann::json view_to_json(const ViewState& vs) {
  nlohmann::json rotation = nlohmann::json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) rotation.push_back(vs.rotation()(r, c));
  }
  nlohmann::json translation = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) translation.push_back(vs.translation()(i));
  return {{"rotation", rotation}, {"translation", translation}};
}

ViewState view_from_json(const nlohmann::json& j) {
  const auto& rot = j.at("rotation");
  const auto& tr = j.at("translation");
  if (!rot.is_array() || rot.size() != 16 || !tr.is_array() || tr.size() != 4) {
    throw std::invalid_argument("view JSON needs 16 rotation and 4 translation numbers");
  }
  Rotation4 r;
  Vector4 t;
  for (int i = 0; i < 16; ++i) r(i / 4, i % 4) = rot.at(static_cast<std::size_t>(i)).get<double>();
  for (int i = 0; i < 4; ++i) t(i) = tr.at(static_cast<std::size_t>(i)).get<double>();
  return ViewState(r, t);
}

}  // namespace ndswarm
