#pragma once

#include <array>
#include <optional>
#include <string_view>

#include <Eigen/Core>
#include <json.hpp>

#include "ndswarm/projection.hpp"

namespace ndswarm {

using Rotation4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;
using Homogeneous5 = Eigen::Matrix<double, 5, 5>;

// The six coordinate planes of 4D space, first axis index < second.
enum class RotationPlane : std::uint8_t { XY, XZ, XT, YZ, YT, ZT };

inline constexpr std::array kRotationPlanes = {RotationPlane::XY, RotationPlane::XZ,
                                               RotationPlane::XT, RotationPlane::YZ,
                                               RotationPlane::YT, RotationPlane::ZT};

std::pair<SpatialAxis, SpatialAxis> plane_axes(RotationPlane plane);
std::string_view plane_name(RotationPlane plane);
std::optional<RotationPlane> parse_plane(std::string_view name);

// Identity except (i,i)=(j,j)=cos, (i,j)=-sin, (j,i)=sin for plane axes i<j.
// Positive angles turn axis i toward axis j.
Rotation4 plane_rotation(RotationPlane plane, double radians);

// Rotations drift out of SO(4) after this much deviation of R^T R from I
// trigger re-orthonormalization.
inline constexpr double kOrthonormalDrift = 1e-10;

class ViewState {
 public:
  ViewState() = default;
  // Throws std::invalid_argument unless R is a rotation within 1e-9.
  ViewState(const Rotation4& rotation, const Vector4& translation);

  const Rotation4& rotation() const { return rotation_; }
  const Vector4& translation() const { return translation_; }

  // [R t; 0 0 0 0 1]
  Homogeneous5 homogeneous() const;

  friend bool operator==(const ViewState& a, const ViewState& b) {
    return a.rotation_ == b.rotation_ && a.translation_ == b.translation_;
  }

 private:
  Rotation4 rotation_ = Rotation4::Identity();
  Vector4 translation_ = Vector4::Zero();
};

// Max-abs deviation of R^T R from the identity.
double orthonormality_error(const Rotation4& r);

// Nearest rotation in the Frobenius sense (polar factor via SVD).
Rotation4 reorthonormalize(const Rotation4& r);

// R' = plane_rotation(plane, radians) * R, applied in the observer's frame.
ViewState rotate(const ViewState& vs, RotationPlane plane, double radians);
ViewState translate(const ViewState& vs, const Vector4& delta);

// R * X + t per column.
SpatialMatrix apply_view(const ViewState& vs, const Eigen::Ref<const Eigen::MatrixXd>& spatial);
// V * [X; 1], ones row dropped afterwards. Same result as apply_view.
SpatialMatrix apply_view_homogeneous(const ViewState& vs,
                                     const Eigen::Ref<const Eigen::MatrixXd>& spatial);

nlohmann::json view_to_json(const ViewState& vs);
ViewState view_from_json(const nlohmann::json& j);

}  // namespace ndswarm
