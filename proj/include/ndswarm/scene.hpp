#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ndswarm/projection.hpp"
#include "ndswarm/slab.hpp"
#include "ndswarm/view.hpp"

namespace ndswarm {

inline constexpr double kDefaultCameraDistance = 4.0;

// Perspective along T: (x, y, z) * d / (d - t).
struct CameraConfig {
  double d = kDefaultCameraDistance;
  // Points with t >= d - near_epsilon are culled.
  double near_epsilon = 1e-3;

  friend bool operator==(const CameraConfig&, const CameraConfig&) = default;
};

void check(const CameraConfig& cam);

struct PerspectiveResult {
  Eigen::Matrix3Xd positions;
  Eigen::VectorXd depth;  // t of every kept point, unchanged
  Eigen::VectorXd scale;  // d / (d - t)
  std::vector<Eigen::Index> kept;  // input column of every kept point
  std::size_t culled = 0;
};

PerspectiveResult perspective_project(const Eigen::Ref<const Eigen::MatrixXd>& viewed,
                                      const CameraConfig& cam);

// Standardized visual values map to [0,1] through a +-c sigma window.
struct VisualCalibration {
  double sigma_range = 3.0;

  friend bool operator==(const VisualCalibration&, const VisualCalibration&) = default;
};

void check(const VisualCalibration& calib);

struct AvatarParams {
  std::array<double, kVisualFeatures> values{};

  static AvatarParams neutral();

  double operator[](VisualFeature f) const { return values[index_of(f)]; }
  double& operator[](VisualFeature f) { return values[index_of(f)]; }

  friend bool operator==(const AvatarParams&, const AvatarParams&) = default;
};

// u = clamp(0.5 + v / (2c), 0, 1) per feature.
AvatarParams avatar_params(const Eigen::Ref<const Eigen::VectorXd>& visual,
                           const VisualCalibration& calib = {});

struct FramePoint {
  std::int64_t index = 0;  // source column in the dataset
  std::array<double, 3> position{};
  double depth = 0.0;
  double scale = 1.0;  // perspective factor, also used as glyph size
  AvatarParams params;
  std::optional<std::string> label;

  friend bool operator==(const FramePoint&, const FramePoint&) = default;
};

struct SceneFrame {
  std::uint64_t seq = 0;
  std::uint64_t version = 0;  // session state version the frame was built from
  std::size_t n_total = 0;
  std::size_t culled = 0;  // inside the slab but behind the camera plane
  std::vector<FramePoint> points;

  std::size_t n_visible() const { return points.size(); }

  friend bool operator==(const SceneFrame&, const SceneFrame&) = default;
};

struct FrameSettings {
  SlabConfig slab;
  CameraConfig camera;
  VisualCalibration calibration;
};

// view -> slab -> perspective -> avatar parameters.
SceneFrame build_frame(const ProjectedData& projected, const ViewState& vs,
                       const FrameSettings& settings,
                       const std::optional<std::vector<std::string>>& labels = std::nullopt,
                       std::uint64_t seq = 0, std::uint64_t version = 0);

// Canonical JSON: fixed key order, numbers with 9 significant digits, no
// whitespace. Equal frames serialize to identical bytes.
std::string serialize_frame(const SceneFrame& frame);
SceneFrame parse_frame(std::string_view json);

}  // namespace ndswarm
