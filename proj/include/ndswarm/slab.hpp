#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ndswarm/view.hpp"

namespace ndswarm {

enum class SlabMode {
  // Normal [0,0,0,1] applied to viewed points.
  PostView,
  // Normal = last row of R applied to un-viewed spatial points; ignores translation.
  PreView,
};

std::string_view slab_mode_name(SlabMode mode);
std::optional<SlabMode> parse_slab_mode(std::string_view name);

inline constexpr double kDefaultSlabThreshold = 1.5;

struct SlabConfig {
  double threshold = kDefaultSlabThreshold;  // half-thickness, > 0
  SlabMode mode = SlabMode::PostView;

  friend bool operator==(const SlabConfig&, const SlabConfig&) = default;
};

// Throws std::invalid_argument unless threshold is finite and positive.
void check(const SlabConfig& cfg);

// Signed distance of every column to the viewing hyperplane.
Eigen::VectorXd slab_values(const Eigen::Ref<const Eigen::MatrixXd>& points, const SlabConfig& cfg,
                            const ViewState& vs);

// |n . p| < threshold, strictly.
std::vector<bool> slab_mask(const Eigen::Ref<const Eigen::MatrixXd>& points, const SlabConfig& cfg,
                            const ViewState& vs);

struct VisibleSet {
  Eigen::MatrixXd points;   // k x V
  Eigen::MatrixXd visuals;  // m x V
  std::vector<std::string> labels;   // empty when the input had no labels
  std::vector<Eigen::Index> source;  // original column of every kept point
};

// Keeps masked-in columns in their original order.
VisibleSet filter_visible(const Eigen::Ref<const Eigen::MatrixXd>& points,
                          const Eigen::Ref<const Eigen::MatrixXd>& visuals,
                          const std::vector<std::string>& labels, const std::vector<bool>& mask);

}  // namespace ndswarm
