#include "ndswarm/slab.hpp"

#include <cmath>
#include <stdexcept>

namespace ndswarm {

std::string_view slab_mode_name(SlabMode mode) {
  return mode == SlabMode::PostView ? "post_view" : "pre_view";
}

std::optional<SlabMode> parse_slab_mode(std::string_view name) {
  if (name == "post_view" || name == "post" || name == "PostView") return SlabMode::PostView;
  if (name == "pre_view" || name == "pre" || name == "PreView") return SlabMode::PreView;
  return std::nullopt;
}

void check(const SlabConfig& cfg) {
  if (!std::isfinite(cfg.threshold) || cfg.threshold <= 0.0) {
    throw std::invalid_argument("threshold must be positive");
  }
}

Eigen::VectorXd slab_values(const Eigen::Ref<const Eigen::MatrixXd>& points, const SlabConfig& cfg,
                            const ViewState& vs) {
  if (points.rows() != static_cast<Eigen::Index>(kSpatialAxes)) {
    throw ProjectionError("slab expects " + std::to_string(kSpatialAxes) + " spatial rows");
  }
  if (cfg.mode == SlabMode::PostView) return points.row(kSpatialAxes - 1).transpose();
  const Eigen::RowVector4d normal = vs.rotation().row(kSpatialAxes - 1);
  return (normal * points).transpose();
}

std::vector<bool> slab_mask(const Eigen::Ref<const Eigen::MatrixXd>& points, const SlabConfig& cfg,
                            const ViewState& vs) {
  check(cfg);
  const Eigen::VectorXd values = slab_values(points, cfg, vs);
  std::vector<bool> mask(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    mask[static_cast<std::size_t>(i)] = std::abs(values(i)) < cfg.threshold;
  }
  return mask;
}

VisibleSet filter_visible(const Eigen::Ref<const Eigen::MatrixXd>& points,
                          const Eigen::Ref<const Eigen::MatrixXd>& visuals,
                          const std::vector<std::string>& labels, const std::vector<bool>& mask) {
  const auto N = static_cast<std::size_t>(points.cols());
  if (mask.size() != N || static_cast<std::size_t>(visuals.cols()) != N ||
      (!labels.empty() && labels.size() != N)) {
    throw ProjectionError("filter_visible: mask, points, visuals and labels must have equal length");
  }
  VisibleSet out;
  for (std::size_t i = 0; i < N; ++i) {
    if (mask[i]) out.source.push_back(static_cast<Eigen::Index>(i));
  }
  const auto V = static_cast<Eigen::Index>(out.source.size());
  out.points.resize(points.rows(), V);
  out.visuals.resize(visuals.rows(), V);
  for (Eigen::Index c = 0; c < V; ++c) {
    const auto src = out.source[static_cast<std::size_t>(c)];
    out.points.col(c) = points.col(src);
    out.visuals.col(c) = visuals.col(src);
    if (!labels.empty()) out.labels.push_back(labels[static_cast<std::size_t>(src)]);
  }
  return out;
}

}  // namespace ndswarm
