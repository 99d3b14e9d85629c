#include "ndswarm/scene.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace ndswarm {

void check(const CameraConfig& cam) {
  if (!std::isfinite(cam.d) || cam.d <= 0.0) throw std::invalid_argument("camera distance must be positive");
  if (!std::isfinite(cam.near_epsilon) || cam.near_epsilon <= 0.0) {
    throw std::invalid_argument("near_epsilon must be positive");
  }
}

void check(const VisualCalibration& calib) {
  if (!std::isfinite(calib.sigma_range) || calib.sigma_range <= 0.0) {
    throw std::invalid_argument("sigma range must be positive");
  }
}

PerspectiveResult perspective_project(const Eigen::Ref<const Eigen::MatrixXd>& viewed,
                                      const CameraConfig& cam) {
  check(cam);
  if (viewed.rows() != static_cast<Eigen::Index>(kSpatialAxes)) {
    throw ProjectionError("perspective projection expects 4 rows");
  }
  PerspectiveResult out;
  const double limit = cam.d - cam.near_epsilon;
  for (Eigen::Index c = 0; c < viewed.cols(); ++c) {
    if (viewed(3, c) < limit) {
      out.kept.push_back(c);
    } else {
      ++out.culled;
    }
  }
  const auto V = static_cast<Eigen::Index>(out.kept.size());
  out.positions.resize(3, V);
  out.depth.resize(V);
  out.scale.resize(V);
  for (Eigen::Index i = 0; i < V; ++i) {
    const auto src = out.kept[static_cast<std::size_t>(i)];
    const double t = viewed(3, src);
    const double s = cam.d / (cam.d - t);
    out.positions.col(i) = viewed.col(src).head<3>() * s;
    out.depth(i) = t;
    out.scale(i) = s;
  }
  return out;
}

AvatarParams AvatarParams::neutral() {
  AvatarParams p;
  p.values.fill(0.5);
  return p;
}

AvatarParams avatar_params(const Eigen::Ref<const Eigen::VectorXd>& visual,
                           const VisualCalibration& calib) {
  check(calib);
  if (visual.size() != static_cast<Eigen::Index>(kVisualFeatures)) {
    throw ProjectionError("avatar parameters need " + std::to_string(kVisualFeatures) + " values");
  }
  AvatarParams p;
  for (std::size_t f = 0; f < kVisualFeatures; ++f) {
    const double v = visual(static_cast<Eigen::Index>(f));
    p.values[f] = std::clamp(0.5 + v / (2.0 * calib.sigma_range), 0.0, 1.0);
  }
  return p;
}

SceneFrame build_frame(const ProjectedData& projected, const ViewState& vs,
                       const FrameSettings& settings,
                       const std::optional<std::vector<std::string>>& labels, std::uint64_t seq,
                       std::uint64_t version) {
  check(settings.slab);
  check(settings.camera);
  check(settings.calibration);
  const Eigen::Index N = projected.spatial.cols();
  if (projected.visual.cols() != N) throw ProjectionError("spatial and visual point counts differ");
  if (labels && static_cast<Eigen::Index>(labels->size()) != N) {
    throw ProjectionError("label count does not match point count");
  }

  const SpatialMatrix viewed = apply_view(vs, projected.spatial);
  const auto& slab_input =
      settings.slab.mode == SlabMode::PostView ? viewed : projected.spatial;
  const auto mask = slab_mask(slab_input, settings.slab, vs);
  static const std::vector<std::string> kNoLabels;
  const VisibleSet visible =
      filter_visible(viewed, projected.visual, labels ? *labels : kNoLabels, mask);
  const PerspectiveResult persp = perspective_project(visible.points, settings.camera);

  SceneFrame frame;
  frame.seq = seq;
  frame.version = version;
  frame.n_total = static_cast<std::size_t>(N);
  frame.culled = persp.culled;
  frame.points.reserve(persp.kept.size());
  for (std::size_t i = 0; i < persp.kept.size(); ++i) {
    const auto col = persp.kept[i];
    const auto idx = static_cast<Eigen::Index>(i);
    FramePoint fp;
    fp.index = visible.source[static_cast<std::size_t>(col)];
    fp.position = {persp.positions(0, idx), persp.positions(1, idx), persp.positions(2, idx)};
    fp.depth = persp.depth(idx);
    fp.scale = persp.scale(idx);
    fp.params = avatar_params(visible.visuals.col(col), settings.calibration);
    for (std::size_t r : projected.degenerate_rows) {
      if (r >= kSpatialAxes) fp.params.values[r - kSpatialAxes] = 0.5;
    }
    if (labels) fp.label = visible.labels[static_cast<std::size_t>(col)];
    frame.points.push_back(std::move(fp));
  }
  return frame;
}

namespace {

void put_number(std::string& out, double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.9g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

void put_uint(std::string& out, std::uint64_t v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%" PRIu64, v);
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::string serialize_frame(const SceneFrame& frame) {
  std::string out;
  out.reserve(64 + frame.points.size() * 160);
  out += "{\"seq\":";
  put_uint(out, frame.seq);
  out += ",\"version\":";
  put_uint(out, frame.version);
  out += ",\"n_total\":";
  put_uint(out, frame.n_total);
  out += ",\"n_visible\":";
  put_uint(out, frame.n_visible());
  out += ",\"culled\":";
  put_uint(out, frame.culled);
  out += ",\"points\":[";
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    const auto& p = frame.points[i];
    if (i) out += ',';
    out += "{\"i\":";
    put_uint(out, static_cast<std::uint64_t>(p.index));
    out += ",\"pos\":[";
    for (std::size_t a = 0; a < 3; ++a) {
      if (a) out += ',';
      put_number(out, p.position[a]);
    }
    out += "],\"depth\":";
    put_number(out, p.depth);
    out += ",\"scale\":";
    put_number(out, p.scale);
    out += ",\"params\":[";
    for (std::size_t f = 0; f < kVisualFeatures; ++f) {
      if (f) out += ',';
      put_number(out, p.params.values[f]);
    }
    out += "],\"label\":";
    out += p.label ? nlohmann::json(*p.label).dump(-1, ' ', false,
                                                  nlohmann::json::error_handler_t::replace)
                   : "null";
    out += '}';
  }
  out += "]}";
  return out;
}

SceneFrame parse_frame(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  SceneFrame frame;
  frame.seq = j.at("seq").get<std::uint64_t>();
  frame.version = j.value("version", std::uint64_t{0});
  frame.n_total = j.at("n_total").get<std::size_t>();
  frame.culled = j.value("culled", std::size_t{0});
  for (const auto& jp : j.at("points")) {
    FramePoint p;
    p.index = jp.at("i").get<std::int64_t>();
    const auto& pos = jp.at("pos");
    for (std::size_t a = 0; a < 3; ++a) p.position[a] = pos.at(a).get<double>();
    p.depth = jp.at("depth").get<double>();
    p.scale = jp.value("scale", 1.0);
    const auto& params = jp.at("params");
    if (params.size() != kVisualFeatures) throw std::invalid_argument("frame point needs 10 params");
    for (std::size_t f = 0; f < kVisualFeatures; ++f) {
      const double u = params.at(f).get<double>();
      if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("frame param outside [0,1]");
      p.params.values[f] = u;
    }
    if (jp.contains("label") && !jp["label"].is_null()) p.label = jp["label"].get<std::string>();
    frame.points.push_back(std::move(p));
  }
  if (j.at("n_visible").get<std::size_t>() != frame.points.size()) {
    throw std::invalid_argument("n_visible does not match the point list");
  }
  return frame;
}

}  // namespace ndswarm
