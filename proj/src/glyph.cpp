#include "ndswarm/glyph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

namespace ndswarm {

namespace {

using Eigen::Vector3d;
constexpr double kPi = std::numbers::pi;

Vec3f to_f(const Vector3d& v) {
  return {static_cast<float>(v.x()), static_cast<float>(v.y()), static_cast<float>(v.z())};
}

Vector3d lerp(const Vector3d& a, const Vector3d& b, double t) { return a + (b - a) * t; }

class MeshBuilder {
 public:
  explicit MeshBuilder(GlyphMesh& mesh) : mesh_(mesh) {}

  void begin(std::string name) {
    MeshPart part;
    part.name = std::move(name);
    part.first_vertex = static_cast<std::uint32_t>(mesh_.positions.size());
    part.first_triangle = static_cast<std::uint32_t>(mesh_.triangles.size());
    mesh_.parts.push_back(std::move(part));
  }

  std::uint32_t vertex(const Vector3d& p, const Vector3d& color) {
    positions_.push_back(p);
    mesh_.colors.push_back(to_f(color));
    mesh_.positions.push_back({});
    return static_cast<std::uint32_t>(mesh_.positions.size() - 1 - mesh_.parts.back().first_vertex);
  }

  void triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    const auto base = mesh_.parts.back().first_vertex;
    mesh_.triangles.push_back({base + a, base + b, base + c});
  }

  void end() {
    auto& part = mesh_.parts.back();
    part.vertex_count = static_cast<std::uint32_t>(mesh_.positions.size()) - part.first_vertex;
    part.triangle_count = static_cast<std::uint32_t>(mesh_.triangles.size()) - part.first_triangle;
  }

  // Applies the vertical elongation and stores single-precision positions.
  void finish(double elongation) {
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      Vector3d p = positions_[i];
      p.y() *= elongation;
      mesh_.positions[i] = to_f(p);
    }
  }

 private:
  GlyphMesh& mesh_;
  std::vector<Vector3d> positions_;
};

// Frame for a surface of revolution or a swept tube: u x v = axis.
struct Frame {
  Vector3d origin;
  Vector3d axis;
  Vector3d u;
  Vector3d v;
};

Frame frame_around(const Vector3d& origin, const Vector3d& axis_in) {
  const Vector3d axis = axis_in.normalized();
  const Vector3d helper = std::abs(axis.x()) < 0.9 ? Vector3d::UnitX() : Vector3d::UnitY();
  const Vector3d u = (helper - axis * axis.dot(helper)).normalized();
  return {origin, axis, u, axis.cross(u)};
}

using ColorFn = std::function<Vector3d(const Vector3d& local)>;

// Revolves a (radius, height) profile whose first and last points lie on the
// axis, giving a closed genus-0 surface. The profile must run from the top
// (+axis) around the enclosed region in clockwise order so faces point out.
void revolve(MeshBuilder& mb, const std::vector<std::pair<double, double>>& profile, int segments,
             const Frame& f, const ColorFn& color) {
  const auto rings = static_cast<int>(profile.size()) - 2;
  auto place = [&](double r, double h, double phi) {
    const Vector3d local(r * std::cos(phi), r * std::sin(phi), h);
    return std::pair{f.origin + f.axis * h + (f.u * std::cos(phi) + f.v * std::sin(phi)) * r, local};
  };

  auto [top, top_local] = place(0.0, profile.front().second, 0.0);
  const auto pole_top = mb.vertex(top, color(top_local));
  std::vector<std::uint32_t> ring_start;
  for (int i = 1; i <= rings; ++i) {
    ring_start.push_back(pole_top + 1 + static_cast<std::uint32_t>((i - 1) * segments));
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * kPi * s / segments;
      auto [p, local] = place(profile[static_cast<std::size_t>(i)].first,
                              profile[static_cast<std::size_t>(i)].second, phi);
      mb.vertex(p, color(local));
    }
  }
  auto [bottom, bottom_local] = place(0.0, profile.back().second, 0.0);
  const auto pole_bottom = mb.vertex(bottom, color(bottom_local));

  auto at = [&](int ring, int s) {
    return ring_start[static_cast<std::size_t>(ring)] + static_cast<std::uint32_t>(s % segments);
  };
  for (int s = 0; s < segments; ++s) mb.triangle(pole_top, at(0, s), at(0, s + 1));
  for (int i = 0; i + 1 < rings; ++i) {
    for (int s = 0; s < segments; ++s) {
      const auto a = at(i, s), b = at(i, s + 1), c = at(i + 1, s + 1), d = at(i + 1, s);
      mb.triangle(a, c, b);
      mb.triangle(a, d, c);
    }
  }
  for (int s = 0; s < segments; ++s) mb.triangle(pole_bottom, at(rings - 1, s + 1), at(rings - 1, s));
}

// Closed tube of radius `radius` along `centers`, capped at both ends.
void sweep_tube(MeshBuilder& mb, const std::vector<Vector3d>& centers, double radius, int sides,
                const Vector3d& color) {
  const auto n = static_cast<int>(centers.size());
  const auto cap_start = mb.vertex(centers.front(), color);
  std::vector<std::uint32_t> ring_start;
  for (int i = 0; i < n; ++i) {
    const Vector3d prev = centers[static_cast<std::size_t>(std::max(i - 1, 0))];
    const Vector3d next = centers[static_cast<std::size_t>(std::min(i + 1, n - 1))];
    const Vector3d t = (next - prev).normalized();
    // n1 x n2 = -t, matching the revolve orientation with the axis reversed.
    const Vector3d n1 = t.cross(Vector3d::UnitZ()).normalized();
    const Vector3d n2 = n1.cross(t);
    ring_start.push_back(cap_start + 1 + static_cast<std::uint32_t>(i * sides));
    for (int s = 0; s < sides; ++s) {
      const double psi = 2.0 * kPi * s / sides;
      mb.vertex(centers[static_cast<std::size_t>(i)] + (n1 * std::cos(psi) + n2 * std::sin(psi)) * radius,
                color);
    }
  }
  const auto cap_end = mb.vertex(centers.back(), color);
  auto at = [&](int ring, int s) {
    return ring_start[static_cast<std::size_t>(ring)] + static_cast<std::uint32_t>(s % sides);
  };
  for (int s = 0; s < sides; ++s) mb.triangle(cap_start, at(0, s), at(0, s + 1));
  for (int i = 0; i + 1 < n; ++i) {
    for (int s = 0; s < sides; ++s) {
      const auto a = at(i, s), b = at(i, s + 1), c = at(i + 1, s + 1), d = at(i + 1, s);
      mb.triangle(a, c, b);
      mb.triangle(a, d, c);
    }
  }
  for (int s = 0; s < sides; ++s) mb.triangle(cap_end, at(n - 1, s + 1), at(n - 1, s));
}

std::vector<std::pair<double, double>> circle_profile(double radius, int steps) {
  std::vector<std::pair<double, double>> p;
  for (int i = 0; i <= steps; ++i) {
    const double theta = kPi * i / steps;
    p.emplace_back(i == 0 || i == steps ? 0.0 : radius * std::sin(theta), radius * std::cos(theta));
  }
  return p;
}

double front_z(double x, double y) { return std::sqrt(std::max(0.0, 1.0 - x * x - y * y)); }

}  // namespace

Vec3f skin_color(double u) {
  return to_f(lerp(Vector3d(0.98, 0.87, 0.76), Vector3d(0.42, 0.27, 0.18), std::clamp(u, 0.0, 1.0)));
}

Vec3f hair_color(double u) {
  // Hue ramp from red through green to violet so nearby groups stay distinct.
  const double h = 300.0 * std::clamp(u, 0.0, 1.0) / 60.0;
  const double s = 0.65, v = 0.75;
  const double c = v * s;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  Vector3d rgb;
  switch (static_cast<int>(h)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  return to_f(rgb + Vector3d::Constant(v - c));
}

Vec3f iris_color(double u) {
  u = std::clamp(u, 0.0, 1.0);
  const Vector3d blue(0.20, 0.40, 0.80), green(0.30, 0.60, 0.30), brown(0.45, 0.28, 0.12);
  return to_f(u < 0.5 ? lerp(blue, green, u * 2.0) : lerp(green, brown, (u - 0.5) * 2.0));
}

GlyphMesh generate_glyph_mesh(const AvatarParams& params, int lod) {
  for (double u : params.values) {
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("avatar parameters must lie in [0,1]");
  }
  if (lod < kLowestLod || lod > kHighestLod) throw std::invalid_argument("unsupported level of detail");

  const int k = 1 << lod;
  GlyphMesh mesh;
  mesh.lod = lod;
  MeshBuilder mb(mesh);

  auto v3 = [](const Vec3f& c) { return Vector3d(c[0], c[1], c[2]); };
  const Vector3d skin = v3(skin_color(params[VisualFeature::SkinColor]));
  const Vector3d hair = v3(hair_color(params[VisualFeature::HairColor]));
  const Vector3d iris = v3(iris_color(params[VisualFeature::IrisColor]));
  const Vector3d sclera(0.95, 0.95, 0.95);
  const Vector3d pupil(0.05, 0.05, 0.05);
  const Vector3d lips(0.65, 0.15, 0.20);

  mb.begin("head");
  revolve(mb, circle_profile(1.0, 8 * k), 12 * k, frame_around(Vector3d::Zero(), Vector3d::UnitY()),
          [&](const Vector3d&) { return skin; });
  mb.end();

  const double eye_x = 0.16 + 0.22 * params[VisualFeature::EyeSpacing];
  const double eye_y = 0.25;
  const double eye_r = 0.13;
  for (int side : {-1, 1}) {
    mb.begin(side < 0 ? "eye_left" : "eye_right");
    const Vector3d center(side * eye_x, eye_y, front_z(eye_x, eye_y) - 0.04);
    revolve(mb, circle_profile(eye_r, 4 * k), 8 * k, frame_around(center, Vector3d::UnitZ()),
            [&](const Vector3d& local) {
              const double facing = local.z() / eye_r;
              return facing > 0.9 ? pupil : facing > 0.6 ? iris : sclera;
            });
    mb.end();
  }

  mb.begin("nose");
  {
    const double length = 0.10 + 0.30 * params[VisualFeature::NoseLength];
    const Vector3d base(0.0, -0.02, front_z(0.0, -0.02) - 0.03);
    const std::vector<std::pair<double, double>> cone = {{0.0, length}, {0.10, 0.0}, {0.0, 0.0}};
    const Vector3d nose_color = skin * 0.92;
    revolve(mb, cone, 8 * k, frame_around(base, Vector3d::UnitZ()),
            [&](const Vector3d&) { return nose_color; });
  }
  mb.end();

  mb.begin("mouth");
  {
    const double half_width = 0.15 + 0.25 * params[VisualFeature::MouthWidth];
    // Positive curvature lifts the corners above the middle.
    const double curvature = params[VisualFeature::Smile] - params[VisualFeature::Frown];
    const int samples = 8 * k;
    std::vector<Vector3d> arc;
    for (int i = 0; i <= samples; ++i) {
      const double x = -half_width + 2.0 * half_width * i / samples;
      const double y = -0.45 + curvature * 0.12 * (x / half_width) * (x / half_width);
      arc.emplace_back(x, y, front_z(x, y) + 0.01);
    }
    sweep_tube(mb, arc, 0.035, 6 * k, lips);
  }
  mb.end();

  mb.begin("hair");
  {
    const double reach = 0.50 + 1.05 * params[VisualFeature::HairLength];
    const double outer = 1.07, inner = 0.97;
    const int steps = 4 * k;
    std::vector<std::pair<double, double>> shell = {{0.0, outer}};
    for (int i = 1; i <= steps; ++i) {
      const double t = reach * i / steps;
      shell.emplace_back(outer * std::sin(t), outer * std::cos(t));
    }
    for (int i = steps; i >= 1; --i) {
      const double t = reach * i / steps;
      shell.emplace_back(inner * std::sin(t), inner * std::cos(t));
    }
    shell.emplace_back(0.0, inner);
    // Tilted back so longer hair grows down the back of the head.
    const double tilt = 30.0 * kPi / 180.0;
    revolve(mb, shell, 12 * k,
            frame_around(Vector3d::Zero(), Vector3d(0.0, std::cos(tilt), -std::sin(tilt))),
            [&](const Vector3d&) { return hair; });
  }
  mb.end();

  const double elongation =
      kElongationMin + (kElongationMax - kElongationMin) * params[VisualFeature::FaceElongation];
  mb.finish(elongation);
  return mesh;
}

std::string serialize_mesh(const GlyphMesh& mesh) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "glyph lod %d vertices %zu triangles %zu\n", mesh.lod,
                mesh.positions.size(), mesh.triangles.size());
  out += buf;
  for (const auto& p : mesh.parts) {
    std::snprintf(buf, sizeof buf, "part %s %u %u %u %u\n", p.name.c_str(), p.first_vertex,
                  p.vertex_count, p.first_triangle, p.triangle_count);
    out += buf;
  }
  for (std::size_t i = 0; i < mesh.positions.size(); ++i) {
    const auto& p = mesh.positions[i];
    const auto& c = mesh.colors[i];
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g %.9g %.9g %.9g\n", static_cast<double>(p[0]),
                  static_cast<double>(p[1]), static_cast<double>(p[2]), static_cast<double>(c[0]),
                  static_cast<double>(c[1]), static_cast<double>(c[2]));
    out += buf;
  }
  for (const auto& t : mesh.triangles) {
    std::snprintf(buf, sizeof buf, "f %u %u %u\n", t[0], t[1], t[2]);
    out += buf;
  }
  return out;
}

}  // namespace ndswarm
