#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ndswarm/scene.hpp"

namespace ndswarm {

// Vertical scale of the whole glyph at Face_Elong = 0 and 1.
inline constexpr double kElongationMin = 0.8;
inline constexpr double kElongationMax = 1.4;

inline constexpr int kLowestLod = 0;
inline constexpr int kHighestLod = 2;

using Vec3f = std::array<float, 3>;

// A closed surface inside the mesh; every part is watertight on its own.
struct MeshPart {
  std::string name;
  std::uint32_t first_vertex = 0;
  std::uint32_t vertex_count = 0;
  std::uint32_t first_triangle = 0;
  std::uint32_t triangle_count = 0;
};

// Unit-radius head centered at the origin, +y up, face looking along +z.
struct GlyphMesh {
  std::vector<Vec3f> positions;
  std::vector<Vec3f> colors;  // linear RGB per vertex
  std::vector<std::array<std::uint32_t, 3>> triangles;  // counter-clockwise from outside
  std::vector<MeshPart> parts;
  int lod = kLowestLod;
};

// Parts: head, eye_left, eye_right, nose, mouth, hair. Every coordinate is
// finally scaled along y by the Face_Elong factor.
GlyphMesh generate_glyph_mesh(const AvatarParams& params, int lod = kLowestLod);

Vec3f skin_color(double u);
Vec3f hair_color(double u);
Vec3f iris_color(double u);

// Stable text form used for golden fixtures.
std::string serialize_mesh(const GlyphMesh& mesh);

}  // namespace ndswarm
