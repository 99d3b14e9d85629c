#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndswarm/glyph.hpp"
#include "ndswarm/scene.hpp"

namespace ndswarm {

struct GltfOptions {
  int lod = kLowestLod;
  // World-space glyph radius at perspective scale 1.
  double glyph_size = 0.08;
};

// glTF 2.0 document plus its single binary buffer. Identical parameter
// vectors share one mesh; every visible point becomes one node.
struct GltfDocument {
  nlohmann::json json;
  std::vector<std::uint8_t> bin;
};

GltfDocument build_gltf(const SceneFrame& frame, const GltfOptions& options = {});

// Binary container (.glb).
std::vector<std::uint8_t> to_glb(const GltfDocument& doc);

// Writes .glb, or .gltf plus a sibling .bin, depending on the extension.
void export_gltf(const SceneFrame& frame, const std::filesystem::path& path,
                 const GltfOptions& options = {});

}  // namespace ndswarm
