#include "ndswarm/gltf.hpp"

#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace ndswarm {

namespace {

constexpr int kArrayBuffer = 34962;
constexpr int kElementArrayBuffer = 34963;
constexpr int kFloat = 5126;
constexpr int kUnsignedInt = 5125;

void pad4(std::vector<std::uint8_t>& bin, std::uint8_t fill = 0) {
  while (bin.size() % 4) bin.push_back(fill);
}

template <class T>
std::size_t append(std::vector<std::uint8_t>& bin, const std::vector<T>& data) {
  pad4(bin);
  const std::size_t offset = bin.size();
  const auto bytes = data.size() * sizeof(T);
  bin.resize(offset + bytes);
  if (bytes) std::memcpy(bin.data() + offset, data.data(), bytes);
  return offset;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

}  // namespace

GltfDocument build_gltf(const SceneFrame& frame, const GltfOptions& options) {
  GltfDocument doc;
  auto& j = doc.json;
  j["asset"] = {{"version", "2.0"}, {"generator", "ndswarm"}};
  j["materials"] = nlohmann::json::array(
      {{{"name", "glyph"},
        {"pbrMetallicRoughness",
         {{"baseColorFactor", {1.0, 1.0, 1.0, 1.0}}, {"metallicFactor", 0.0}, {"roughnessFactor", 0.8}}}}});
  auto buffer_views = nlohmann::json::array();
  auto accessors = nlohmann::json::array();
  auto meshes = nlohmann::json::array();
  auto nodes = nlohmann::json::array();

  auto add_view = [&](std::size_t offset, std::size_t length, int target) {
    buffer_views.push_back({{"buffer", 0},
                            {"byteOffset", offset},
                            {"byteLength", length},
                            {"target", target}});
    return buffer_views.size() - 1;
  };

  std::map<std::array<double, kVisualFeatures>, std::size_t> mesh_of;
  for (const auto& point : frame.points) {
    auto it = mesh_of.find(point.params.values);
    if (it == mesh_of.end()) {
      const GlyphMesh mesh = generate_glyph_mesh(point.params, options.lod);
      std::vector<float> pos, col;
      std::array<float, 3> lo{std::numeric_limits<float>::max(), std::numeric_limits<float>::max(),
                              std::numeric_limits<float>::max()};
      std::array<float, 3> hi{std::numeric_limits<float>::lowest(), std::numeric_limits<float>::lowest(),
                              std::numeric_limits<float>::lowest()};
      for (std::size_t v = 0; v < mesh.positions.size(); ++v) {
        for (int a = 0; a < 3; ++a) {
          pos.push_back(mesh.positions[v][a]);
          col.push_back(mesh.colors[v][a]);
          lo[a] = std::min(lo[a], mesh.positions[v][a]);
          hi[a] = std::max(hi[a], mesh.positions[v][a]);
        }
      }
      std::vector<std::uint32_t> idx;
      for (const auto& t : mesh.triangles) idx.insert(idx.end(), t.begin(), t.end());

      const auto pos_view = add_view(append(doc.bin, pos), pos.size() * 4, kArrayBuffer);
      const auto col_view = add_view(append(doc.bin, col), col.size() * 4, kArrayBuffer);
      const auto idx_view = add_view(append(doc.bin, idx), idx.size() * 4, kElementArrayBuffer);

      accessors.push_back({{"bufferView", pos_view},
                           {"componentType", kFloat},
                           {"count", mesh.positions.size()},
                           {"type", "VEC3"},
                           {"min", lo},
                           {"max", hi}});
      accessors.push_back(
          {{"bufferView", col_view}, {"componentType", kFloat}, {"count", mesh.positions.size()}, {"type", "VEC3"}});
      accessors.push_back(
          {{"bufferView", idx_view}, {"componentType", kUnsignedInt}, {"count", idx.size()}, {"type", "SCALAR"}});
      const auto base = accessors.size() - 3;
      meshes.push_back({{"primitives",
                         {{{"attributes", {{"POSITION", base}, {"COLOR_0", base + 1}}},
                           {"indices", base + 2},
                           {"material", 0},
                           {"mode", 4}}}}});
      it = mesh_of.emplace(point.params.values, meshes.size() - 1).first;
    }
    const double s = options.glyph_size * point.scale;
    nlohmann::json node = {{"mesh", it->second},
                           {"translation", point.position},
                           {"scale", {s, s, s}},
                           {"name", point.label ? *point.label : "point " + std::to_string(point.index)}};
    nodes.push_back(std::move(node));
  }

  nlohmann::json scene = {{"name", "swarm"}};
  if (!nodes.empty()) {
    auto roots = nlohmann::json::array();
    for (std::size_t i = 0; i < nodes.size(); ++i) roots.push_back(i);
    scene["nodes"] = std::move(roots);
    j["nodes"] = std::move(nodes);
    j["meshes"] = std::move(meshes);
    j["accessors"] = std::move(accessors);
    j["bufferViews"] = std::move(buffer_views);
    pad4(doc.bin);
    j["buffers"] = nlohmann::json::array({{{"byteLength", doc.bin.size()}}});
  }
  j["scenes"] = nlohmann::json::array({scene});
  j["scene"] = 0;
  return doc;
}

std::vector<std::uint8_t> to_glb(const GltfDocument& doc) {
  std::string text = doc.json.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  while (text.size() % 4) text.push_back(' ');
  std::vector<std::uint8_t> bin = doc.bin;
  pad4(bin);

  std::vector<std::uint8_t> out;
  const auto total = 12 + 8 + text.size() + (bin.empty() ? 0 : 8 + bin.size());
  put_u32(out, 0x46546C67);  // "glTF"
  put_u32(out, 2);
  put_u32(out, static_cast<std::uint32_t>(total));
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  put_u32(out, 0x4E4F534A);  // "JSON"
  out.insert(out.end(), text.begin(), text.end());
  if (!bin.empty()) {
    put_u32(out, static_cast<std::uint32_t>(bin.size()));
    put_u32(out, 0x004E4942);  // "BIN\0"
    out.insert(out.end(), bin.begin(), bin.end());
  }
  return out;
}

void export_gltf(const SceneFrame& frame, const std::filesystem::path& path, const GltfOptions& options) {
  GltfDocument doc = build_gltf(frame, options);
  auto write = [](const std::filesystem::path& p, const void* data, std::size_t size) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
  };
  if (path.extension() == ".gltf") {
    auto bin_path = path;
    bin_path.replace_extension(".bin");
    if (doc.json.contains("buffers")) {
      doc.json["buffers"][0]["uri"] = bin_path.filename().string();
      write(bin_path, doc.bin.data(), doc.bin.size());
    }
    const std::string text = doc.json.dump(1, ' ', false, nlohmann::json::error_handler_t::replace);
    write(path, text.data(), text.size());
    return;
  }
  const auto glb = to_glb(doc);
  write(path, glb.data(), glb.size());
}

}  // namespace ndswarm
