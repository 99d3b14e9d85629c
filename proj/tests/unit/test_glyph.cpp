#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ndswarm/glyph.hpp"
#include "oracles.hpp"

using namespace ndswarm;

namespace {

const std::string kGolden = std::string(NDSWARM_SOURCE_DIR) + "/tests/fixtures/neutral_head.txt";

double height(const GlyphMesh& m) {
  float lo = m.positions[0][1], hi = lo;
  for (const auto& p : m.positions) {
    lo = std::min(lo, p[1]);
    hi = std::max(hi, p[1]);
  }
  return static_cast<double>(hi) - lo;
}

const MeshPart& part(const GlyphMesh& m, const std::string& name) {
  for (const auto& p : m.parts)
    if (p.name == name) return p;
  throw std::runtime_error("no part " + name);
}

// Mean y of mouth vertices near the middle minus mean y near the corners.
double mouth_sag(const GlyphMesh& m) {
  const auto& mouth = part(m, "mouth");
  double xmax = 0.0;
  for (std::uint32_t v = mouth.first_vertex; v < mouth.first_vertex + mouth.vertex_count; ++v) {
    xmax = std::max(xmax, std::abs(static_cast<double>(m.positions[v][0])));
  }
  double mid = 0.0, ends = 0.0;
  int nm = 0, ne = 0;
  for (std::uint32_t v = mouth.first_vertex; v < mouth.first_vertex + mouth.vertex_count; ++v) {
    const double x = std::abs(static_cast<double>(m.positions[v][0]));
    const double y = m.positions[v][1];
    if (x < 0.1 * xmax) mid += y, ++nm;
    if (x > 0.8 * xmax) ends += y, ++ne;
  }
  return mid / nm - ends / ne;
}

AvatarParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AvatarParams p;
  for (auto& v : p.values) v = u(rng);
  return p;
}

}  // namespace

TEST(Glyph, NeutralHeadMatchesGolden) {
  const auto text = serialize_mesh(generate_glyph_mesh(AvatarParams::neutral()));
  if (std::getenv("NDSWARM_UPDATE_GOLDEN")) {
    std::ofstream(kGolden) << text;
    GTEST_SKIP() << "golden fixture rewritten";
  }
  std::ifstream in(kGolden);
  ASSERT_TRUE(in) << "missing " << kGolden;
  std::stringstream golden;
  golden << in.rdbuf();
  EXPECT_EQ(text, golden.str());
}

TEST(Glyph, PartsAreWatertightAndOutward) {
  std::mt19937_64 rng(51);
  std::vector<AvatarParams> cases = {AvatarParams::neutral(), AvatarParams{}, random_params(rng)};
  cases[1].values.fill(0.0);
  AvatarParams ones;
  ones.values.fill(1.0);
  cases.push_back(ones);
  for (int i = 0; i < 20; ++i) cases.push_back(random_params(rng));
  for (int lod = kLowestLod; lod <= kHighestLod; ++lod) {
    for (const auto& params : cases) {
      const auto mesh = generate_glyph_mesh(params, lod);
      ASSERT_EQ(mesh.parts.size(), 6u);
      ASSERT_EQ(mesh.colors.size(), mesh.positions.size());
      for (const auto& p : mesh.parts) {
        EXPECT_EQ(oracle::watertight_defect(mesh.triangles, p.first_triangle, p.triangle_count), "")
            << p.name << " lod " << lod;
        EXPECT_GT(oracle::signed_volume(mesh, p.first_triangle, p.triangle_count), 0.0) << p.name;
        for (std::uint32_t t = p.first_triangle; t < p.first_triangle + p.triangle_count; ++t) {
          for (auto v : mesh.triangles[t]) {
            ASSERT_GE(v, p.first_vertex);
            ASSERT_LT(v, p.first_vertex + p.vertex_count);
          }
        }
      }
      for (const auto& c : mesh.colors)
        for (float ch : c) {
          EXPECT_GE(ch, 0.0f);
          EXPECT_LE(ch, 1.0f);
        }
    }
  }
}

TEST(Glyph, LowestLodIsSmall) {
  const auto mesh = generate_glyph_mesh(AvatarParams::neutral(), kLowestLod);
  EXPECT_LE(mesh.positions.size(), 500u);
  EXPECT_GT(generate_glyph_mesh(AvatarParams::neutral(), kHighestLod).positions.size(), mesh.positions.size());
}

TEST(Glyph, ElongationStretchesHeight) {
  AvatarParams tall = AvatarParams::neutral(), short_ = AvatarParams::neutral();
  tall[VisualFeature::FaceElongation] = 1.0;
  short_[VisualFeature::FaceElongation] = 0.0;
  const double ratio = height(generate_glyph_mesh(tall)) / height(generate_glyph_mesh(short_));
  EXPECT_NEAR(ratio, kElongationMax / kElongationMin, 1e-5);
}

TEST(Glyph, SmileAndFrown) {
  AvatarParams smile = AvatarParams::neutral();
  smile[VisualFeature::Smile] = 1.0;
  smile[VisualFeature::Frown] = 0.0;
  EXPECT_LT(mouth_sag(generate_glyph_mesh(smile)), -0.05);
  AvatarParams frown = smile;
  frown[VisualFeature::Smile] = 0.0;
  frown[VisualFeature::Frown] = 1.0;
  EXPECT_GT(mouth_sag(generate_glyph_mesh(frown)), 0.05);
}

TEST(Glyph, FeaturesChangeGeometryOrColor) {
  const auto base = generate_glyph_mesh(AvatarParams::neutral());
  for (std::size_t f = 0; f < kVisualFeatures; ++f) {
    AvatarParams p = AvatarParams::neutral();
    p.values[f] = 1.0;
    const auto m = generate_glyph_mesh(p);
    EXPECT_TRUE(m.positions != base.positions || m.colors != base.colors)
        << feature_name(static_cast<VisualFeature>(f));
  }
}

TEST(Glyph, Colors) {
  EXPECT_NE(skin_color(0.0), skin_color(1.0));
  EXPECT_NE(hair_color(0.0), hair_color(1.0));
  EXPECT_NE(iris_color(0.0), iris_color(1.0));
  EXPECT_EQ(iris_color(-3.0), iris_color(0.0));
}

TEST(Glyph, RejectsBadInput) {
  AvatarParams p = AvatarParams::neutral();
  p.values[2] = 1.5;
  EXPECT_THROW(generate_glyph_mesh(p), std::invalid_argument);
  EXPECT_THROW(generate_glyph_mesh(AvatarParams::neutral(), 3), std::invalid_argument);
  EXPECT_THROW(generate_glyph_mesh(AvatarParams::neutral(), -1), std::invalid_argument);
}
