#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <Eigen/LU>

#include "ndswarm/view.hpp"
#include "oracles.hpp"

using namespace ndswarm;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(PlaneRotation, XyQuarterTurn) {
  const Rotation4 r = plane_rotation(RotationPlane::XY, kPi / 2);
  const Vector4 x = r * Vector4(1, 0, 0, 0);
  EXPECT_LT(max_abs(x - Vector4(0, 1, 0, 0)), 1e-15);
  const Vector4 y = r * Vector4(0, 1, 0, 0);
  EXPECT_LT(max_abs(y - Vector4(-1, 0, 0, 0)), 1e-15);
}

TEST(PlaneRotation, ZtLeavesXyAlone) {
  const Rotation4 r = plane_rotation(RotationPlane::ZT, 0.7);
  const Vector4 p(3, -2, 0, 0);
  EXPECT_EQ(r * p, p);
  EXPECT_NEAR(r(3, 2), std::sin(0.7), 1e-15);
  EXPECT_NEAR(r(2, 3), -std::sin(0.7), 1e-15);
}

TEST(PlaneRotation, EveryPlaneIsARotation) {
  for (auto plane : kRotationPlanes) {
    for (double a : {-3.0, -0.1, 0.0, 0.5, 2.0, 10.0}) {
      const Rotation4 r = plane_rotation(plane, a);
      EXPECT_LT(orthonormality_error(r), 1e-15);
      EXPECT_NEAR(r.determinant(), 1.0, 1e-15);
      EXPECT_LT(max_abs(plane_rotation(plane, -a) * r - Rotation4::Identity()), 1e-12);
    }
    EXPECT_EQ(parse_plane(plane_name(plane)), plane);
  }
  EXPECT_FALSE(parse_plane("XW"));
}

TEST(Compose, TwoEighthsEqualAQuarter) {
  ViewState vs;
  vs = rotate(vs, RotationPlane::XY, kPi / 4);
  vs = rotate(vs, RotationPlane::XY, kPi / 4);
  EXPECT_LT(max_abs(vs.rotation() - plane_rotation(RotationPlane::XY, kPi / 2)), 1e-12);
}

TEST(Compose, AppliesInObserverFrame) {
  const ViewState vs = rotate(rotate(ViewState{}, RotationPlane::XY, 0.3), RotationPlane::ZT, 1.1);
  const Rotation4 expected = plane_rotation(RotationPlane::ZT, 1.1) * plane_rotation(RotationPlane::XY, 0.3);
  EXPECT_LT(max_abs(vs.rotation() - expected), 1e-15);
}

TEST(Compose, RandomChainsStayInSo4) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> plane(0, 5);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  ViewState vs;
  for (int step = 0; step < 10000; ++step) {
    vs = rotate(vs, kRotationPlanes[static_cast<std::size_t>(plane(rng))], angle(rng));
    if (step % 500 == 0) {
      EXPECT_LT(orthonormality_error(vs.rotation()), 1e-9);
      EXPECT_NEAR(vs.rotation().determinant(), 1.0, 1e-9);
    }
  }
  EXPECT_LT(max_abs(vs.rotation().transpose() * vs.rotation() - Rotation4::Identity()), 1e-9);
  EXPECT_LT(max_abs(vs.rotation().inverse() - vs.rotation().transpose()), 1e-12);
}

TEST(Reorthonormalize, RepairsDrift) {
  Rotation4 r = plane_rotation(RotationPlane::XT, 0.4) * plane_rotation(RotationPlane::YZ, 1.3);
  r(0, 1) += 1e-6;
  r(2, 3) -= 2e-6;
  const Rotation4 q = reorthonormalize(r);
  EXPECT_LT(orthonormality_error(q), 1e-14);
  EXPECT_NEAR(q.determinant(), 1.0, 1e-14);
  EXPECT_LT(max_abs(q - r), 1e-5);
}

TEST(ViewStateCtor, RejectsNonRotations) {
  Rotation4 reflect = Rotation4::Identity();
  reflect(0, 0) = -1.0;
  EXPECT_THROW(ViewState(reflect, Vector4::Zero()), std::invalid_argument);
  EXPECT_THROW(ViewState(Rotation4::Identity() * 2.0, Vector4::Zero()), std::invalid_argument);
  Vector4 bad = Vector4::Zero();
  bad(2) = std::nan("");
  EXPECT_THROW(ViewState(Rotation4::Identity(), bad), std::invalid_argument);
}

TEST(Apply, PreservesDistancesAndMatchesHomogeneous) {
  std::mt19937_64 rng(22);
  ViewState vs;
  vs = rotate(vs, RotationPlane::XT, 0.8);
  vs = rotate(vs, RotationPlane::YZ, -2.1);
  vs = translate(vs, Vector4(0.1, -0.2, 0.3, 0.4));
  const Eigen::MatrixXd x = oracle::random_data(4, 200, rng);
  const SpatialMatrix a = apply_view(vs, x);
  const SpatialMatrix b = apply_view_homogeneous(vs, x);
  EXPECT_LT(max_abs(a - b), 1e-12);
  for (Eigen::Index j = 1; j < x.cols(); ++j) {
    const double before = (x.col(j) - x.col(j - 1)).norm();
    const double after = (a.col(j) - a.col(j - 1)).norm();
    EXPECT_NEAR(before, after, 1e-9);
  }
  EXPECT_THROW(apply_view(vs, Eigen::MatrixXd::Zero(3, 2)), ProjectionError);
}

TEST(Apply, TranslationAddsPerColumn) {
  const ViewState vs = translate(ViewState{}, Vector4(1, 2, 3, 4));
  const SpatialMatrix out = apply_view(vs, Eigen::MatrixXd::Zero(4, 3));
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_EQ(Vector4(out.col(j)), Vector4(1, 2, 3, 4));
}

TEST(Json, RoundTrip) {
  const ViewState vs = translate(rotate(ViewState{}, RotationPlane::YT, 0.123), Vector4(0, 0, 0, -1.5));
  const auto j = view_to_json(vs);
  EXPECT_EQ(j["rotation"].size(), 16u);
  EXPECT_EQ(view_from_json(j), vs);
  EXPECT_THROW(view_from_json({{"rotation", {1, 2}}, {"translation", {0, 0, 0, 0}}}), std::invalid_argument);
}
