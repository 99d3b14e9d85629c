#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include <Eigen/LU>

#include "ndswarm/session.hpp"

using namespace ndswarm;
using json = nlohmann::json;

namespace {

const std::string kSource = NDSWARM_SOURCE_DIR;

json read(const std::string& name) {
  std::ifstream in(kSource + "/data/" + name);
  return json::parse(in);
}

struct Fixture {
  std::shared_ptr<DatasetStore> store = std::make_shared<DatasetStore>();
  std::shared_ptr<Session> session;

  explicit Fixture(Dataset ds) {
    const auto id = store->add(std::move(ds));
    session = std::make_shared<Session>("s1", store, id);
  }
};

Fixture politicians() {
  Fixture f(generate_synthetic({Archetype::Politicians, 12, 1}));
  f.session->dispatch(cmd::SetAssignment{read("politicians_assignment.json")});
  return f;
}

int status_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 0;
}

}  // namespace

TEST(Commands, ParseAndPrint) {
  const auto c = command_from_json({{"type", "rotate"}, {"plane", "XT"}, {"degrees", 90}});
  ASSERT_TRUE(std::holds_alternative<cmd::Rotate>(c));
  EXPECT_NEAR(std::get<cmd::Rotate>(c).radians, std::numbers::pi / 2, 1e-15);
  EXPECT_EQ(command_name(c), "rotate");
  const auto back = command_from_json(command_to_json(c));
  EXPECT_EQ(std::get<cmd::Rotate>(back).radians, std::get<cmd::Rotate>(c).radians);

  for (const json& j : {json{{"type", "request_frame"}}, json{{"type", "set_slab"}, {"threshold", 2}, {"mode", "pre_view"}},
                        json{{"type", "translate"}, {"delta", {0, 0, 0, 1}}}, json{{"type", "set_camera"}, {"d", 5}},
                        json{{"type", "get_pca_report"}, {"scope", "anonymous_and_spatial"}},
                        json{{"type", "load_dataset"}, {"path", "x.csv"}}}) {
    EXPECT_EQ(command_to_json(command_from_json(command_to_json(command_from_json(j)))),
              command_to_json(command_from_json(j)));
  }
}

TEST(Commands, Malformed) {
  for (const json& j : {json::array(), json{{"plane", "XY"}}, json{{"type", "fly"}},
                        json{{"type", "rotate"}, {"plane", "QQ"}, {"radians", 1}},
                        json{{"type", "rotate"}, {"plane", "XY"}},
                        json{{"type", "rotate"}, {"plane", "XY"}, {"radians", 1}, {"degrees", 1}},
                        json{{"type", "translate"}, {"delta", {1, 2}}},
                        json{{"type", "set_slab"}, {"threshold", "big"}},
                        json{{"type", "set_slab"}, {"threshold", 1}, {"mode", "diagonal"}},
                        json{{"type", "load_dataset"}},
                        json{{"type", "set_assignment"}, {"assignment", 3}},
                        json{{"type", "get_pca_report"}, {"scope", "everything"}}}) {
    EXPECT_EQ(status_of([&] { command_from_json(j); }), 400) << j.dump();
  }
}

TEST(Session, PoliticiansFrame) {
  auto f = politicians();
  const auto frame = f.session->frame();
  EXPECT_EQ(frame.n_total, 12u);
  EXPECT_EQ(frame.version, 1u);
  for (const auto& p : frame.points) EXPECT_TRUE(p.label.has_value());
  const auto summary = f.session->summary();
  EXPECT_EQ(summary["roles"]["visual"], 4);
  EXPECT_EQ(summary["roles"]["spatial"], 3);
  EXPECT_EQ(summary["pca_rows"], 3);
}

TEST(Session, FrameNeedsAssignment) {
  Fixture f(generate_synthetic({Archetype::Drinks, 30, 1}));
  EXPECT_EQ(status_of([&] { f.session->frame(); }), 409);
  EXPECT_EQ(status_of([&] { f.session->dispatch(cmd::RequestFrame{}); }), 409);
  EXPECT_EQ(status_of([&] { f.session->dispatch(cmd::GetPcaReport{}); }), 409);
  try {
    f.session->frame();
  } catch (const ServiceError& e) {
    EXPECT_STREQ(e.what(), "assignment required");
  }
}

TEST(Session, RotationsCompose) {
  auto f = politicians();
  f.session->dispatch(cmd::Rotate{RotationPlane::XY, std::numbers::pi / 4});
  f.session->dispatch(cmd::Rotate{RotationPlane::XY, std::numbers::pi / 4});
  const Rotation4 r = f.session->snapshot()->view.rotation();
  EXPECT_LT((r - plane_rotation(RotationPlane::XY, std::numbers::pi / 2)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(f.session->version(), 3u);
}

TEST(Session, RejectedCommandsChangeNothing) {
  auto f = politicians();
  const auto before = f.session->snapshot();
  try {
    f.session->dispatch(cmd::SetSlab{-1.0, std::nullopt});
    FAIL() << "expected an error";
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 400);
    EXPECT_STREQ(e.what(), "threshold must be positive");
  }
  EXPECT_EQ(status_of([&] { f.session->dispatch(cmd::SetCamera{0.0}); }), 400);
  try {
    f.session->dispatch(cmd::SetAssignment{{{"sympathy", "X"}, {"economic_views", "X"}}});
    FAIL() << "expected an error";
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 400);
    ASSERT_TRUE(e.details().contains("violations"));
    EXPECT_EQ(e.details()["violations"].size(), 1u);
  }
  EXPECT_EQ(status_of([&] { f.session->dispatch(cmd::LoadDataset{"nope", std::nullopt, std::nullopt}); }), 404);
  EXPECT_EQ(f.session->snapshot(), before);
  EXPECT_EQ(f.session->version(), 1u);
}

TEST(Session, FramesTrackState) {
  auto f = politicians();
  const auto a = f.session->frame();
  f.session->dispatch(cmd::SetSlab{0.01, std::nullopt});
  const auto b = f.session->frame();
  EXPECT_LT(b.n_visible(), a.n_visible());
  EXPECT_EQ(b.version, a.version + 1);
  EXPECT_GT(b.seq, a.seq);
  f.session->dispatch(cmd::SetSlab{100.0, std::nullopt});
  EXPECT_EQ(f.session->frame().n_visible(), 12u);

  // A new assignment replaces the cached projection.
  f.session->dispatch(cmd::SetAssignment{{{"sympathy", "X"}, {"age", "Smile"}}});
  const auto c = f.session->frame();
  for (const auto& p : c.points) {
    EXPECT_EQ(p.params[VisualFeature::SkinColor], 0.5);
    EXPECT_EQ(p.position[1], 0.5 * p.scale);  // Y is degenerate, pinned at 0.5
  }
}

TEST(Session, PcaReportThroughDispatch) {
  auto f = politicians();
  const auto r = f.session->dispatch(cmd::GetPcaReport{});
  EXPECT_FALSE(r.changed);
  ASSERT_TRUE(std::holds_alternative<PcaReport>(r.value));
  EXPECT_EQ(std::get<PcaReport>(r.value).dimensions.size(), 3u);
  EXPECT_EQ(f.session->version(), 1u);
}

TEST(Session, LoadDatasetResetsAssignment) {
  auto f = politicians();
  const auto other = f.store->add(generate_synthetic({Archetype::Drinks, 20, 2}));
  f.session->dispatch(cmd::LoadDataset{other, std::nullopt, std::nullopt});
  EXPECT_EQ(f.session->snapshot()->dataset->points(), 20);
  EXPECT_FALSE(f.session->snapshot()->assignment);
  EXPECT_EQ(status_of([&] { f.session->frame(); }), 409);
}

TEST(Session, ConcurrentReadersSeeWholeStates) {
  auto f = politicians();
  std::atomic<bool> stop{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    while (!stop) {
      const auto frame = f.session->frame();
      const auto snap = f.session->snapshot();
      if (frame.version > snap->version) ++bad;
      const auto& r = snap->view.rotation();
      if ((r.transpose() * r - Rotation4::Identity()).cwiseAbs().maxCoeff() > 1e-9) ++bad;
    }
  });
  for (int i = 0; i < 300; ++i) f.session->dispatch(cmd::Rotate{RotationPlane::XT, 0.01 * i});
  stop = true;
  reader.join();
  EXPECT_EQ(bad, 0);
  EXPECT_EQ(f.session->version(), 301u);
}

TEST(Session, WaitForChange) {
  auto f = politicians();
  EXPECT_FALSE(f.session->wait_for_change(1, std::chrono::milliseconds(10)));
  std::thread writer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    f.session->dispatch(cmd::Translate{Vector4(0, 0, 0, 0.1)});
  });
  EXPECT_EQ(f.session->wait_for_change(1, std::chrono::seconds(5)), 2u);
  writer.join();
}

TEST(Registry, IdsAndLookup) {
  auto store = std::make_shared<DatasetStore>();
  const auto ds = store->add(generate_synthetic({Archetype::Politicians, 12, 1}));
  EXPECT_EQ(ds, "d1");
  SessionRegistry reg(store);
  EXPECT_EQ(reg.create(ds)->id(), "s1");
  EXPECT_EQ(reg.create(ds)->id(), "s2");
  EXPECT_EQ(reg.get("s2")->id(), "s2");
  EXPECT_EQ(status_of([&] { reg.get("s9"); }), 404);
  EXPECT_EQ(status_of([&] { reg.create("d7"); }), 404);
}

TEST(Store, PersistsToDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "ndswarm_store_test";
  std::filesystem::remove_all(dir);
  std::string id;
  {
    DatasetStore store(dir);
    id = store.add(generate_synthetic({Archetype::Drinks, 25, 4}));
  }
  DatasetStore reopened(dir);
  const auto ids = reopened.ids();
  ASSERT_EQ(ids.size(), 1u);
  EXPECT_EQ(*reopened.get(ids[0]), generate_synthetic({Archetype::Drinks, 25, 4}));
  std::filesystem::remove_all(dir);
}

TEST(Replay, FixtureIsDeterministic) {
  const auto path = kSource + "/tests/fixtures/wine_session.jsonl";
  const auto a = replay_file(path);
  const auto b = replay_file(path);
  EXPECT_EQ(a.commands, 50u);
  EXPECT_EQ(a.frames.size(), 11u);
  ASSERT_EQ(a.errors.size(), 1u);
  EXPECT_NE(a.errors[0].find("threshold must be positive"), std::string::npos);
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.digest, b.digest);
  EXPECT_EQ(a.digest, 0x70d9f4e2879e65b4ULL);
  for (const auto& frame : a.frames) EXPECT_EQ(parse_frame(frame).n_total, 1599u);
}

TEST(Replay, Errors) {
  std::istringstream no_load(R"({"type":"request_frame"})");
  EXPECT_THROW(replay(no_load), std::exception);
  std::istringstream bad_json("{\"type\":\"load_dataset\",\"path\":\"data/winequality-red.csv\"}\n{oops\n");
  try {
    replay(bad_json, kSource);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line 2:", 0), 0u);
  }
  std::istringstream rejected("{\"type\":\"load_dataset\",\"path\":\"data/winequality-red.csv\"}\n"
                              "\n# comment\n{\"type\":\"request_frame\"}\n");
  const auto r = replay(rejected, kSource);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0], "line 4: assignment required");
  EXPECT_EQ(r.commands, 2u);
}

TEST(Fnv, KnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
