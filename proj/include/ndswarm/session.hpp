#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ndswarm/assignment.hpp"
#include "ndswarm/dataset.hpp"
#include "ndswarm/projection.hpp"
#include "ndswarm/scene.hpp"
#include "ndswarm/slab.hpp"
#include "ndswarm/view.hpp"

namespace ndswarm {

// Carries the HTTP status the API layer reports for it.
class ServiceError : public std::runtime_error {
 public:
  enum class Code { BadRequest = 400, NotFound = 404, Conflict = 409 };

  ServiceError(Code code, std::string message, nlohmann::json details = nullptr)
      : std::runtime_error(std::move(message)), code_(code), details_(std::move(details)) {}

  Code code() const { return code_; }
  int status() const { return static_cast<int>(code_); }
  const nlohmann::json& details() const { return details_; }

 private:
  Code code_;
  nlohmann::json details_;
};

// Named, immutable datasets. With a storage directory, uploads are written
// there as CSV and every *.csv in it is registered (id = file stem) on start.
class DatasetStore {
 public:
  DatasetStore() = default;
  explicit DatasetStore(std::filesystem::path storage_dir);

  std::string add(Dataset ds);
  std::string load(const std::filesystem::path& path, const CsvOptions& options = {});
  std::shared_ptr<const Dataset> get(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  std::string next_id_locked();

  mutable std::mutex mu_;
  std::optional<std::filesystem::path> dir_;
  std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
  std::uint64_t counter_ = 0;
};

namespace cmd {
struct LoadDataset {
  std::optional<std::string> dataset;  // store id
  std::optional<std::string> path;
  std::optional<std::string> label_column;
};
struct SetAssignment {
  nlohmann::json assignment;  // name -> {category, target}
};
struct Rotate {
  RotationPlane plane = RotationPlane::XY;
  double radians = 0.0;
};
struct Translate {
  Vector4 delta = Vector4::Zero();
};
struct SetSlab {
  double threshold = kDefaultSlabThreshold;
  std::optional<SlabMode> mode;
};
struct SetCamera {
  double d = kDefaultCameraDistance;
};
struct RequestFrame {};
struct GetPcaReport {
  PcaReportOptions options;
};
}  // namespace cmd

using Command = std::variant<cmd::LoadDataset, cmd::SetAssignment, cmd::Rotate, cmd::Translate,
                             cmd::SetSlab, cmd::SetCamera, cmd::RequestFrame, cmd::GetPcaReport>;

// {"type": "rotate", "plane": "XY", "degrees": 45} and friends. Throws
// ServiceError(BadRequest) on anything malformed.
Command command_from_json(const nlohmann::json& j);
nlohmann::json command_to_json(const Command& c);
std::string_view command_name(const Command& c);

// Everything a frame depends on. Shared read-only between the writer and
// frame pushers; a command builds a new snapshot and swaps it in.
struct SessionState {
  std::string dataset_id;
  std::shared_ptr<const Dataset> dataset;
  std::optional<DimensionAssignment> assignment;
  std::shared_ptr<const FilterMatrix> filter;
  std::shared_ptr<const ProjectedData> projected;
  ViewState view;
  FrameSettings settings;
  std::uint64_t version = 0;
};

struct DispatchResult {
  std::variant<nlohmann::json, SceneFrame, PcaReport> value;  // state summary, frame or report
  bool changed = false;
};

class Session {
 public:
  Session(std::string id, std::shared_ptr<DatasetStore> store, const std::string& dataset_id);

  const std::string& id() const { return id_; }

  // Applies one command atomically: on error nothing changes.
  DispatchResult dispatch(const Command& c);

  std::shared_ptr<const SessionState> snapshot() const;
  std::uint64_t version() const;
  nlohmann::json summary() const;

  // Builds a frame from the current snapshot without taking the command lock.
  // Throws ServiceError(Conflict) while no assignment is set.
  SceneFrame frame();

  // Blocks until the version differs from `seen` or the timeout passes.
  std::optional<std::uint64_t> wait_for_change(std::uint64_t seen, std::chrono::milliseconds timeout) const;

 private:
  SceneFrame frame_from(const SessionState& state);

  std::string id_;
  std::shared_ptr<DatasetStore> store_;
  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  std::shared_ptr<const SessionState> state_;
  std::atomic<std::uint64_t> seq_{0};
};

nlohmann::json summarize_state(const std::string& session_id, const SessionState& state);

class SessionRegistry {
 public:
  explicit SessionRegistry(std::shared_ptr<DatasetStore> store);

  std::shared_ptr<DatasetStore> store() const { return store_; }
  std::shared_ptr<Session> create(const std::string& dataset_id);
  std::shared_ptr<Session> get(const std::string& id) const;

 private:
  std::shared_ptr<DatasetStore> store_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

struct ReplayResult {
  std::vector<std::string> frames;  // canonical JSON of every frame produced
  std::vector<std::string> errors;  // rejected commands, "line N: message"
  std::size_t commands = 0;
  std::uint64_t final_version = 0;
  std::uint64_t digest = 0;  // FNV-1a 64 over all frame bytes, newline separated
};

// JSONL log, one command per line; blank lines and lines starting with '#'
// are skipped. The first command must load a dataset by path (resolved
// against `base_dir`). Every request_frame contributes one frame.
ReplayResult replay(std::istream& log, const std::filesystem::path& base_dir = {});
ReplayResult replay_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace ndswarm
