#include "ndswarm/session.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ndswarm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void bad_request(const std::string& message, nlohmann::json details = nullptr) {
  throw ServiceError(ServiceError::Code::BadRequest, message, std::move(details));
}

double finite_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) bad_request(std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) bad_request(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad_request(std::string("field '") + key + "' must be finite");
  return d;
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) bad_request(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::string_view kind_name(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::DimensionOutOfRange: return "dimension_out_of_range";
    case Violation::Kind::DimensionDeclaredTwice: return "dimension_declared_twice";
    case Violation::Kind::DimensionMissing: return "dimension_missing";
    case Violation::Kind::AxisAssignedTwice: return "axis_assigned_twice";
    case Violation::Kind::FeatureAssignedTwice: return "feature_assigned_twice";
  }
  return "unknown";
}

nlohmann::json violations_json(const std::vector<Violation>& violations) {
  auto out = nlohmann::json::array();
  for (const auto& v : violations) {
    out.push_back({{"kind", kind_name(v.kind)}, {"message", v.message}, {"dims", v.dims}});
  }
  return out;
}

std::string_view scope_name(PcaScope scope) {
  return scope == PcaScope::Anonymous ? "anonymous" : "anonymous_and_spatial";
}

}  // namespace

// ---------------------------------------------------------------- store

DatasetStore::DatasetStore(std::filesystem::path storage_dir) : dir_(std::move(storage_dir)) {
  std::filesystem::create_directories(*dir_);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(*dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    CsvOptions opts;
    opts.label_column = "label";
    std::shared_ptr<const Dataset> ds;
    try {
      ds = std::make_shared<const Dataset>(load_csv(file, opts));
    } catch (const DatasetError&) {
      ds = std::make_shared<const Dataset>(load_csv(file));
    }
    datasets_[file.stem().string()] = std::move(ds);
  }
}

std::string DatasetStore::next_id_locked() {
  std::string id;
  do {
    id = "d" + std::to_string(++counter_);
  } while (datasets_.count(id));
  return id;
}

std::string DatasetStore::add(Dataset ds) {
  std::lock_guard lock(mu_);
  const std::string id = next_id_locked();
  if (dir_) {
    const auto file = *dir_ / (id + ".csv");
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write '" + file.string() + "'");
    write_csv(ds, out);
  }
  datasets_[id] = std::make_shared<const Dataset>(std::move(ds));
  return id;
}

std::string DatasetStore::load(const std::filesystem::path& path, const CsvOptions& options) {
  return add(load_csv(path, options));
}

std::shared_ptr<const Dataset> DatasetStore::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = datasets_.find(id);
  if (it == datasets_.end()) {
    throw ServiceError(ServiceError::Code::NotFound, "unknown dataset '" + id + "'");
  }
  return it->second;
}

std::vector<std::string> DatasetStore::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, ds] : datasets_) out.push_back(id);
  return out;
}

// ---------------------------------------------------------------- commands

Command command_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad_request("command must be a JSON object");
  const auto type = optional_string(j, "type");
  if (!type) bad_request("command needs a 'type'");

  if (*type == "load_dataset") {
    cmd::LoadDataset c{optional_string(j, "dataset"), optional_string(j, "path"),
                       optional_string(j, "label_column")};
    if (c.dataset.has_value() == c.path.has_value()) {
      bad_request("load_dataset takes exactly one of 'dataset' or 'path'");
    }
    return c;
  }
  if (*type == "set_assignment") {
    if (!j.contains("assignment") || !j["assignment"].is_object()) {
      bad_request("set_assignment needs an 'assignment' object");
    }
    return cmd::SetAssignment{j["assignment"]};
  }
  if (*type == "rotate") {
    const auto name = optional_string(j, "plane");
    if (!name) bad_request("rotate needs a 'plane'");
    const auto plane = parse_plane(*name);
    if (!plane) bad_request("unknown rotation plane '" + *name + "'");
    const bool rad = j.contains("radians");
    if (rad == j.contains("degrees")) bad_request("rotate takes exactly one of 'radians' or 'degrees'");
    const double angle =
        rad ? finite_number(j, "radians") : finite_number(j, "degrees") * std::numbers::pi / 180.0;
    return cmd::Rotate{*plane, angle};
  }
  if (*type == "translate") {
    const auto& d = j.contains("delta") ? j["delta"] : nlohmann::json();
    if (!d.is_array() || d.size() != kSpatialAxes) bad_request("translate needs a 4-element 'delta'");
    cmd::Translate c;
    for (std::size_t i = 0; i < kSpatialAxes; ++i) {
      if (!d[i].is_number()) bad_request("translate delta must be numeric");
      c.delta(static_cast<Eigen::Index>(i)) = d[i].get<double>();
    }
    if (!c.delta.allFinite()) bad_request("translate delta must be finite");
    return c;
  }
  if (*type == "set_slab") {
    cmd::SetSlab c;
    c.threshold = finite_number(j, "threshold");
    if (const auto mode = optional_string(j, "mode")) {
      c.mode = parse_slab_mode(*mode);
      if (!c.mode) bad_request("unknown slab mode '" + *mode + "'");
    }
    return c;
  }
  if (*type == "set_camera") return cmd::SetCamera{finite_number(j, "d")};
  if (*type == "request_frame") return cmd::RequestFrame{};
  if (*type == "get_pca_report") {
    cmd::GetPcaReport c;
    if (const auto scope = optional_string(j, "scope")) {
      if (*scope == "anonymous") {
        c.options.scope = PcaScope::Anonymous;
      } else if (*scope == "anonymous_and_spatial") {
        c.options.scope = PcaScope::AnonymousAndSpatial;
      } else {
        bad_request("unknown PCA scope '" + *scope + "'");
      }
    }
    if (j.contains("standardize_inputs")) {
      if (!j["standardize_inputs"].is_boolean()) bad_request("'standardize_inputs' must be a boolean");
      c.options.standardize_inputs = j["standardize_inputs"].get<bool>();
    }
    return c;
  }
  bad_request("unknown command type '" + *type + "'");
}

nlohmann::json command_to_json(const Command& c) {
  return std::visit(
      Overloaded{
          [](const cmd::LoadDataset& x) {
            nlohmann::json j = {{"type", "load_dataset"}};
            if (x.dataset) j["dataset"] = *x.dataset;
            if (x.path) j["path"] = *x.path;
            if (x.label_column) j["label_column"] = *x.label_column;
            return j;
          },
          [](const cmd::SetAssignment& x) {
            return nlohmann::json{{"type", "set_assignment"}, {"assignment", x.assignment}};
          },
          [](const cmd::Rotate& x) {
            return nlohmann::json{{"type", "rotate"}, {"plane", plane_name(x.plane)}, {"radians", x.radians}};
          },
          [](const cmd::Translate& x) {
            return nlohmann::json{{"type", "translate"},
                                  {"delta", {x.delta(0), x.delta(1), x.delta(2), x.delta(3)}}};
          },
          [](const cmd::SetSlab& x) {
            nlohmann::json j = {{"type", "set_slab"}, {"threshold", x.threshold}};
            if (x.mode) j["mode"] = slab_mode_name(*x.mode);
            return j;
          },
          [](const cmd::SetCamera& x) { return nlohmann::json{{"type", "set_camera"}, {"d", x.d}}; },
          [](const cmd::RequestFrame&) { return nlohmann::json{{"type", "request_frame"}}; },
          [](const cmd::GetPcaReport& x) {
            return nlohmann::json{{"type", "get_pca_report"},
                                  {"scope", scope_name(x.options.scope)},
                                  {"standardize_inputs", x.options.standardize_inputs}};
          },
      },
      c);
}

std::string_view command_name(const Command& c) {
  static constexpr std::string_view kNames[] = {"load_dataset", "set_assignment", "rotate",
                                                "translate",    "set_slab",       "set_camera",
                                                "request_frame", "get_pca_report"};
  return kNames[c.index()];
}

// ---------------------------------------------------------------- session

nlohmann::json summarize_state(const std::string& session_id, const SessionState& s) {
  nlohmann::json j;
  j["session"] = session_id;
  j["version"] = s.version;
  j["dataset"] = s.dataset_id;
  j["source"] = s.dataset->source();
  j["n_total"] = s.dataset->points();
  j["n_dims"] = s.dataset->dims();
  j["dimensions"] = s.dataset->names();
  if (s.assignment) {
    const auto c = counts(*s.assignment);
    j["assignment"] = assignment_to_json(*s.assignment, *s.dataset);
    j["roles"] = {{"spatial", c.spatial}, {"visual", c.visual}, {"anonymous", c.anonymous},
                  {"skipped", c.skipped}};
    j["pca_rows"] = s.filter ? s.filter->pca.size() : 0;
  } else {
    j["assignment"] = nullptr;
    j["roles"] = nullptr;
    j["pca_rows"] = 0;
  }
  j["view"] = view_to_json(s.view);
  j["slab"] = {{"threshold", s.settings.slab.threshold}, {"mode", slab_mode_name(s.settings.slab.mode)}};
  j["camera"] = {{"d", s.settings.camera.d}, {"near_epsilon", s.settings.camera.near_epsilon}};
  j["calibration"] = {{"sigma_range", s.settings.calibration.sigma_range}};
  return j;
}

Session::Session(std::string id, std::shared_ptr<DatasetStore> store, const std::string& dataset_id)
    : id_(std::move(id)), store_(std::move(store)) {
  auto s = std::make_shared<SessionState>();
  s->dataset_id = dataset_id;
  s->dataset = store_->get(dataset_id);
  state_ = std::move(s);
}

std::shared_ptr<const SessionState> Session::snapshot() const {
  std::lock_guard lock(mu_);
  return state_;
}

std::uint64_t Session::version() const { return snapshot()->version; }

nlohmann::json Session::summary() const { return summarize_state(id_, *snapshot()); }

SceneFrame Session::frame_from(const SessionState& s) {
  if (!s.assignment || !s.projected) {
    throw ServiceError(ServiceError::Code::Conflict, "assignment required");
  }
  return build_frame(*s.projected, s.view, s.settings, s.dataset->labels(), ++seq_, s.version);
}

SceneFrame Session::frame() { return frame_from(*snapshot()); }

DispatchResult Session::dispatch(const Command& c) {
  std::unique_lock lock(mu_);
  const SessionState& cur = *state_;
  auto next = std::make_shared<SessionState>(cur);
  DispatchResult result;

  const auto require_assignment = [&] {
    if (!cur.assignment) throw ServiceError(ServiceError::Code::Conflict, "assignment required");
  };
  const auto checked = [](auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      bad_request(e.what());
    }
  };

  std::visit(
      Overloaded{
          [&](const cmd::LoadDataset& x) {
            std::string id;
            if (x.dataset) {
              store_->get(*x.dataset);
              id = *x.dataset;
            } else {
              CsvOptions opts;
              opts.label_column = x.label_column;
              try {
                id = store_->load(*x.path, opts);
              } catch (const DatasetError& e) {
                bad_request(e.what());
              }
            }
            next->dataset_id = id;
            next->dataset = store_->get(id);
            next->assignment.reset();
            next->filter.reset();
            next->projected.reset();
            result.changed = true;
          },
          [&](const cmd::SetAssignment& x) {
            try {
              auto asgn = assignment_from_json(x.assignment, *cur.dataset);
              require_valid(asgn, static_cast<std::size_t>(cur.dataset->dims()));
              auto filter = std::make_shared<const FilterMatrix>(build_filter_matrix(*cur.dataset, asgn));
              next->projected =
                  std::make_shared<const ProjectedData>(standardize(apply_filter(*filter, *cur.dataset)));
              next->filter = std::move(filter);
              next->assignment = std::move(asgn);
            } catch (const AssignmentError& e) {
              bad_request(e.what(), {{"violations", violations_json(e.violations())}});
            } catch (const ProjectionError& e) {
              bad_request(e.what());
            }
            result.changed = true;
          },
          [&](const cmd::Rotate& x) {
            checked([&] { next->view = rotate(cur.view, x.plane, x.radians); });
            result.changed = true;
          },
          [&](const cmd::Translate& x) {
            checked([&] { next->view = translate(cur.view, x.delta); });
            result.changed = true;
          },
          [&](const cmd::SetSlab& x) {
            SlabConfig slab{x.threshold, x.mode.value_or(cur.settings.slab.mode)};
            checked([&] { check(slab); });
            next->settings.slab = slab;
            result.changed = true;
          },
          [&](const cmd::SetCamera& x) {
            CameraConfig cam = cur.settings.camera;
            cam.d = x.d;
            checked([&] { check(cam); });
            next->settings.camera = cam;
            result.changed = true;
          },
          [&](const cmd::RequestFrame&) { result.value = frame_from(cur); },
          [&](const cmd::GetPcaReport& x) {
            require_assignment();
            try {
              result.value = pca_report(*cur.dataset, *cur.assignment, x.options);
            } catch (const ProjectionError& e) {
              bad_request(e.what());
            }
          },
      },
      c);

  if (result.changed) {
    next->version = cur.version + 1;
    state_ = std::move(next);
    result.value = summarize_state(id_, *state_);
    lock.unlock();
    changed_.notify_all();
  }
  return result;
}

std::optional<std::uint64_t> Session::wait_for_change(std::uint64_t seen,
                                                      std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  if (!changed_.wait_for(lock, timeout, [&] { return state_->version != seen; })) return std::nullopt;
  return state_->version;
}

// ---------------------------------------------------------------- registry

SessionRegistry::SessionRegistry(std::shared_ptr<DatasetStore> store) : store_(std::move(store)) {}

std::shared_ptr<Session> SessionRegistry::create(const std::string& dataset_id) {
  std::lock_guard lock(mu_);
  const std::string id = "s" + std::to_string(counter_ + 1);
  auto session = std::make_shared<Session>(id, store_, dataset_id);
  ++counter_;
  sessions_[id] = session;
  return session;
}

std::shared_ptr<Session> SessionRegistry::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(ServiceError::Code::NotFound, "unknown session '" + id + "'");
  return it->second;
}

// ---------------------------------------------------------------- replay

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ReplayResult replay(std::istream& log, const std::filesystem::path& base_dir) {
  auto store = std::make_shared<DatasetStore>();
  std::shared_ptr<Session> session;
  ReplayResult out;
  out.digest = fnv1a64({});
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(log, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    Command c;
    try {
      c = command_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(where + e.what());
    } catch (const ServiceError& e) {
      throw std::runtime_error(where + e.what());
    }
    if (auto* load = std::get_if<cmd::LoadDataset>(&c); load && load->path) {
      std::filesystem::path p = *load->path;
      if (p.is_relative() && !base_dir.empty()) load->path = (base_dir / p).string();
    }
    ++out.commands;
    if (!session) {
      const auto* load = std::get_if<cmd::LoadDataset>(&c);
      if (!load || !load->path) throw std::runtime_error(where + "log must start with load_dataset by path");
      CsvOptions opts;
      opts.label_column = load->label_column;
      session = std::make_shared<Session>("replay", store, store->load(*load->path, opts));
      continue;
    }
    try {
      auto result = session->dispatch(c);
      if (const auto* frame = std::get_if<SceneFrame>(&result.value)) {
        out.frames.push_back(serialize_frame(*frame));
        out.digest = fnv1a64(out.frames.back(), out.digest);
        out.digest = fnv1a64("\n", out.digest);
      }
    } catch (const ServiceError& e) {
      out.errors.push_back(where + e.what());
    }
  }
  if (session) out.final_version = session->version();
  return out;
}

ReplayResult replay_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return replay(in, path.parent_path());
}

}  // namespace ndswarm
