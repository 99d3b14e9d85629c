#include "ndswarm/assignment.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "ndswarm/dataset.hpp"

namespace ndswarm {

namespace {

constexpr std::array<std::string_view, kSpatialAxes> kAxisNames = {"X", "Y", "Z", "T"};
constexpr std::array<std::string_view, kVisualFeatures> kFeatureNames = {
    "Skin_C", "Hair_C", "Eye_S", "Nose_L", "Mouth_W",
    "Smile",  "Frown",  "Hair_L", "Face_Elong", "Iris_C"};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join_dims(const std::vector<std::size_t>& dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(dims[i]);
  }
  return out;
}

}  // namespace

std::string_view axis_name(SpatialAxis a) { return kAxisNames[index_of(a)]; }
std::string_view feature_name(VisualFeature f) { return kFeatureNames[index_of(f)]; }

std::optional<SpatialAxis> parse_axis(std::string_view name) {
  for (std::size_t i = 0; i < kAxisNames.size(); ++i) {
    if (kAxisNames[i] == name) return static_cast<SpatialAxis>(i);
  }
  return std::nullopt;
}

std::optional<VisualFeature> parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
    if (kFeatureNames[i] == name) return static_cast<VisualFeature>(i);
  }
  return std::nullopt;
}

std::optional<Role> DimensionAssignment::role_of(std::size_t dim) const {
  for (const auto& e : entries) {
    if (e.dim == dim) return e.role;
  }
  return std::nullopt;
}

std::vector<Violation> validate(const DimensionAssignment& asgn, std::size_t n) {
  std::vector<Violation> out;
  std::map<std::size_t, std::size_t> declared;
  std::map<std::size_t, std::set<std::size_t>> by_axis;
  std::map<std::size_t, std::set<std::size_t>> by_feature;
  std::set<std::size_t> out_of_range;

  for (const auto& e : asgn.entries) {
    if (e.dim >= n) {
      out_of_range.insert(e.dim);
      continue;
    }
    ++declared[e.dim];
    std::visit(Overloaded{
                   [&](const Spatial& s) { by_axis[index_of(s.axis)].insert(e.dim); },
                   [&](const Visual& v) { by_feature[index_of(v.feature)].insert(e.dim); },
                   [](const auto&) {},
               },
               e.role);
  }

  for (std::size_t d : out_of_range) {
    out.push_back({Violation::Kind::DimensionOutOfRange,
                   "dimension " + std::to_string(d) + " out of range (n=" + std::to_string(n) + ")",
                   {d}});
  }
  for (const auto& [d, times] : declared) {
    if (times > 1) {
      out.push_back({Violation::Kind::DimensionDeclaredTwice,
                     "dimension " + std::to_string(d) + " declared " + std::to_string(times) + " times",
                     {d}});
    }
  }
  std::vector<std::size_t> missing;
  for (std::size_t d = 0; d < n; ++d) {
    if (!declared.contains(d)) missing.push_back(d);
  }
  if (!missing.empty()) {
    out.push_back({Violation::Kind::DimensionMissing,
                   "no role declared for dimension(s) " + join_dims(missing), missing});
  }
  for (const auto& [axis, dims] : by_axis) {
    if (dims.size() > 1) {
      std::vector<std::size_t> v(dims.begin(), dims.end());
      out.push_back({Violation::Kind::AxisAssignedTwice,
                     "axis " + std::string(kAxisNames[axis]) + " assigned twice (dimensions " +
                         join_dims(v) + ")",
                     v});
    }
  }
  for (const auto& [feature, dims] : by_feature) {
    if (dims.size() > 1) {
      std::vector<std::size_t> v(dims.begin(), dims.end());
      out.push_back({Violation::Kind::FeatureAssignedTwice,
                     "feature " + std::string(kFeatureNames[feature]) + " assigned twice (dimensions " +
                         join_dims(v) + ")",
                     v});
    }
  }
  std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.kind, a.dims, a.message) < std::tie(b.kind, b.dims, b.message);
  });
  return out;
}

RoleCounts counts(const DimensionAssignment& asgn) {
  RoleCounts c;
  for (const auto& e : asgn.entries) {
    std::visit(Overloaded{
                   [&](const Spatial&) { ++c.spatial; },
                   [&](const Visual&) { ++c.visual; },
                   [&](const Anonymous&) { ++c.anonymous; },
                   [&](const Skipped&) { ++c.skipped; },
               },
               e.role);
  }
  return c;
}

void require_valid(const DimensionAssignment& asgn, std::size_t n) {
  auto violations = validate(asgn, n);
  if (violations.empty()) return;
  std::string msg = "invalid assignment: " + violations.front().message;
  if (violations.size() > 1) msg += " (+" + std::to_string(violations.size() - 1) + " more)";
  throw AssignmentError(std::move(msg), std::move(violations));
}

DimensionAssignment assignment_from_json(const nlohmann::json& j, const Dataset& ds) {
  if (!j.is_object()) throw AssignmentError("assignment must be a JSON object");
  const auto n = static_cast<std::size_t>(ds.dims());
  std::vector<std::optional<Role>> roles(n);

  for (const auto& [name, raw] : j.items()) {
    const auto dim = ds.find(name);
    if (!dim) throw AssignmentError("unknown dimension '" + name + "'");
    nlohmann::json spec = raw;
    if (raw.is_string()) {
      // Shorthand: an axis name, a feature name, "anonymous" or "skipped".
      const auto word = raw.get<std::string>();
      if (parse_axis(word)) {
        spec = {{"category", "spatial"}, {"target", word}};
      } else if (parse_feature(word)) {
        spec = {{"category", "visual"}, {"target", word}};
      } else {
        spec = {{"category", word}};
      }
    }
    if (!spec.is_object() || !spec.contains("category") || !spec["category"].is_string()) {
      throw AssignmentError("dimension '" + name + "': expected {\"category\": ...}");
    }
    const auto category = spec["category"].get<std::string>();
    const bool has_target = spec.contains("target") && !spec["target"].is_null();
    std::string target;
    if (has_target) {
      if (!spec["target"].is_string()) {
        throw AssignmentError("dimension '" + name + "': target must be a string");
      }
      target = spec["target"].get<std::string>();
    }

    Role role = Skipped{};
    if (category == "spatial") {
      const auto axis = parse_axis(target);
      if (!axis) throw AssignmentError("dimension '" + name + "': unknown spatial target '" + target + "'");
      role = Spatial{*axis};
    } else if (category == "visual") {
      const auto feature = parse_feature(target);
      if (!feature) throw AssignmentError("dimension '" + name + "': unknown visual target '" + target + "'");
      role = Visual{*feature};
    } else if (category == "anonymous" || category == "unnamed" || category == "skipped") {
      if (has_target) {
        throw AssignmentError("dimension '" + name + "': category '" + category + "' takes no target");
      }
      if (category == "skipped") {
        role = Skipped{};
      } else {
        role = Anonymous{};
      }
    } else {
      throw AssignmentError("dimension '" + name + "': unknown category '" + category + "'");
    }
    roles[static_cast<std::size_t>(*dim)] = role;
  }

  DimensionAssignment out;
  out.entries.reserve(n);
  for (std::size_t d = 0; d < n; ++d) out.entries.push_back({d, roles[d].value_or(Skipped{})});
  return out;
}

nlohmann::json assignment_to_json(const DimensionAssignment& asgn, const Dataset& ds) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& e : asgn.entries) {
    if (e.dim >= ds.names().size()) continue;
    nlohmann::json spec;
    std::visit(Overloaded{
                   [&](const Spatial& s) {
                     spec = {{"category", "spatial"}, {"target", axis_name(s.axis)}};
                   },
                   [&](const Visual& v) {
                     spec = {{"category", "visual"}, {"target", feature_name(v.feature)}};
                   },
                   [&](const Anonymous&) { spec = {{"category", "anonymous"}}; },
                   [&](const Skipped&) { spec = {{"category", "skipped"}}; },
               },
               e.role);
    j[ds.names()[e.dim]] = std::move(spec);
  }
  return j;
}

DimensionAssignment assignment_from_pairs(
    const Dataset& ds, const std::vector<std::pair<std::string, std::string>>& pairs) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, target] : pairs) {
    if (target == "anonymous" || target == "skipped") {
      j[name] = {{"category", target}};
    } else if (parse_axis(target)) {
      j[name] = {{"category", "spatial"}, {"target", target}};
    } else {
      j[name] = {{"category", "visual"}, {"target", target}};
    }
  }
  return assignment_from_json(j, ds);
}

}  // namespace ndswarm
