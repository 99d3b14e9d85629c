#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ndswarm {

class Dataset;

// Navigable display axes. The math downstream is written against kSpatialAxes.
enum class SpatialAxis : std::uint8_t { X, Y, Z, T };
inline constexpr std::size_t kSpatialAxes = 4;

// Avatar facial features, in catalog order.
enum class VisualFeature : std::uint8_t {
  SkinColor,
  HairColor,
  EyeSpacing,
  NoseLength,
  MouthWidth,
  Smile,
  Frown,
  HairLength,
  FaceElongation,
  IrisColor,
};
inline constexpr std::size_t kVisualFeatures = 10;

inline constexpr std::size_t kOutputRows = kSpatialAxes + kVisualFeatures;

constexpr std::size_t index_of(SpatialAxis a) { return static_cast<std::size_t>(a); }
constexpr std::size_t index_of(VisualFeature f) { return static_cast<std::size_t>(f); }

std::string_view axis_name(SpatialAxis a);
std::string_view feature_name(VisualFeature f);
std::optional<SpatialAxis> parse_axis(std::string_view name);
std::optional<VisualFeature> parse_feature(std::string_view name);

struct Spatial {
  SpatialAxis axis;
  friend bool operator==(const Spatial&, const Spatial&) = default;
};
struct Visual {
  VisualFeature feature;
  friend bool operator==(const Visual&, const Visual&) = default;
};
struct Anonymous {
  friend bool operator==(const Anonymous&, const Anonymous&) = default;
};
struct Skipped {
  friend bool operator==(const Skipped&, const Skipped&) = default;
};

using Role = std::variant<Spatial, Visual, Anonymous, Skipped>;

struct RoleEntry {
  std::size_t dim = 0;
  Role role = Skipped{};
  friend bool operator==(const RoleEntry&, const RoleEntry&) = default;
};

// Declared per-dimension roles. Declaration order carries no meaning.
struct DimensionAssignment {
  std::vector<RoleEntry> entries;

  // Role of `dim`, or nullopt if undeclared. Uses the first declaration.
  std::optional<Role> role_of(std::size_t dim) const;

  friend bool operator==(const DimensionAssignment&, const DimensionAssignment&) = default;
};

struct Violation {
  enum class Kind {
    DimensionOutOfRange,
    DimensionDeclaredTwice,
    DimensionMissing,
    AxisAssignedTwice,
    FeatureAssignedTwice,
  };
  Kind kind;
  std::string message;
  std::vector<std::size_t> dims;  // ascending

  friend bool operator==(const Violation&, const Violation&) = default;
};

// Empty result means the assignment is valid for n dimensions. Violations are
// sorted, so the result never depends on declaration order.
std::vector<Violation> validate(const DimensionAssignment& asgn, std::size_t n);

struct RoleCounts {
  std::size_t spatial = 0;    // h_S
  std::size_t visual = 0;     // h_V
  std::size_t anonymous = 0;  // h_A
  std::size_t skipped = 0;
  friend bool operator==(const RoleCounts&, const RoleCounts&) = default;
};

RoleCounts counts(const DimensionAssignment& asgn);

class AssignmentError : public std::runtime_error {
 public:
  explicit AssignmentError(std::string message, std::vector<Violation> violations = {})
      : std::runtime_error(std::move(message)), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Throws AssignmentError carrying every violation.
void require_valid(const DimensionAssignment& asgn, std::size_t n);

// JSON object: dimension name -> {"category": ..., "target": ...}, or a bare
// string ("X", "Smile", "anonymous", "skipped"). Dimensions the object does
// not mention are Skipped.
DimensionAssignment assignment_from_json(const nlohmann::json& j, const Dataset& ds);
nlohmann::json assignment_to_json(const DimensionAssignment& asgn, const Dataset& ds);

// Shorthand used by tests and tools: {name, "X"} / {name, "Smile"} /
// {name, "anonymous"} / {name, "skipped"}.
DimensionAssignment assignment_from_pairs(
    const Dataset& ds, const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace ndswarm
