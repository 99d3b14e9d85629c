#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ndswarm {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// n x N numeric table: one row per dimension, one column per data point.
// Immutable after construction; the constructor enforces every invariant.
class Dataset {
 public:
  Dataset(std::vector<std::string> names, Eigen::MatrixXd values,
          std::optional<std::vector<std::string>> labels = std::nullopt,
          std::string source = {});

  const std::vector<std::string>& names() const { return names_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const std::optional<std::vector<std::string>>& labels() const { return labels_; }
  const std::string& source() const { return source_; }

  Eigen::Index dims() const { return values_.rows(); }
  Eigen::Index points() const { return values_.cols(); }

  // Index of the named dimension, or nullopt.
  std::optional<Eigen::Index> find(std::string_view name) const;

  // Exact comparison of names, values and labels; provenance is ignored.
  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
  std::optional<std::vector<std::string>> labels_;
  std::string source_;
};

enum class MissingPolicy { DropPoint, Strict };

struct CsvOptions {
  char delimiter = ',';
  std::optional<std::string> label_column;
  MissingPolicy missing_policy = MissingPolicy::DropPoint;
};

MissingPolicy parse_missing_policy(std::string_view text);

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(std::istream& in, const CsvOptions& options = {},
                  std::string source = "<stream>");
Dataset parse_csv(std::string_view text, const CsvOptions& options = {},
                  std::string source = "<memory>");

// Writes values in shortest round-trip form so parse_csv restores them bit-exactly.
// Labels, when present, are written as the first column named `label_header`.
void write_csv(const Dataset& ds, std::ostream& out, char delimiter = ',',
               std::string_view label_header = "label");

struct DimensionSummary {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t distinct = 0;
};

std::vector<DimensionSummary> summarize(const Dataset& ds);

enum class Archetype { Politicians, Drinks };

struct SynthSpec {
  Archetype archetype = Archetype::Politicians;
  std::size_t points = 12;
  std::uint64_t seed = 1;
};

Archetype parse_archetype(std::string_view text);
std::size_t archetype_groups(Archetype archetype);

// Group-structured synthetic data with a `group_numeric` dimension and
// per-point names as labels.
Dataset generate_synthetic(const SynthSpec& spec);

}  // namespace ndswarm
