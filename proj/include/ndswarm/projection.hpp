#pragma once

#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "ndswarm/assignment.hpp"
#include "ndswarm/dataset.hpp"

namespace ndswarm {

using SpatialMatrix = Eigen::Matrix<double, static_cast<int>(kSpatialAxes), Eigen::Dynamic>;

class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Standard deviations below this pin a row to its center value.
inline constexpr double kDegenerateStd = 1e-12;

struct RowKind {
  enum class Kind { Spatial, Visual, PcaComponent, Empty };
  Kind kind = Kind::Empty;
  // Axis or feature index for Spatial/Visual, component rank (0 = strongest)
  // for PcaComponent.
  std::size_t index = 0;

  friend bool operator==(const RowKind&, const RowKind&) = default;
};

struct PcaLoading {
  std::size_t row = 0;   // row of F holding this component
  std::size_t rank = 0;  // 0 = strongest
  std::vector<std::pair<std::size_t, double>> coefficients;  // (dimension, weight)
};

// (k+m) x n matrix: spatial rows first (X, Y, Z, T), then visual rows in
// catalog order. Unassigned rows are filled with principal directions of the
// anonymous dimensions, strongest first, in ascending row order.
struct FilterMatrix {
  Eigen::MatrixXd F;
  std::vector<RowKind> rows;
  std::vector<PcaLoading> pca;
};

struct PcaResult {
  // One component per row, unit norm, decreasing singular value. Only
  // numerically non-null directions are returned.
  Eigen::MatrixXd loadings;
  // All singular values of the centered block, descending (length min(rows, cols)).
  Eigen::VectorXd singular_values;
  std::size_t rank = 0;
  // Squared Frobenius norm of the centered block.
  double total_variance = 0.0;
};

// Rows of `block` are variables, columns observations. Rows are centered
// before decomposition. At most min(count, rank) components are returned;
// each is sign-fixed so its largest-magnitude entry is non-negative.
PcaResult pca_components(const Eigen::Ref<const Eigen::MatrixXd>& block, std::size_t count);

FilterMatrix build_filter_matrix(const Dataset& ds, const DimensionAssignment& asgn);

// F * X.
Eigen::MatrixXd apply_filter(const FilterMatrix& filter, const Dataset& ds);

struct RowStats {
  double mean = 0.0;
  double scale = 1.0;  // population standard deviation
};

struct ProjectedData {
  SpatialMatrix spatial;   // k x N
  Eigen::MatrixXd visual;  // m x N
  std::vector<RowStats> row_stats;
  std::set<std::size_t> degenerate_rows;

  Eigen::Index points() const { return spatial.cols(); }
};

// Row-wise z-score with population std; spatial rows are then shifted by
// +0.5. Degenerate rows become 0.5 (spatial) or 0 (visual).
ProjectedData standardize(const Eigen::Ref<const Eigen::MatrixXd>& filtered);

// build_filter_matrix -> apply_filter -> standardize.
ProjectedData project(const Dataset& ds, const DimensionAssignment& asgn);

enum class PcaScope { Anonymous, AnonymousAndSpatial };

struct PcaReportOptions {
  PcaScope scope = PcaScope::Anonymous;
  // z-score each input dimension before decomposition (correlation PCA).
  bool standardize_inputs = true;
};

struct PcaReport {
  std::vector<std::string> dimensions;  // columns of `loadings`
  Eigen::MatrixXd loadings;             // components x dimensions
  std::vector<double> explained_variance;
  bool standardized_inputs = true;
  PcaScope scope = PcaScope::Anonymous;
};

PcaReport pca_report(const Dataset& ds, const DimensionAssignment& asgn,
                     const PcaReportOptions& options = {});

nlohmann::json pca_report_to_json(const PcaReport& report);

}  // namespace ndswarm
