#include "ndswarm/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

namespace ndswarm {

PcaResult pca_components(const Eigen::Ref<const Eigen::MatrixXd>& block, std::size_t count) {
  PcaResult out;
  const Eigen::Index vars = block.rows();
  const Eigen::Index obs = block.cols();
  out.loadings.resize(0, vars);
  if (vars == 0 || obs == 0) return out;

  const Eigen::MatrixXd centered = block.colwise() - block.rowwise().mean();
  out.total_variance = centered.squaredNorm();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
  out.singular_values = svd.singularValues();

  const double smax = out.singular_values.size() ? out.singular_values(0) : 0.0;
  const double tol = smax * static_cast<double>(std::max(vars, obs)) *
                     std::numeric_limits<double>::epsilon();
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    if (smax > 0.0 && out.singular_values(i) > tol) ++out.rank;
  }

  const auto kept = static_cast<Eigen::Index>(std::min(count, out.rank));
  out.loadings.resize(kept, vars);
  for (Eigen::Index c = 0; c < kept; ++c) {
    Eigen::VectorXd u = svd.matrixU().col(c);
    Eigen::Index arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    if (u(arg) < 0.0) u = -u;
    out.loadings.row(c) = u.transpose() / u.norm();
  }
  return out;
}

FilterMatrix build_filter_matrix(const Dataset& ds, const DimensionAssignment& asgn) {
  const auto n = static_cast<std::size_t>(ds.dims());
  require_valid(asgn, n);
  const RoleCounts c = counts(asgn);
  if (c.spatial + c.visual + c.anonymous == 0) {
    throw ProjectionError("every dimension is skipped; assign at least one dimension");
  }

  FilterMatrix out;
  out.F = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(kOutputRows), ds.dims());
  out.rows.assign(kOutputRows, RowKind{});

  std::vector<std::size_t> anonymous;
  for (const auto& e : asgn.entries) {
    const auto col = static_cast<Eigen::Index>(e.dim);
    if (const auto* s = std::get_if<Spatial>(&e.role)) {
      const auto row = index_of(s->axis);
      out.F(static_cast<Eigen::Index>(row), col) = 1.0;
      out.rows[row] = {RowKind::Kind::Spatial, index_of(s->axis)};
    } else if (const auto* v = std::get_if<Visual>(&e.role)) {
      const auto row = kSpatialAxes + index_of(v->feature);
      out.F(static_cast<Eigen::Index>(row), col) = 1.0;
      out.rows[row] = {RowKind::Kind::Visual, index_of(v->feature)};
    } else if (std::holds_alternative<Anonymous>(e.role)) {
      anonymous.push_back(e.dim);
    }
  }
  std::sort(anonymous.begin(), anonymous.end());

  std::vector<std::size_t> empty;
  for (std::size_t r = 0; r < kOutputRows; ++r) {
    if (out.rows[r].kind == RowKind::Kind::Empty) empty.push_back(r);
  }
  if (empty.empty() || anonymous.empty()) return out;

  Eigen::MatrixXd block(static_cast<Eigen::Index>(anonymous.size()), ds.points());
  for (std::size_t i = 0; i < anonymous.size(); ++i) {
    block.row(static_cast<Eigen::Index>(i)) = ds.values().row(static_cast<Eigen::Index>(anonymous[i]));
  }
  const PcaResult pca = pca_components(block, empty.size());

  for (Eigen::Index comp = 0; comp < pca.loadings.rows(); ++comp) {
    const std::size_t row = empty[static_cast<std::size_t>(comp)];
    PcaLoading loading;
    loading.row = row;
    loading.rank = static_cast<std::size_t>(comp);
    for (std::size_t i = 0; i < anonymous.size(); ++i) {
      const double w = pca.loadings(comp, static_cast<Eigen::Index>(i));
      out.F(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(anonymous[i])) = w;
      loading.coefficients.emplace_back(anonymous[i], w);
    }
    out.rows[row] = {RowKind::Kind::PcaComponent, loading.rank};
    out.pca.push_back(std::move(loading));
  }
  return out;
}

Eigen::MatrixXd apply_filter(const FilterMatrix& filter, const Dataset& ds) {
  if (filter.F.cols() != ds.dims()) {
    throw ProjectionError("filter matrix has " + std::to_string(filter.F.cols()) +
                          " columns but dataset has " + std::to_string(ds.dims()) + " dimensions");
  }
  Eigen::MatrixXd out = filter.F * ds.values();
  return out;
}

ProjectedData standardize(const Eigen::Ref<const Eigen::MatrixXd>& filtered) {
  if (filtered.rows() != static_cast<Eigen::Index>(kOutputRows)) {
    throw ProjectionError("expected " + std::to_string(kOutputRows) + " filtered rows, got " +
                          std::to_string(filtered.rows()));
  }
  const Eigen::Index N = filtered.cols();
  Eigen::MatrixXd z(filtered.rows(), N);
  ProjectedData out;
  out.row_stats.resize(kOutputRows);

  for (Eigen::Index r = 0; r < filtered.rows(); ++r) {
    const bool spatial = r < static_cast<Eigen::Index>(kSpatialAxes);
    const auto row = filtered.row(r);
    const double mean = N ? row.sum() / static_cast<double>(N) : 0.0;
    const double var = N ? (row.array() - mean).square().sum() / static_cast<double>(N) : 0.0;
    const double sd = std::sqrt(var);
    out.row_stats[static_cast<std::size_t>(r)] = {mean, sd};

    if (!(sd >= kDegenerateStd)) {
      out.degenerate_rows.insert(static_cast<std::size_t>(r));
      z.row(r).setConstant(spatial ? 0.5 : 0.0);
      continue;
    }
    z.row(r) = (row.array() - mean) / sd;
    if (spatial) z.row(r).array() += 0.5;
  }
  out.spatial = z.topRows(static_cast<Eigen::Index>(kSpatialAxes));
  out.visual = z.bottomRows(static_cast<Eigen::Index>(kVisualFeatures));
  return out;
}

ProjectedData project(const Dataset& ds, const DimensionAssignment& asgn) {
  return standardize(apply_filter(build_filter_matrix(ds, asgn), ds));
}

PcaReport pca_report(const Dataset& ds, const DimensionAssignment& asgn,
                     const PcaReportOptions& options) {
  require_valid(asgn, static_cast<std::size_t>(ds.dims()));
  std::vector<std::size_t> dims;
  for (const auto& e : asgn.entries) {
    const bool anon = std::holds_alternative<Anonymous>(e.role);
    const bool spatial = std::holds_alternative<Spatial>(e.role);
    if (anon || (spatial && options.scope == PcaScope::AnonymousAndSpatial)) dims.push_back(e.dim);
  }
  std::sort(dims.begin(), dims.end());
  if (dims.empty()) throw ProjectionError("no dimensions fall in the PCA scope");

  Eigen::MatrixXd block(static_cast<Eigen::Index>(dims.size()), ds.points());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    auto row = block.row(static_cast<Eigen::Index>(i));
    row = ds.values().row(static_cast<Eigen::Index>(dims[i]));
    if (!options.standardize_inputs) continue;
    const double mean = row.mean();
    const double sd = std::sqrt((row.array() - mean).square().mean());
    if (sd < kDegenerateStd) {
      row.setZero();
    } else {
      row = (row.array() - mean) / sd;
    }
  }

  const PcaResult pca = pca_components(block, dims.size());
  PcaReport report;
  for (auto d : dims) report.dimensions.push_back(ds.names()[d]);
  report.loadings = pca.loadings;
  report.standardized_inputs = options.standardize_inputs;
  report.scope = options.scope;
  for (Eigen::Index c = 0; c < pca.loadings.rows(); ++c) {
    const double s = pca.singular_values(c);
    report.explained_variance.push_back(pca.total_variance > 0.0 ? s * s / pca.total_variance : 0.0);
  }
  return report;
}

nlohmann::json pca_report_to_json(const PcaReport& report) {
  nlohmann::json j;
  j["names"] = report.dimensions;
  j["scope"] = report.scope == PcaScope::Anonymous ? "anonymous" : "anonymous+spatial";
  j["standardized_inputs"] = report.standardized_inputs;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index c = 0; c < report.loadings.rows(); ++c) {
    std::vector<double> row(report.loadings.row(c).begin(), report.loadings.row(c).end());
    rows.push_back(row);
  }
  j["loadings"] = std::move(rows);
  j["explained_variance"] = report.explained_variance;
  return j;
}

}  // namespace ndswarm
