#include "glasdi/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "glasdi/errors.hpp"

namespace glasdi {

namespace {

// Zero-variance dimensions get this added to the diagonal before inversion.
constexpr double kVarianceFloor = 1e-12;

double grid_coordinate(const Interval& iv, std::size_t n, std::size_t k) {
  if (k + 1 == n) return iv.hi;
  return iv.lo + static_cast<double>(k) * (iv.hi - iv.lo) / static_cast<double>(n - 1);
}

}  // namespace

DiscreteParamSpace::DiscreteParamSpace(std::vector<Interval> bounds,
                                       std::vector<std::size_t> resolution)
    : bounds_(std::move(bounds)), resolution_(std::move(resolution)) {
  if (bounds_.empty()) throw InvalidConfig("parameter space needs at least one dimension");
  if (bounds_.size() != resolution_.size()) {
    throw InvalidConfig("bounds and resolution have different lengths");
  }
  for (std::size_t d = 0; d < bounds_.size(); ++d) {
    if (!(bounds_[d].lo < bounds_[d].hi)) {
      throw InvalidConfig("degenerate interval in parameter dimension " + std::to_string(d));
    }
    if (resolution_[d] < 2) {
      throw InvalidConfig("resolution must be >= 2 in parameter dimension " + std::to_string(d));
    }
  }

  std::size_t total = 1;
  for (auto n : resolution_) total *= n;
  points_.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    auto multi = multi_index(flat);
    ParamPoint p;
    p.values.resize(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
      p.values[d] = grid_coordinate(bounds_[d], resolution_[d], multi[d]);
    }
    points_.push_back(std::move(p));
  }

  const auto n = static_cast<Eigen::Index>(total);
  const auto m = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < m; ++d) x(i, d) = points_[i].values[d];
  }
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  for (Eigen::Index d = 0; d < m; ++d) {
    if (cov(d, d) == 0.0) cov(d, d) += kVarianceFloor;
  }
  cov_inv_ = cov.ldlt().solve(Eigen::MatrixXd::Identity(m, m));
  cov_inv_ = 0.5 * (cov_inv_ + cov_inv_.transpose()).eval();
}

double DiscreteParamSpace::spacing(std::size_t d) const {
  return (bounds_.at(d).hi - bounds_.at(d).lo) / static_cast<double>(resolution_.at(d) - 1);
}

std::size_t DiscreteParamSpace::flat_index(const std::vector<std::size_t>& multi) const {
  if (multi.size() != dim()) throw DimensionMismatch("multi-index has wrong dimension");
  std::size_t flat = 0;
  for (std::size_t d = 0; d < dim(); ++d) {
    if (multi[d] >= resolution_[d]) throw DimensionMismatch("multi-index out of range");
    flat = flat * resolution_[d] + multi[d];
  }
  return flat;
}

std::vector<std::size_t> DiscreteParamSpace::multi_index(std::size_t flat) const {
  std::vector<std::size_t> multi(dim());
  for (std::size_t d = dim(); d-- > 0;) {
    multi[d] = flat % resolution_[d];
    flat /= resolution_[d];
  }
  return multi;
}

std::optional<std::size_t> DiscreteParamSpace::index_of(const ParamPoint& p) const {
  if (p.dim() != dim()) return std::nullopt;
  std::vector<std::size_t> multi(dim());
  for (std::size_t d = 0; d < dim(); ++d) {
    const double h = spacing(d);
    const double k = std::round((p.values[d] - bounds_[d].lo) / h);
    if (k < 0 || k >= static_cast<double>(resolution_[d])) return std::nullopt;
    multi[d] = static_cast<std::size_t>(k);
    const double snapped = grid_coordinate(bounds_[d], resolution_[d], multi[d]);
    if (std::abs(snapped - p.values[d]) > 1e-9 * h) return std::nullopt;
  }
  return flat_index(multi);
}

bool DiscreteParamSpace::contains(const ParamPoint& p) const {
  if (p.dim() != dim()) return false;
  for (std::size_t d = 0; d < dim(); ++d) {
    const double slack = 1e-12 * (bounds_[d].hi - bounds_[d].lo);
    if (p.values[d] < bounds_[d].lo - slack || p.values[d] > bounds_[d].hi + slack) return false;
  }
  return true;
}

DiscreteParamSpace build_grid(std::vector<Interval> bounds, std::vector<std::size_t> resolution) {
  return DiscreteParamSpace(std::move(bounds), std::move(resolution));
}

double mahalanobis_distance(const ParamPoint& p, const ParamPoint& q,
                            const Eigen::MatrixXd& cov_inv) {
  if (p.dim() != q.dim() || static_cast<Eigen::Index>(p.dim()) != cov_inv.rows() ||
      cov_inv.rows() != cov_inv.cols()) {
    throw DimensionMismatch("mahalanobis_distance: dimension mismatch");
  }
  Eigen::VectorXd diff(static_cast<Eigen::Index>(p.dim()));
  for (std::size_t d = 0; d < p.dim(); ++d) diff[d] = p.values[d] - q.values[d];
  const double quad = diff.dot(cov_inv * diff);
  return std::sqrt(std::max(quad, 0.0));
}

double mahalanobis_distance(const ParamPoint& p, const ParamPoint& q,
                            const DiscreteParamSpace& space) {
  return mahalanobis_distance(p, q, space.cov_inv());
}

std::vector<ParamPoint> corner_points(const DiscreteParamSpace& space) {
  const std::size_t dim = space.dim();
  std::vector<ParamPoint> corners;
  corners.reserve(std::size_t{1} << dim);
  for (std::size_t mask = 0; mask < (std::size_t{1} << dim); ++mask) {
    std::vector<std::size_t> multi(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      const bool high = (mask >> (dim - 1 - d)) & 1U;
      multi[d] = high ? space.resolution()[d] - 1 : 0;
    }
    corners.push_back(space.point(space.flat_index(multi)));
  }
  return corners;
}

ParamPoint center_point(const DiscreteParamSpace& space) {
  std::vector<std::size_t> multi(space.dim());
  for (std::size_t d = 0; d < space.dim(); ++d) multi[d] = (space.resolution()[d] - 1) / 2;
  return space.point(space.flat_index(multi));
}

}  // namespace glasdi
