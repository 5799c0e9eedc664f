#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace glasdi {

/// A point in parameter space. For the Burgers problem: (amplitude a, width w).
struct ParamPoint {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }

  friend bool operator==(const ParamPoint&, const ParamPoint&) = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Tensor-product grid of candidate parameters plus the inverse covariance
/// that defines the Mahalanobis metric. Points are stored row-major over
/// dimensions: the last dimension varies fastest.
class DiscreteParamSpace {
 public:
  DiscreteParamSpace(std::vector<Interval> bounds,
                     std::vector<std::size_t> resolution);

  std::size_t dim() const { return bounds_.size(); }
  std::size_t size() const { return points_.size(); }

  const std::vector<Interval>& bounds() const { return bounds_; }
  const std::vector<std::size_t>& resolution() const { return resolution_; }
  const std::vector<ParamPoint>& points() const { return points_; }
  const ParamPoint& point(std::size_t index) const { return points_.at(index); }
  const Eigen::MatrixXd& cov_inv() const { return cov_inv_; }

  /// Grid spacing along dimension d.
  double spacing(std::size_t d) const;

  std::size_t flat_index(const std::vector<std::size_t>& multi) const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;

  /// Index of the grid point equal to p (per-coordinate tolerance relative
  /// to spacing), if any.
  std::optional<std::size_t> index_of(const ParamPoint& p) const;

  /// True when p has the right dimension and lies inside the bounds.
  bool contains(const ParamPoint& p) const;

 private:
  std::vector<Interval> bounds_;
  std::vector<std::size_t> resolution_;
  std::vector<ParamPoint> points_;
  Eigen::MatrixXd cov_inv_;
};

/// Throws InvalidConfig on lo >= hi or resolution < 2.
DiscreteParamSpace build_grid(std::vector<Interval> bounds,
                              std::vector<std::size_t> resolution);

double mahalanobis_distance(const ParamPoint& p, const ParamPoint& q,
                            const Eigen::MatrixXd& cov_inv);
double mahalanobis_distance(const ParamPoint& p, const ParamPoint& q,
                            const DiscreteParamSpace& space);

/// The 2^dim extreme grid points, first dimension slowest.
std::vector<ParamPoint> corner_points(const DiscreteParamSpace& space);

/// Grid point nearest the center of the domain.
ParamPoint center_point(const DiscreteParamSpace& space);

}  // namespace glasdi
