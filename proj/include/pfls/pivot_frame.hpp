#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pfls/center.hpp"
#include "pfls/inner_product.hpp"

namespace pfls {

/// Relative residual below which a candidate pivot counts as linearly
/// dependent on the pivots already retained.
inline constexpr double kDependenceThreshold = 1e-10;

/// Residuals are computed as <x-c,x-c> - sum coeffs^2 and carry rounding error.
/// Bounds treat the residual of x as uncertain by this much relative to
/// <x-c,x-c>; without it a nearly in-span point can have its residual
/// understated, and the square root turns that into a visible bound error.
inline constexpr double kResidualRoundoff = 1e-13;

struct BoundsInterval {
  enum class Kind { inner_product, squared_distance, distance };

  double lo = 0.0;
  double hi = 0.0;
  Kind kind = Kind::inner_product;

  double width() const { return hi - lo; }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
};

/// A point expressed in a frame: <x-c, r̂_i> for each pivot direction plus the
/// scalars the bounds need.
struct ProjectionView {
  std::span<const double> coeffs;
  double residual_sq = 0.0;  // |x_perp|^2 = <x-c,x-c> - sum coeffs^2, clamped at 0
  double sqnorm_c = 0.0;     // <x-c, x-c>
  double center_ip = 0.0;    // <c, x>
  double sqnorm = 0.0;       // <x, x>

  // Without pivots the residual is <x-c,x-c> itself and needs no allowance.
  double residual_hi() const { return coeffs.empty() ? residual_sq : residual_sq + kResidualRoundoff * sqnorm_c; }
  double residual_lo() const {
    return coeffs.empty() ? residual_sq : std::max(0.0, residual_sq - kResidualRoundoff * sqnorm_c);
  }
};

struct Projection {
  std::vector<double> coeffs;
  double residual_sq = 0.0;
  double sqnorm_c = 0.0;
  double center_ip = 0.0;
  double sqnorm = 0.0;

  ProjectionView view() const { return {coeffs, residual_sq, sqnorm_c, center_ip, sqnorm}; }
};

/// Gram-Schmidt frame over retained pivots, held purely as inner-product
/// tables. The orthonormal directions r̂_i are never materialized:
///
///   tri(i,j) = <r_i - c, r̂_j>                            (j < i)
///   denom(i) = |(r_i - c) - sum_{j<i} tri(i,j) r̂_j|
///   <x-c, r̂_i> = (<x-c, r_i-c> - sum_{j<i} <x-c, r̂_j> tri(i,j)) / denom(i)
///
/// Coefficients for every dataset row are computed when the frame is built.
class PivotFrame {
 public:
  std::size_t k() const { return pivot_ids_.size(); }
  std::size_t n() const { return residual_.size(); }

  const std::vector<std::size_t>& pivot_ids() const { return pivot_ids_; }
  double tri(std::size_t i, std::size_t j) const { return tri_[i * k() + j]; }
  const std::vector<double>& tri_table() const { return tri_; }
  const std::vector<double>& denoms() const { return denoms_; }
  const Center& center() const { return center_; }
  const ProviderPtr& provider() const { return provider_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  ProjectionView point(std::size_t x) const {
    return {std::span<const double>(coeffs_.data() + x * k(), k()), residual_[x], sqnorm_c_[x],
            center_.row_ip(x), sqnorm_[x]};
  }

  /// Coefficients, residual and norms of an arbitrary point; costs k + 1
  /// inner products plus O(k^2) arithmetic.
  Projection project(PointRef q) const;

  // Flat tables, exposed for serialization.
  const std::vector<double>& point_coeffs() const { return coeffs_; }
  const std::vector<double>& point_residuals() const { return residual_; }
  const std::vector<double>& point_sqnorms_c() const { return sqnorm_c_; }
  const std::vector<double>& point_sqnorms() const { return sqnorm_; }

  struct Tables {
    std::vector<std::size_t> pivot_ids;
    std::vector<double> tri, denoms, coeffs, residual, sqnorm_c, sqnorm;
  };
  static PivotFrame restore(ProviderPtr provider, Center center, Tables tables);

 private:
  friend class FrameBuilder;
  PivotFrame(ProviderPtr provider, Center center) : provider_(std::move(provider)), center_(std::move(center)) {}

  void coefficients(std::span<const double> shifted_ips, std::span<double> out) const;

  ProviderPtr provider_;
  Center center_;
  std::vector<std::size_t> pivot_ids_;
  std::vector<double> tri_;     // k x k row-major, strictly lower part used
  std::vector<double> denoms_;  // k
  std::vector<double> coeffs_;  // n x k row-major
  std::vector<double> residual_;
  std::vector<double> sqnorm_c_;
  std::vector<double> sqnorm_;
  std::vector<std::string> warnings_;
};

/// Incremental orthogonalization; candidates are offered one at a time.
class FrameBuilder {
 public:
  FrameBuilder(ProviderPtr provider, Center center);

  /// Retains `candidate` unless its residual squared norm is at most
  /// kDependenceThreshold times <r-c, r-c> (or r = c). Returns whether it was kept.
  bool try_add(std::size_t candidate);
  std::size_t retained() const { return ids_.size(); }

  /// Fills the per-point tables for all rows.
  PivotFrame finish() &&;

 private:
  ProviderPtr provider_;
  Center center_;
  std::vector<std::size_t> ids_;
  std::vector<std::vector<double>> rows_;  // tri rows, row i has i entries
  std::vector<double> denoms_;
  std::vector<std::string> warnings_;
};

/// Orthogonalizes `candidates` in order, discarding dependent ones.
PivotFrame orthogonalize(ProviderPtr provider, std::span<const std::size_t> candidates, const Center& center);

double projected_sq_norm(std::span<const double> coeffs);

/// Smallest possible |sqrt(res_x) - sqrt(res_y)| over the residual allowances.
double residual_gap(const ProjectionView& x, const ProjectionView& y);

/// Relative rounding allowance on <x,x> + <y,y> - 2<x,y>.
inline constexpr double kSumRoundoff = 1e-15;

/// Interval containing <x, y>:
///   <c,x> + <c,y> - <c,c> + sum_i coeffs_x[i] coeffs_y[i]  ±  sqrt(res_x * res_y)
/// with each residual taken at its upper roundoff allowance.
BoundsInterval ip_bounds(const PivotFrame& frame, const ProjectionView& x, const ProjectionView& y);

/// Distance interval from an inner-product interval and the squared norms,
/// via |x-y|^2 = <x,x> + <y,y> - 2<x,y>, widened by the rounding of that sum.
BoundsInterval dist_bounds(const BoundsInterval& ip, double sq_x, double sq_y);
BoundsInterval sq_dist_bounds(const BoundsInterval& ip, double sq_x, double sq_y);

/// Same squared-distance interval written without cancellation:
///   sum_i (coeffs_x[i] - coeffs_y[i])^2 + (sqrt(res_x) ∓ sqrt(res_y))^2
/// where the lower end uses the gap between the residual allowance intervals.
BoundsInterval projected_sq_dist_bounds(const ProjectionView& x, const ProjectionView& y);

}  // namespace pfls
