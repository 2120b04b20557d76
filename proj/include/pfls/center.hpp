#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pfls/inner_product.hpp"

namespace pfls {

/// Where the affine shift c sits. `none` is the origin (non-affine case).
struct CenterSpec {
  enum class Mode { none, mean, point, explicit_vector };

  Mode mode = Mode::none;
  std::size_t index = 0;       // point
  std::vector<double> vector;  // explicit_vector

  static CenterSpec none() { return {}; }
  static CenterSpec mean() { return {Mode::mean, 0, {}}; }
  static CenterSpec point(std::size_t i) { return {Mode::point, i, {}}; }
  static CenterSpec explicit_vector(std::vector<double> v) { return {Mode::explicit_vector, 0, std::move(v)}; }

  /// Parses "none", "mean" or "point:I".
  static CenterSpec parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const CenterSpec&, const CenterSpec&) = default;
};

/// Resolved center: <c,c> and <c,x> for every dataset row are tabulated once,
/// <c,q> for other points is evaluated on demand.
///
/// In kernel spaces the mean is never materialized; it is represented by
/// averaged inner products <c,x> = (1/n) sum_j <x_j,x>.
class Center {
 public:
  static Center resolve(ProviderPtr provider, const CenterSpec& spec);
  /// Rebuilds a center from tabulated values (deserialization).
  static Center restore(ProviderPtr provider, CenterSpec spec, double self_ip, std::vector<double> row_ips,
                        std::vector<double> mean_vector);

  const CenterSpec& spec() const { return spec_; }
  bool is_origin() const { return spec_.mode == CenterSpec::Mode::none; }

  double self_ip() const { return self_ip_; }
  double row_ip(std::size_t i) const { return row_ips_.empty() ? 0.0 : row_ips_[i]; }
  double ip(PointRef q) const;

  const std::vector<double>& row_ips() const { return row_ips_; }
  const std::vector<double>& mean_vector() const { return mean_vector_; }

 private:
  Center() = default;

  ProviderPtr provider_;
  CenterSpec spec_;
  double self_ip_ = 0.0;
  std::vector<double> row_ips_;      // empty for the origin
  std::vector<double> mean_vector_;  // explicit mean, dot provider only
};

}  // namespace pfls
