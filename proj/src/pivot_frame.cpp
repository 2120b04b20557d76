#include "pfls/pivot_frame.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "pfls/error.hpp"

namespace pfls {

void PivotFrame::coefficients(std::span<const double> shifted_ips, std::span<double> out) const {
  const std::size_t k = this->k();
  for (std::size_t i = 0; i < k; ++i) {
    double s = shifted_ips[i];
    const double* t = tri_.data() + i * k;
    for (std::size_t j = 0; j < i; ++j) s -= out[j] * t[j];
    out[i] = s / denoms_[i];
  }
}

Projection PivotFrame::project(PointRef q) const {
  const auto& p = *provider_;
  p.validate(q);
  Projection out;
  out.sqnorm = p.ip(q, q);
  out.center_ip = center_.ip(q);
  const double cc = center_.self_ip();
  out.sqnorm_c = std::max(0.0, out.sqnorm - 2.0 * out.center_ip + cc);

  std::vector<double> shifted(k());
  for (std::size_t i = 0; i < k(); ++i) {
    const std::size_t r = pivot_ids_[i];
    shifted[i] = p.ip(q, PointRef::row(r)) - out.center_ip - center_.row_ip(r) + cc;
  }
  out.coeffs.resize(k());
  coefficients(shifted, out.coeffs);
  out.residual_sq = std::max(0.0, out.sqnorm_c - projected_sq_norm(out.coeffs));
  return out;
}

PivotFrame PivotFrame::restore(ProviderPtr provider, Center center, Tables t) {
  const std::size_t k = t.pivot_ids.size();
  const std::size_t n = provider->n();
  if (t.tri.size() != k * k || t.denoms.size() != k || t.coeffs.size() != n * k || t.residual.size() != n ||
      t.sqnorm_c.size() != n || t.sqnorm.size() != n) {
    throw FormatError("pivot frame tables have inconsistent sizes");
  }
  for (std::size_t id : t.pivot_ids) {
    if (id >= n) throw FormatError("pivot id out of range");
  }
  PivotFrame f(std::move(provider), std::move(center));
  f.pivot_ids_ = std::move(t.pivot_ids);
  f.tri_ = std::move(t.tri);
  f.denoms_ = std::move(t.denoms);
  f.coeffs_ = std::move(t.coeffs);
  f.residual_ = std::move(t.residual);
  f.sqnorm_c_ = std::move(t.sqnorm_c);
  f.sqnorm_ = std::move(t.sqnorm);
  return f;
}

FrameBuilder::FrameBuilder(ProviderPtr provider, Center center)
    : provider_(std::move(provider)), center_(std::move(center)) {}

bool FrameBuilder::try_add(std::size_t candidate) {
  const auto& p = *provider_;
  if (candidate >= p.n()) throw ParameterError("pivot candidate out of range");
  const auto r = PointRef::row(candidate);
  const double cc = center_.self_ip();
  const double cr = center_.row_ip(candidate);
  const double sq = p.ip(r, r) - 2.0 * cr + cc;
  if (!(sq > 0.0)) {
    warnings_.push_back("candidate " + std::to_string(candidate) + " coincides with the center; discarded");
    return false;
  }

  const std::size_t m = ids_.size();
  std::vector<double> row(m);
  double projected = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t pid = ids_[i];
    double s = p.ip(r, PointRef::row(pid)) - cr - center_.row_ip(pid) + cc;
    for (std::size_t j = 0; j < i; ++j) s -= row[j] * rows_[i][j];
    row[i] = s / denoms_[i];
    projected += row[i] * row[i];
  }
  const double residual = sq - projected;
  if (residual <= kDependenceThreshold * sq) return false;

  ids_.push_back(candidate);
  rows_.push_back(std::move(row));
  denoms_.push_back(std::sqrt(residual));
  return true;
}

PivotFrame FrameBuilder::finish() && {
  PivotFrame f(provider_, center_);
  const std::size_t k = ids_.size();
  const std::size_t n = provider_->n();
  f.pivot_ids_ = ids_;
  f.denoms_ = denoms_;
  f.warnings_ = std::move(warnings_);
  f.tri_.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) std::copy(rows_[i].begin(), rows_[i].end(), f.tri_.begin() + i * k);

  const auto& p = *provider_;
  const double cc = center_.self_ip();
  f.coeffs_.assign(n * k, 0.0);
  f.residual_.resize(n);
  f.sqnorm_c_.resize(n);
  f.sqnorm_.resize(n);
  std::vector<double> shifted(k);
  for (std::size_t x = 0; x < n; ++x) {
    const auto xr = PointRef::row(x);
    const double cx = center_.row_ip(x);
    f.sqnorm_[x] = p.ip(xr, xr);
    f.sqnorm_c_[x] = std::max(0.0, f.sqnorm_[x] - 2.0 * cx + cc);
    for (std::size_t i = 0; i < k; ++i) {
      shifted[i] = p.ip(xr, PointRef::row(ids_[i])) - cx - center_.row_ip(ids_[i]) + cc;
    }
    const std::span<double> out(f.coeffs_.data() + x * k, k);
    f.coefficients(shifted, out);
    f.residual_[x] = std::max(0.0, f.sqnorm_c_[x] - projected_sq_norm(out));
  }
  return f;
}

PivotFrame orthogonalize(ProviderPtr provider, std::span<const std::size_t> candidates, const Center& center) {
  std::unordered_set<std::size_t> seen;
  for (std::size_t c : candidates) {
    if (c >= provider->n()) throw ParameterError("pivot candidate out of range");
    if (!seen.insert(c).second) throw ParameterError("pivot candidates must be distinct");
  }
  FrameBuilder builder(std::move(provider), center);
  for (std::size_t c : candidates) builder.try_add(c);
  return std::move(builder).finish();
}

double projected_sq_norm(std::span<const double> coeffs) {
  double s = 0.0;
  for (double v : coeffs) s += v * v;
  return s;
}

double residual_gap(const ProjectionView& x, const ProjectionView& y) {
  const double gap = std::max(std::sqrt(x.residual_lo()) - std::sqrt(y.residual_hi()),
                              std::sqrt(y.residual_lo()) - std::sqrt(x.residual_hi()));
  return std::max(0.0, gap);
}

BoundsInterval ip_bounds(const PivotFrame& frame, const ProjectionView& x, const ProjectionView& y) {
  if (x.coeffs.size() != frame.k() || y.coeffs.size() != frame.k()) {
    throw ParameterError("projections were not built against this frame");
  }
  double mid = x.center_ip + y.center_ip - frame.center().self_ip();
  for (std::size_t i = 0; i < frame.k(); ++i) mid += x.coeffs[i] * y.coeffs[i];
  const double half = std::sqrt(x.residual_hi() * y.residual_hi());
  return {mid - half, mid + half, BoundsInterval::Kind::inner_product};
}

BoundsInterval sq_dist_bounds(const BoundsInterval& ip, double sq_x, double sq_y) {
  if (ip.kind != BoundsInterval::Kind::inner_product) throw ParameterError("expected an inner-product interval");
  const double roundoff = kSumRoundoff * (sq_x + sq_y + 2.0 * std::max(std::abs(ip.lo), std::abs(ip.hi)));
  return {std::max(0.0, sq_x + sq_y - 2.0 * ip.hi - roundoff), std::max(0.0, sq_x + sq_y - 2.0 * ip.lo + roundoff),
          BoundsInterval::Kind::squared_distance};
}

BoundsInterval dist_bounds(const BoundsInterval& ip, double sq_x, double sq_y) {
  const auto sq = sq_dist_bounds(ip, sq_x, sq_y);
  return {std::sqrt(sq.lo), std::sqrt(sq.hi), BoundsInterval::Kind::distance};
}

BoundsInterval projected_sq_dist_bounds(const ProjectionView& x, const ProjectionView& y) {
  if (x.coeffs.size() != y.coeffs.size()) throw ParameterError("projections come from different frames");
  double s = 0.0;
  for (std::size_t i = 0; i < x.coeffs.size(); ++i) {
    const double t = x.coeffs[i] - y.coeffs[i];
    s += t * t;
  }
  const double gap = residual_gap(x, y);
  const double far = std::sqrt(x.residual_hi()) + std::sqrt(y.residual_hi());
  return {s + gap * gap, s + far * far, BoundsInterval::Kind::squared_distance};
}

}  // namespace pfls
