#include "pfls/index.hpp"

#include <algorithm>
#include <cmath>

#include "pfls/error.hpp"
#include "pfls/random.hpp"

namespace pfls {

namespace {

using Clock = std::chrono::steady_clock;

bool is_distance(KnnKind kind) {
  return kind == KnnKind::smallest_distance || kind == KnnKind::largest_distance;
}

bool is_largest(KnnKind kind) { return kind == KnnKind::largest_distance || kind == KnnKind::largest_ip; }

// Bounds of one dataset point against a projected query, with the safety
// margin already applied.
struct PointBounds {
  double lo;
  double hi;
  double mid;  // unslackened interval midpoint
};

class BoundEvaluator {
 public:
  BoundEvaluator(const PivotFrame& frame, const Projection& q)
      : frame_(frame), q_(q), qv_(q.view()), cc_(frame.center().self_ip()), rq_hi_(std::sqrt(qv_.residual_hi())) {}

  PointBounds distance(std::size_t x) const {
    const auto p = frame_.point(x);
    double s = 0.0;
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
      const double t = p.coeffs[i] - q_.coeffs[i];
      s += t * t;
    }
    const double gap = residual_gap(p, qv_);
    const double far = std::sqrt(p.residual_hi()) + rq_hi_;
    const double lo_sq = s + gap * gap;
    const double hi_sq = s + far * far;
    const double slack = kBoundSlack * (p.sqnorm_c + q_.sqnorm_c);
    return {std::sqrt(std::max(0.0, lo_sq - slack)), std::sqrt(hi_sq + slack),
            0.5 * (std::sqrt(lo_sq) + std::sqrt(hi_sq))};
  }

  PointBounds inner_product(std::size_t x) const {
    const auto p = frame_.point(x);
    double mid = p.center_ip + q_.center_ip - cc_;
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) mid += p.coeffs[i] * q_.coeffs[i];
    const double half = std::sqrt(p.residual_hi() * qv_.residual_hi());
    const double slack = kBoundSlack * (p.sqnorm_c + q_.sqnorm_c + std::abs(p.center_ip) +
                                        std::abs(q_.center_ip) + std::abs(cc_));
    return {mid - half - slack, mid + half + slack, mid};
  }

 private:
  const PivotFrame& frame_;
  const Projection& q_;
  ProjectionView qv_;
  double cc_;
  double rq_hi_;
};

struct HeapEntry {
  double key;
  std::size_t id;
  double value;
};

// Max-heap on (key, id): the root is the current worst result.
bool heap_less(const HeapEntry& a, const HeapEntry& b) {
  return a.key < b.key || (a.key == b.key && a.id < b.id);
}

}  // namespace

KnnKind parse_knn_kind(std::string_view name) {
  if (name == "smallest-distance") return KnnKind::smallest_distance;
  if (name == "largest-distance") return KnnKind::largest_distance;
  if (name == "smallest-ip") return KnnKind::smallest_ip;
  if (name == "largest-ip") return KnnKind::largest_ip;
  throw ParameterError("unknown kNN kind '" + std::string(name) + "'");
}

RangeKind parse_range_kind(std::string_view name) {
  if (name == "distance-within") return RangeKind::distance_within;
  if (name == "ip-at-least") return RangeKind::ip_at_least;
  if (name == "ip-at-most") return RangeKind::ip_at_most;
  throw ParameterError("unknown range kind '" + std::string(name) + "'");
}

std::string_view to_string(KnnKind kind) {
  switch (kind) {
    case KnnKind::smallest_distance: return "smallest-distance";
    case KnnKind::largest_distance: return "largest-distance";
    case KnnKind::smallest_ip: return "smallest-ip";
    case KnnKind::largest_ip: return "largest-ip";
  }
  return "";
}

std::string_view to_string(RangeKind kind) {
  switch (kind) {
    case RangeKind::distance_within: return "distance-within";
    case RangeKind::ip_at_least: return "ip-at-least";
    case RangeKind::ip_at_most: return "ip-at-most";
  }
  return "";
}

PflsIndex PflsIndex::build(ProviderPtr provider, std::size_t k, const CenterSpec& center, std::uint64_t seed) {
  if (!provider) throw ParameterError("index requires a provider");
  const std::size_t n = provider->n();
  if (k > n) {
    throw ParameterError("requested " + std::to_string(k) + " pivots but the dataset has only " +
                         std::to_string(n) + " points");
  }
  std::vector<std::string> warnings;
  if (provider->spec().kind == KernelKind::dot && k > provider->dim()) {
    warnings.push_back("requested " + std::to_string(k) + " pivots exceeds dimension " +
                       std::to_string(provider->dim()) + "; clamped");
    k = provider->dim();
  }

  FrameBuilder builder(provider, Center::resolve(provider, center));
  Rng rng(seed);
  SparsePermutation draws(n);
  while (builder.retained() < k && !draws.exhausted()) builder.try_add(draws.next(rng));

  PflsIndex index(std::move(builder).finish(), k, seed);
  index.warnings_ = std::move(warnings);
  for (const auto& w : index.frame_.warnings()) index.warnings_.push_back(w);
  if (index.frame_.k() < k) {
    index.warnings_.push_back("only " + std::to_string(index.frame_.k()) +
                              " linearly independent pivots found");
  }
  return index;
}

std::vector<double> PflsIndex::pruning_bounds(const Projection& query, KnnKind kind) const {
  const BoundEvaluator bounds(frame_, query);
  std::vector<double> out(n());
  for (std::size_t x = 0; x < n(); ++x) {
    const PointBounds b = is_distance(kind) ? bounds.distance(x) : bounds.inner_product(x);
    out[x] = is_largest(kind) ? -b.hi : b.lo;
  }
  return out;
}

QueryResult PflsIndex::knn(PointRef query, std::size_t n, KnnKind kind) const {
  if (n == 0) throw ParameterError("kNN query needs n >= 1");
  const auto start = Clock::now();
  QueryResult result;
  if (n > this->n()) {
    result.stats.truncated = true;
    n = this->n();
  }
  const auto& provider = *frame_.provider();
  const Projection q = frame_.project(query);
  const std::vector<double> bound = pruning_bounds(q, kind);

  std::vector<std::size_t> order(this->n());
  for (std::size_t x = 0; x < order.size(); ++x) order[x] = x;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bound[a] < bound[b] || (bound[a] == bound[b] && a < b);
  });
  result.stats.bound_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);

  const bool distance = is_distance(kind);
  const double sign = is_largest(kind) ? -1.0 : 1.0;
  std::vector<HeapEntry> heap;
  heap.reserve(n + 1);
  for (std::size_t x : order) {
    if (heap.size() == n && !(bound[x] < heap.front().key)) break;
    ++result.stats.candidates_scanned;
    const auto xr = PointRef::row(x);
    const double value = distance ? std::sqrt(provider.sq_dist(xr, query)) : provider.ip(xr, query);
    ++result.stats.exact_evals;
    const HeapEntry entry{sign * value, x, value};
    if (heap.size() < n) {
      heap.push_back(entry);
      std::push_heap(heap.begin(), heap.end(), heap_less);
    } else if (heap_less(entry, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), heap_less);
      heap.back() = entry;
      std::push_heap(heap.begin(), heap.end(), heap_less);
    }
  }

  std::sort_heap(heap.begin(), heap.end(), heap_less);
  result.hits.reserve(heap.size());
  for (const auto& e : heap) result.hits.push_back({e.id, e.value, true});
  result.stats.total_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  return result;
}

QueryResult PflsIndex::range(PointRef query, double eps, RangeKind kind, RangeValues values) const {
  if (!std::isfinite(eps)) throw ParameterError("range threshold must be finite");
  if (kind == RangeKind::distance_within && eps < 0.0) throw ParameterError("distance threshold must be >= 0");
  const auto start = Clock::now();
  QueryResult result;
  const auto& provider = *frame_.provider();
  const Projection q = frame_.project(query);
  const BoundEvaluator bounds(frame_, q);
  result.stats.bound_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  auto decided = [&](std::size_t x, double mid, bool distance) {
    if (values == RangeValues::bounds) {
      result.hits.push_back({x, mid, false});
      return;
    }
    ++result.stats.value_evals;
    const auto xr = PointRef::row(x);
    result.hits.push_back({x, distance ? std::sqrt(provider.sq_dist(xr, query)) : provider.ip(xr, query), true});
  };

  for (std::size_t x = 0; x < n(); ++x) {
    ++result.stats.candidates_scanned;
    const auto xr = PointRef::row(x);
    switch (kind) {
      case RangeKind::distance_within: {
        const PointBounds b = bounds.distance(x);
        if (!(b.lo < eps)) break;
        if (b.hi < eps) {
          decided(x, b.mid, kind == RangeKind::distance_within);
          break;
        }
        ++result.stats.exact_evals;
        const double d = std::sqrt(provider.sq_dist(xr, query));
        if (d < eps) result.hits.push_back({x, d, true});
        break;
      }
      case RangeKind::ip_at_least: {
        const PointBounds b = bounds.inner_product(x);
        if (!(b.hi >= eps)) break;
        if (b.lo >= eps) {
          decided(x, b.mid, kind == RangeKind::distance_within);
          break;
        }
        ++result.stats.exact_evals;
        const double v = provider.ip(xr, query);
        if (v >= eps) result.hits.push_back({x, v, true});
        break;
      }
      case RangeKind::ip_at_most: {
        const PointBounds b = bounds.inner_product(x);
        if (!(b.lo <= eps)) break;
        if (b.hi <= eps) {
          decided(x, b.mid, kind == RangeKind::distance_within);
          break;
        }
        ++result.stats.exact_evals;
        const double v = provider.ip(xr, query);
        if (v <= eps) result.hits.push_back({x, v, true});
        break;
      }
    }
  }
  result.stats.total_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  return result;
}

}  // namespace pfls
