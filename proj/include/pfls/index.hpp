#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pfls/center.hpp"
#include "pfls/inner_product.hpp"
#include "pfls/pivot_frame.hpp"

namespace pfls {

enum class KnnKind { smallest_distance, largest_distance, smallest_ip, largest_ip };
enum class RangeKind { distance_within, ip_at_least, ip_at_most };

KnnKind parse_knn_kind(std::string_view name);
RangeKind parse_range_kind(std::string_view name);
std::string_view to_string(KnnKind kind);
std::string_view to_string(RangeKind kind);

/// Relative safety margin applied to every bound before it is used to prune
/// or to decide a point. Keeps floating-point rounding in the frame tables
/// from excluding a true result.
inline constexpr double kBoundSlack = 1e-9;

/// How range queries report values of points decided by their bounds alone.
enum class RangeValues {
  /// Evaluate the exact value after the decision (counted in value_evals).
  exact,
  /// Report the midpoint of the bound interval; no extra evaluations.
  bounds,
};

struct Hit {
  std::size_t id = 0;
  double value = 0.0;
  /// False when the value is a bound-interval midpoint (RangeValues::bounds).
  bool exact = true;

  friend bool operator==(const Hit&, const Hit&) = default;
};

struct QueryStats {
  /// Evaluations needed to decide membership; the pruning metric.
  std::uint64_t exact_evals = 0;
  /// Range queries: evaluations made only to report values of bound-decided hits.
  std::uint64_t value_evals = 0;
  std::uint64_t candidates_scanned = 0;
  std::chrono::nanoseconds bound_time{0};
  std::chrono::nanoseconds total_time{0};
  /// kNN only: more neighbors were requested than the dataset holds.
  bool truncated = false;
};

struct QueryResult {
  std::vector<Hit> hits;
  QueryStats stats;
};

/// Exact linear-scan index that filters candidates with pivot-projection bounds.
///
/// kNN queries sort all points by the pruning bound and stop as soon as the
/// next bound cannot beat the current n-th best; range queries only evaluate
/// points whose interval straddles the threshold.
class PflsIndex {
 public:
  /// Draws `k` pivots uniformly without replacement (seeded). A dependent
  /// draw is discarded and replaced by the next draw until k pivots are
  /// retained or every point has been tried. For the dot kernel k is clamped to d.
  static PflsIndex build(ProviderPtr provider, std::size_t k, const CenterSpec& center, std::uint64_t seed);

  /// Exact top-n by the requested kind. Ties go to the smaller id.
  QueryResult knn(PointRef query, std::size_t n, KnnKind kind) const;
  QueryResult knn(std::span<const double> query, std::size_t n, KnnKind kind) const {
    return knn(PointRef::vector(query), n, kind);
  }

  /// Every point satisfying the predicate, in id order:
  ///   distance_within  d(x,q) <  eps
  ///   ip_at_least      <x,q>  >= eps
  ///   ip_at_most       <x,q>  <= eps
  QueryResult range(PointRef query, double eps, RangeKind kind, RangeValues values = RangeValues::exact) const;
  QueryResult range(std::span<const double> query, double eps, RangeKind kind,
                    RangeValues values = RangeValues::exact) const {
    return range(PointRef::vector(query), eps, kind, values);
  }

  /// Per-point lower bound of the kNN sort key (distance for smallest-distance,
  /// negated upper distance bound for largest-distance, and so on), including
  /// the safety margin. kNN queries scan candidates in ascending order of it.
  std::vector<double> pruning_bounds(const Projection& query, KnnKind kind) const;

  const PivotFrame& frame() const { return frame_; }
  const ProviderPtr& provider() const { return frame_.provider(); }
  std::size_t n() const { return frame_.n(); }
  std::size_t k_requested() const { return k_requested_; }
  std::uint64_t seed() const { return seed_; }
  const CenterSpec& center_spec() const { return frame_.center().spec(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  void write(std::ostream& out) const;
  static PflsIndex read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static PflsIndex load(const std::filesystem::path& path);

 private:
  PflsIndex(PivotFrame frame, std::size_t k_requested, std::uint64_t seed)
      : frame_(std::move(frame)), k_requested_(k_requested), seed_(seed) {}

  PivotFrame frame_;
  std::size_t k_requested_;
  std::uint64_t seed_;
  std::vector<std::string> warnings_;
};

}  // namespace pfls
