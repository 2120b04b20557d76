#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pfls/dataset.hpp"

namespace pfls {

enum class KernelKind { dot, rbf, polynomial, gram };

/// Which inner product a provider evaluates.
///   dot         <a,b>
///   rbf         exp(-gamma * |a-b|^2)
///   polynomial  (<a,b> + offset)^degree
///   gram        lookup in a precomputed symmetric n x n matrix
struct KernelSpec {
  KernelKind kind = KernelKind::dot;
  double gamma = 0.0;
  unsigned degree = 0;
  double offset = 0.0;

  static KernelSpec dot() { return {}; }
  static KernelSpec rbf(double gamma) { return {KernelKind::rbf, gamma, 0, 0.0}; }
  static KernelSpec polynomial(unsigned degree, double offset) {
    return {KernelKind::polynomial, 0.0, degree, offset};
  }

  /// Parses "dot", "rbf:GAMMA" or "poly:DEGREE,OFFSET".
  static KernelSpec parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// A query point for a gram provider: its inner products with every dataset
/// row plus its own squared norm.
struct GramColumn {
  std::vector<double> column;
  double self = 0.0;
};

/// Reference to an operand of an inner product: a dataset row, an explicit
/// vector, or a gram-matrix query column. Non-owning.
class PointRef {
 public:
  enum class Kind { row, vector, gram_column };

  static PointRef row(std::size_t index) { return PointRef(Kind::row, index, {}, nullptr); }
  static PointRef vector(std::span<const double> values) { return PointRef(Kind::vector, 0, values, nullptr); }
  static PointRef gram_column(const GramColumn& g) { return PointRef(Kind::gram_column, 0, {}, &g); }

  Kind kind() const { return kind_; }
  std::size_t index() const { return index_; }
  std::span<const double> values() const { return values_; }
  const GramColumn& gram() const { return *gram_; }

 private:
  PointRef(Kind kind, std::size_t index, std::span<const double> values, const GramColumn* gram)
      : kind_(kind), index_(index), values_(values), gram_(gram) {}

  Kind kind_;
  std::size_t index_;
  std::span<const double> values_;
  const GramColumn* gram_;
};

/// Evaluates inner products between dataset rows and query points. Immutable
/// after construction apart from the evaluation counter, which is atomic.
class InnerProductProvider {
 public:
  static std::shared_ptr<const InnerProductProvider> make(std::shared_ptr<const Dataset> data,
                                                          const KernelSpec& spec);
  /// `matrix` is n x n row-major; validated symmetric with nonnegative diagonal.
  static std::shared_ptr<const InnerProductProvider> gram(std::vector<double> matrix, std::size_t n);

  /// Both refs are validated first (see validate()).
  double ip(PointRef a, PointRef b) const;
  /// <a-b, a-b>; evaluated directly for the dot kernel, via the kernel trick otherwise.
  double sq_dist(PointRef a, PointRef b) const;

  const KernelSpec& spec() const { return spec_; }
  std::size_t n() const { return n_; }
  /// Ambient dimension of explicit vectors; 0 for gram providers.
  std::size_t dim() const { return data_ ? data_->d() : 0; }
  bool accepts_vectors() const { return spec_.kind != KernelKind::gram; }

  const std::shared_ptr<const Dataset>& dataset() const { return data_; }
  const std::vector<double>& gram_matrix() const { return gram_; }

  /// Throws if `p` cannot be used with this provider (range, dimension, kind).
  void validate(PointRef p) const;

  /// Number of ip/sq_dist calls made so far.
  std::uint64_t evaluations() const { return evaluations_.load(std::memory_order_relaxed); }

  InnerProductProvider(const InnerProductProvider&) = delete;
  InnerProductProvider& operator=(const InnerProductProvider&) = delete;

 private:
  InnerProductProvider(std::shared_ptr<const Dataset> data, KernelSpec spec, std::vector<double> gram, std::size_t n);

  std::span<const double> coords(PointRef p) const;
  double raw_ip(PointRef a, PointRef b) const;
  double gram_ip(PointRef a, PointRef b) const;
  void check_symmetry_sample() const;

  std::shared_ptr<const Dataset> data_;
  KernelSpec spec_;
  std::vector<double> gram_;
  std::size_t n_;
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

using ProviderPtr = std::shared_ptr<const InnerProductProvider>;

/// Gram matrix of `provider` over all dataset rows (n x n row-major).
std::vector<double> gram_matrix_of(const InnerProductProvider& provider);

}  // namespace pfls
