#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pfls/center.hpp"
#include "pfls/inner_product.hpp"

namespace pfls {

/// Centered, optionally normalized, inner products between dataset rows:
///   ip(a, b) = <x_a - c, x_b - c>            (normalize = false)
///   ip(a, b) = <x_a - c, x_b - c> / (|x_a - c| |x_b - c|)
/// With normalization, rows with zero norm are dropped (see warnings()).
class RowSpace {
 public:
  RowSpace(ProviderPtr provider, Center center, bool normalize = false);

  std::size_t size() const { return rows_.size(); }
  /// Indices are positions in rows(), not raw dataset ids.
  double ip(std::size_t a, std::size_t b) const;
  double sqnorm(std::size_t a) const { return sqnorm_[a]; }
  /// Mean squared norm = trace of the second-moment matrix about the center.
  double total_var() const { return total_var_; }
  bool normalized() const { return normalize_; }

  const std::vector<std::size_t>& rows() const { return rows_; }
  const Center& center() const { return center_; }
  const InnerProductProvider& provider() const { return *provider_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  ProviderPtr provider_;
  Center center_;
  bool normalize_;
  std::vector<std::size_t> rows_;
  std::vector<double> sqnorm_;
  std::vector<double> scale_;  // 1/|x - c| when normalizing, else 1
  double total_var_ = 0.0;
  std::vector<std::string> warnings_;
};

enum class SpectralMethod { exhaustive, monte_carlo, eigen_approx };

/// Expected covered variance for k = 1..K random in-distribution pivots.
/// E[k-1] is the increment of the k-th pivot, Esum[k-1] the running total.
struct SpectralProfile {
  SpectralMethod method = SpectralMethod::exhaustive;
  std::size_t K = 0;
  std::vector<double> E;
  std::vector<double> Esum;
  double total_var = 0.0;
  std::size_t samples = 0;           // monte carlo
  std::uint64_t seed = 0;            // monte carlo
  std::vector<double> stderr_sum;    // monte carlo: standard error of Esum[k]
  std::vector<double> stderr_E;      // monte carlo: standard error of E[k]
  std::string centering = "origin";
  bool normalized = false;
  std::vector<std::string> notes;
};

std::string to_string(SpectralMethod method);
nlohmann::json to_json(const SpectralProfile& profile);

/// Enumerates every unordered k-subset of rows (k <= K) whose shifted
/// vectors are linearly independent and averages the covered squared norm.
/// Refuses when max_k C(n, k) exceeds kExhaustiveBudget.
inline constexpr double kExhaustiveBudget = 1e6;
SpectralProfile e_sigma_exhaustive(const RowSpace& space, std::size_t K);

/// Averages over `samples` ordered K-tuples of distinct rows. Sample s uses
/// its own generator seeded from (seed, s); dependent draws are replaced.
/// When `per_sample_cumulative` is given it receives each sample's running
/// covered variance (samples x K).
SpectralProfile e_sigma_monte_carlo(const RowSpace& space, std::size_t K, std::size_t samples,
                                    std::uint64_t seed,
                                    std::vector<std::vector<double>>* per_sample_cumulative = nullptr);

enum class ApproxRecursion {
  /// A_k eigenvalues shrink by the current step's C_k eigenvalues.
  self_consistent,
  /// A_k eigenvalues shrink by the previous step's C_{k-1} eigenvalues.
  lagged,
};

struct ApproxTrace {
  std::vector<std::vector<double>> lam_c;  // per step k = 1..d
  std::vector<std::vector<double>> lam_a;  // per step k = 1..d
};

/// Approximates the E_k curve from covariance eigenvalues in O(d^2), assuming
/// the whitened data is spherically symmetric. Any excess over sum(lambdas)
/// is cut off.
SpectralProfile e_approx_from_spectrum(std::span<const double> lambdas,
                                       ApproxRecursion recursion = ApproxRecursion::self_consistent,
                                       ApproxTrace* trace = nullptr);

/// Eigenvalues (descending, clamped at 0) of (1/n) sum (x - c)(x - c)^T,
/// optionally after scaling each x - c to unit length. Dot provider only.
std::vector<double> covariance_spectrum(const Dataset& data, const CenterSpec& center, bool normalize = false);

struct IdEstimate {
  enum class Estimator { abid, trip };

  double value = 0.0;
  Estimator estimator = Estimator::abid;
  std::size_t k = 0;
  double eta = 0.0;
  bool finite = true;
};

struct AbidMethod {
  enum class Kind { exhaustive, monte_carlo, eigen };

  Kind kind = Kind::exhaustive;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  static AbidMethod exhaustive() { return {}; }
  static AbidMethod monte_carlo(std::size_t samples, std::uint64_t seed) {
    return {Kind::monte_carlo, samples, seed};
  }
  static AbidMethod eigen() { return {Kind::eigen, 0, 0}; }
};

/// Angle-based ID: reciprocal of E_1 on the row-normalized dataset.
IdEstimate abid(ProviderPtr provider, const AbidMethod& method);

/// k + ((1 - eta) * total_var - Esum_k) / E_k. Infinite (finite = false) when E_k = 0.
IdEstimate trip(const SpectralProfile& profile, std::size_t k, double eta);

/// Percentile (linear interpolation between closest ranks) of squared 1-NN
/// distances divided by the total variance about `center`, clamped to [0, 1].
double eta_from_nn(const InnerProductProvider& provider, const Center& center, double percentile);

/// Linear-interpolation percentile of `values` (copied and sorted).
double percentile(std::vector<double> values, double pct);

struct PivotSuggestion {
  std::size_t k = 0;
  bool converged = false;
};

/// Smallest k in 1..K with trip(profile, k, eta) <= k; K, unconverged, if none.
PivotSuggestion suggest_pivots(const SpectralProfile& profile, double eta);

}  // namespace pfls
