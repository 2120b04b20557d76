#include "pfls/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pfls/error.hpp"
#include "pfls/pivot_frame.hpp"
#include "pfls/random.hpp"

namespace pfls {

RowSpace::RowSpace(ProviderPtr provider, Center center, bool normalize)
    : provider_(std::move(provider)), center_(std::move(center)), normalize_(normalize) {
  const auto& p = *provider_;
  const double cc = center_.self_ip();
  for (std::size_t i = 0; i < p.n(); ++i) {
    const auto r = PointRef::row(i);
    const double sq = std::max(0.0, p.ip(r, r) - 2.0 * center_.row_ip(i) + cc);
    if (normalize_) {
      if (!(sq > 0.0)) {
        warnings_.push_back("row " + std::to_string(i) + " has zero norm and is excluded from normalization");
        continue;
      }
      rows_.push_back(i);
      sqnorm_.push_back(1.0);
      scale_.push_back(1.0 / std::sqrt(sq));
    } else {
      rows_.push_back(i);
      sqnorm_.push_back(sq);
      scale_.push_back(1.0);
    }
  }
  if (rows_.empty()) throw ParameterError("no rows with nonzero norm to normalize");
  total_var_ = std::accumulate(sqnorm_.begin(), sqnorm_.end(), 0.0) / double(rows_.size());
}

double RowSpace::ip(std::size_t a, std::size_t b) const {
  const std::size_t ra = rows_[a];
  const std::size_t rb = rows_[b];
  const double v = provider_->ip(PointRef::row(ra), PointRef::row(rb)) - center_.row_ip(ra) - center_.row_ip(rb) +
                   center_.self_ip();
  return v * scale_[a] * scale_[b];
}

namespace {

std::string centering_label(const RowSpace& space) {
  return space.center().is_origin() ? "origin" : space.center().spec().to_string();
}

void check_k(const RowSpace& space, std::size_t K) {
  if (K == 0) throw ParameterError("K must be at least 1");
  const std::size_t dim = space.provider().dim();
  if (dim != 0 && K > dim) throw ParameterError("K exceeds the ambient dimension");
  if (K > space.size()) throw ParameterError("K exceeds the number of points");
}

double log_binomial(std::size_t n, std::size_t k) {
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) - std::lgamma(double(n - k) + 1.0);
}

// Column provider over a RowSpace; materializes the full gram matrix when small.
class Columns {
 public:
  explicit Columns(const RowSpace& space) : space_(space), m_(space.size()) {
    if (m_ <= kCacheLimit) {
      cache_.resize(m_ * m_);
      for (std::size_t a = 0; a < m_; ++a) {
        for (std::size_t b = a; b < m_; ++b) {
          const double v = space_.ip(a, b);
          cache_[a * m_ + b] = v;
          cache_[b * m_ + a] = v;
        }
      }
    }
  }

  void fill(std::size_t r, std::vector<double>& out) const {
    out.resize(m_);
    if (!cache_.empty()) {
      std::copy_n(cache_.begin() + r * m_, m_, out.begin());
      return;
    }
    for (std::size_t x = 0; x < m_; ++x) out[x] = space_.ip(x, r);
  }

 private:
  static constexpr std::size_t kCacheLimit = 2048;
  const RowSpace& space_;
  std::size_t m_;
  std::vector<double> cache_;
};

// Per-level coefficient tables shared by the exhaustive and sampled estimators.
// coeffs[l][x] = <x - c, r̂_l> for the pivots chosen at levels 0..l.
struct CoefficientStack {
  explicit CoefficientStack(std::size_t levels, std::size_t m) : coeffs(levels, std::vector<double>(m)) {}

  // Tries pivot `r` at `level`; fills coeffs[level] and returns the covered
  // squared-norm sum of that direction, or a negative value if dependent.
  double push(std::size_t level, std::size_t r, const RowSpace& space, const Columns& columns,
              std::vector<double>& column) {
    const double g_rr = space.sqnorm(r);
    if (!(g_rr > 0.0)) return -1.0;
    double projected = 0.0;
    for (std::size_t j = 0; j < level; ++j) projected += coeffs[j][r] * coeffs[j][r];
    const double residual = g_rr - projected;
    if (residual <= kDependenceThreshold * g_rr) return -1.0;
    const double denom = std::sqrt(residual);
    columns.fill(r, column);
    auto& out = coeffs[level];
    double covered = 0.0;
    for (std::size_t x = 0; x < out.size(); ++x) {
      double s = column[x];
      for (std::size_t j = 0; j < level; ++j) s -= coeffs[j][x] * coeffs[j][r];
      out[x] = s / denom;
      covered += out[x] * out[x];
    }
    return covered;
  }

  std::vector<std::vector<double>> coeffs;
};

struct ExhaustiveWalk {
  const RowSpace& space;
  const Columns& columns;
  std::size_t K;
  CoefficientStack stack;
  std::vector<double> column;
  std::vector<double> sums;
  std::vector<std::uint64_t> counts;

  void descend(std::size_t level, std::size_t start, double parent_covered) {
    const std::size_t m = space.size();
    for (std::size_t r = start; r < m; ++r) {
      const double covered = stack.push(level, r, space, columns, column);
      if (covered < 0.0) continue;  // dependent; so is every superset
      const double total = parent_covered + covered;
      sums[level] += total / double(m);
      ++counts[level];
      if (level + 1 < K) descend(level + 1, r + 1, total);
    }
  }
};

void finish_increments(SpectralProfile& p) {
  p.E.resize(p.K);
  for (std::size_t k = 0; k < p.K; ++k) p.E[k] = p.Esum[k] - (k ? p.Esum[k - 1] : 0.0);
}

}  // namespace

std::string to_string(SpectralMethod method) {
  switch (method) {
    case SpectralMethod::exhaustive: return "exhaustive";
    case SpectralMethod::monte_carlo: return "monte-carlo";
    case SpectralMethod::eigen_approx: return "eigen-approx";
  }
  return "";
}

nlohmann::json to_json(const SpectralProfile& p) {
  nlohmann::json j;
  j["method"] = to_string(p.method);
  j["K"] = p.K;
  j["E"] = p.E;
  j["Esum"] = p.Esum;
  j["total_var"] = p.total_var;
  j["centering"] = p.centering;
  j["normalized"] = p.normalized;
  if (p.method == SpectralMethod::monte_carlo) {
    j["samples"] = p.samples;
    j["seed"] = p.seed;
    j["stderr"] = p.stderr_sum;
    j["stderr_E"] = p.stderr_E;
  }
  if (p.method == SpectralMethod::exhaustive) j["subsets"] = "unordered";
  if (p.method == SpectralMethod::monte_carlo) j["subsets"] = "ordered";
  if (!p.notes.empty()) j["notes"] = p.notes;
  return j;
}

SpectralProfile e_sigma_exhaustive(const RowSpace& space, std::size_t K) {
  check_k(space, K);
  const std::size_t m = space.size();
  double worst = 0.0;
  for (std::size_t k = 1; k <= K; ++k) worst = std::max(worst, log_binomial(m, k));
  if (worst > std::log(kExhaustiveBudget) + 1e-9) {
    throw BudgetError("exhaustive evaluation needs about " + std::to_string(std::llround(std::exp(worst))) +
                      " subsets (budget 1e6); use the Monte Carlo method instead");
  }

  const Columns columns(space);
  ExhaustiveWalk walk{space, columns, K, CoefficientStack(K, m), {}, std::vector<double>(K, 0.0),
                      std::vector<std::uint64_t>(K, 0)};
  walk.descend(0, 0, 0.0);

  SpectralProfile p;
  p.method = SpectralMethod::exhaustive;
  p.K = K;
  p.total_var = space.total_var();
  p.centering = centering_label(space);
  p.normalized = space.normalized();
  p.Esum.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (walk.counts[k] == 0) {
      p.Esum[k] = k ? p.Esum[k - 1] : 0.0;
      p.notes.push_back("no linearly independent subset of size " + std::to_string(k + 1));
    } else {
      p.Esum[k] = walk.sums[k] / double(walk.counts[k]);
    }
  }
  finish_increments(p);
  return p;
}

SpectralProfile e_sigma_monte_carlo(const RowSpace& space, std::size_t K, std::size_t samples, std::uint64_t seed,
                                    std::vector<std::vector<double>>* per_sample_cumulative) {
  check_k(space, K);
  if (samples == 0) throw ParameterError("Monte Carlo needs at least one sample");
  const std::size_t m = space.size();
  const Columns columns(space);
  CoefficientStack stack(K, m);
  std::vector<double> column;

  std::vector<double> cumulative(samples * K);
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng(derive_seed(seed, s));
    SparsePermutation draws(m);
    double running = 0.0;
    for (std::size_t level = 0; level < K;) {
      if (draws.exhausted()) {
        throw ParameterError("dataset has fewer than " + std::to_string(K) + " linearly independent points");
      }
      const double covered = stack.push(level, draws.next(rng), space, columns, column);
      if (covered < 0.0) continue;
      running += covered / double(m);
      cumulative[s * K + level] = running;
      ++level;
    }
  }

  SpectralProfile p;
  p.method = SpectralMethod::monte_carlo;
  p.K = K;
  p.samples = samples;
  p.seed = seed;
  p.total_var = space.total_var();
  p.centering = centering_label(space);
  p.normalized = space.normalized();
  p.Esum.assign(K, 0.0);
  p.stderr_sum.assign(K, 0.0);
  p.stderr_E.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double sum = 0.0, sum_inc = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      sum += cumulative[s * K + k];
      sum_inc += cumulative[s * K + k] - (k ? cumulative[s * K + k - 1] : 0.0);
    }
    const double mean = sum / double(samples);
    const double mean_inc = sum_inc / double(samples);
    p.Esum[k] = mean;
    if (samples > 1) {
      double var = 0.0, var_inc = 0.0;
      for (std::size_t s = 0; s < samples; ++s) {
        const double c = cumulative[s * K + k];
        const double inc = c - (k ? cumulative[s * K + k - 1] : 0.0);
        var += (c - mean) * (c - mean);
        var_inc += (inc - mean_inc) * (inc - mean_inc);
      }
      p.stderr_sum[k] = std::sqrt(var / double(samples - 1) / double(samples));
      p.stderr_E[k] = std::sqrt(var_inc / double(samples - 1) / double(samples));
    }
  }
  finish_increments(p);

  if (per_sample_cumulative) {
    per_sample_cumulative->assign(samples, std::vector<double>(K));
    for (std::size_t s = 0; s < samples; ++s) {
      std::copy_n(cumulative.begin() + s * K, K, (*per_sample_cumulative)[s].begin());
    }
  }
  return p;
}

SpectralProfile e_approx_from_spectrum(std::span<const double> lambdas, ApproxRecursion recursion,
                                       ApproxTrace* trace) {
  const std::size_t d = lambdas.size();
  if (d == 0) throw ParameterError("empty eigenvalue spectrum");
  double total = 0.0;
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ParameterError("eigenvalues must be finite and nonnegative");
    total += l;
  }
  if (!(total > 0.0)) throw ParameterError("eigenvalue spectrum is all zero");

  const double exponent = double(d) / double(d + 2);
  std::vector<double> lam_a(d, 1.0);
  std::vector<double> lam_c(d, 0.0);
  std::vector<double> prev_c(d, 0.0);
  std::vector<double> w(d);

  SpectralProfile p;
  p.method = SpectralMethod::eigen_approx;
  p.K = d;
  p.total_var = total;
  p.E.resize(d);
  p.Esum.resize(d);
  if (trace) {
    trace->lam_c.clear();
    trace->lam_a.clear();
  }

  double running = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double wsum = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double base = lambdas[i] * lam_a[i] * lam_a[i];
      w[i] = base > 0.0 ? std::pow(base, exponent) : 0.0;
      wsum += w[i];
    }
    double raw = 0.0;
    if (wsum > 0.0) {
      for (std::size_t i = 0; i < d; ++i) {
        lam_c[i] = w[i] / wsum;
        raw += lam_c[i] * lambdas[i];
      }
    } else {
      // Every direction with variance is used up.
      std::fill(lam_c.begin(), lam_c.end(), 1.0 / double(d));
    }
    // lam_a becomes A_k: shrunk by C_k, or by C_{k-1} in the lagged form.
    const auto& shrink = recursion == ApproxRecursion::self_consistent ? lam_c : prev_c;
    for (std::size_t i = 0; i < d; ++i) lam_a[i] = std::max(0.0, lam_a[i] - shrink[i]);
    prev_c = lam_c;

    const double e = std::max(0.0, std::min(raw, total - running));
    p.E[k] = e;
    running += e;
    p.Esum[k] = running;
    if (trace) {
      trace->lam_c.push_back(lam_c);
      trace->lam_a.push_back(lam_a);
    }
  }
  return p;
}

std::vector<double> covariance_spectrum(const Dataset& data, const CenterSpec& center, bool normalize) {
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(Eigen::Index(d));
  switch (center.mode) {
    case CenterSpec::Mode::none: break;
    case CenterSpec::Mode::mean:
      for (std::size_t i = 0; i < n; ++i) c += Eigen::Map<const Eigen::VectorXd>(data.row(i).data(), Eigen::Index(d));
      c /= double(n);
      break;
    case CenterSpec::Mode::point:
      if (center.index >= n) throw ParameterError("center point index out of range");
      c = Eigen::Map<const Eigen::VectorXd>(data.row(center.index).data(), Eigen::Index(d));
      break;
    case CenterSpec::Mode::explicit_vector:
      if (center.vector.size() != d) throw ParameterError("explicit center has wrong dimension");
      c = Eigen::Map<const Eigen::VectorXd>(center.vector.data(), Eigen::Index(d));
      break;
  }

  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(Eigen::Index(d), Eigen::Index(d));
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(data.row(i).data(), Eigen::Index(d)) - c;
    if (normalize) {
      const double norm = x.norm();
      if (!(norm > 0.0)) continue;
      x /= norm;
    }
    second.selfadjointView<Eigen::Lower>().rankUpdate(x);
    ++used;
  }
  if (used == 0) throw ParameterError("no rows with nonzero norm");
  second = second.selfadjointView<Eigen::Lower>();
  second /= double(used);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(second, Eigen::EigenvaluesOnly);
  std::vector<double> lambdas(d);
  for (std::size_t i = 0; i < d; ++i) lambdas[i] = std::max(0.0, solver.eigenvalues()[Eigen::Index(d - 1 - i)]);
  return lambdas;
}

IdEstimate abid(ProviderPtr provider, const AbidMethod& method) {
  IdEstimate out;
  out.estimator = IdEstimate::Estimator::abid;
  out.k = 1;
  double e1 = 0.0;
  if (method.kind == AbidMethod::Kind::eigen) {
    if (provider->spec().kind != KernelKind::dot) {
      throw UnsupportedError("eigen ABID needs explicit coordinates (dot provider)");
    }
    const auto lambdas = covariance_spectrum(*provider->dataset(), CenterSpec::none(), true);
    for (double l : lambdas) e1 += l * l;
  } else {
    const RowSpace space(provider, Center::resolve(provider, CenterSpec::none()), true);
    const auto profile = method.kind == AbidMethod::Kind::exhaustive
                             ? e_sigma_exhaustive(space, 1)
                             : e_sigma_monte_carlo(space, 1, method.samples, method.seed);
    e1 = profile.E[0];
  }
  if (!(e1 > 0.0)) {
    out.value = std::numeric_limits<double>::infinity();
    out.finite = false;
    return out;
  }
  out.value = 1.0 / e1;
  return out;
}

IdEstimate trip(const SpectralProfile& profile, std::size_t k, double eta) {
  if (k == 0 || k > profile.K) throw ParameterError("trip: k must lie in 1..K");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("trip: eta must lie in [0, 1]");
  IdEstimate out;
  out.estimator = IdEstimate::Estimator::trip;
  out.k = k;
  out.eta = eta;
  const double e_k = profile.E[k - 1];
  if (!(e_k > 0.0)) {
    out.value = std::numeric_limits<double>::infinity();
    out.finite = false;
    return out;
  }
  out.value = double(k) + ((1.0 - eta) * profile.total_var - profile.Esum[k - 1]) / e_k;
  return out;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw ParameterError("percentile of an empty set");
  if (!(pct >= 0.0 && pct <= 100.0)) throw ParameterError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * double(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - double(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double eta_from_nn(const InnerProductProvider& provider, const Center& center, double pct) {
  if (!(pct > 0.0 && pct < 100.0)) throw ParameterError("percentile must lie in (0, 100)");
  const std::size_t n = provider.n();
  if (n < 2) throw ParameterError("eta_from_nn needs at least two points");

  std::vector<double> nn(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = provider.sq_dist(PointRef::row(i), PointRef::row(j));
      nn[i] = std::min(nn[i], d2);
      nn[j] = std::min(nn[j], d2);
    }
  }

  const double cc = center.self_ip();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = PointRef::row(i);
    total += std::max(0.0, provider.ip(r, r) - 2.0 * center.row_ip(i) + cc);
  }
  total /= double(n);
  if (!(total > 0.0)) return 0.0;
  return std::clamp(percentile(std::move(nn), pct) / total, 0.0, 1.0);
}

PivotSuggestion suggest_pivots(const SpectralProfile& profile, double eta) {
  for (std::size_t k = 1; k <= profile.K; ++k) {
    const auto t = trip(profile, k, eta);
    if (t.finite && t.value <= double(k)) return {k, true};
  }
  return {profile.K, false};
}

}  // namespace pfls
