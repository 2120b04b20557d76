#include "pfls/inner_product.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "pfls/error.hpp"
#include "pfls/random.hpp"

namespace pfls {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ParameterError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double int_pow(double base, unsigned exponent) {
  double result = 1.0;
  while (exponent) {
    if (exponent & 1u) result *= base;
    base *= base;
    exponent >>= 1u;
  }
  return result;
}

}  // namespace

KernelSpec KernelSpec::parse(std::string_view text) {
  if (text == "dot") return dot();
  if (text.starts_with("rbf:")) {
    const double gamma = parse_number(text.substr(4), "rbf gamma");
    if (!(gamma > 0.0)) throw ParameterError("rbf gamma must be positive");
    return rbf(gamma);
  }
  if (text.starts_with("poly:")) {
    const auto rest = text.substr(5);
    const auto comma = rest.find(',');
    if (comma == std::string_view::npos) throw ParameterError("polynomial kernel expects poly:DEGREE,OFFSET");
    const double degree = parse_number(rest.substr(0, comma), "polynomial degree");
    const double offset = parse_number(rest.substr(comma + 1), "polynomial offset");
    if (degree < 1.0 || degree != std::floor(degree) || degree > 64.0) {
      throw ParameterError("polynomial degree must be a positive integer");
    }
    if (offset < 0.0) throw ParameterError("polynomial offset must be nonnegative");
    return polynomial(static_cast<unsigned>(degree), offset);
  }
  throw ParameterError("invalid kernel spec '" + std::string(text) + "' (expected dot, rbf:G or poly:D,C)");
}

std::string KernelSpec::to_string() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case KernelKind::dot: out << "dot"; break;
    case KernelKind::rbf: out << "rbf:" << gamma; break;
    case KernelKind::polynomial: out << "poly:" << degree << ',' << offset; break;
    case KernelKind::gram: out << "gram"; break;
  }
  return out.str();
}

InnerProductProvider::InnerProductProvider(std::shared_ptr<const Dataset> data, KernelSpec spec,
                                           std::vector<double> gram, std::size_t n)
    : data_(std::move(data)), spec_(spec), gram_(std::move(gram)), n_(n) {}

std::shared_ptr<const InnerProductProvider> InnerProductProvider::make(std::shared_ptr<const Dataset> data,
                                                                       const KernelSpec& spec) {
  if (!data) throw ParameterError("provider requires a dataset");
  if (spec.kind == KernelKind::gram) throw ParameterError("use InnerProductProvider::gram for gram matrices");
  if (spec.kind == KernelKind::rbf && !(spec.gamma > 0.0)) throw ParameterError("rbf gamma must be positive");
  if (spec.kind == KernelKind::polynomial && (spec.degree == 0 || spec.offset < 0.0)) {
    throw ParameterError("polynomial kernel needs degree >= 1 and offset >= 0");
  }
  const std::size_t n = data->n();
  std::shared_ptr<const InnerProductProvider> p(new InnerProductProvider(std::move(data), spec, {}, n));
  if (spec.kind != KernelKind::dot) p->check_symmetry_sample();
  return p;
}

std::shared_ptr<const InnerProductProvider> InnerProductProvider::gram(std::vector<double> matrix, std::size_t n) {
  if (n == 0 || matrix.size() != n * n) throw FormatError("gram matrix must be n x n with n >= 1");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(matrix[i * n + i] >= 0.0)) throw FormatError("gram matrix has a negative diagonal entry");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(matrix[i * n + j])) throw FormatError("gram matrix has a non-finite entry");
      if (matrix[i * n + j] != matrix[j * n + i]) throw FormatError("gram matrix is not symmetric");
    }
  }
  KernelSpec spec;
  spec.kind = KernelKind::gram;
  return std::shared_ptr<const InnerProductProvider>(new InnerProductProvider(nullptr, spec, std::move(matrix), n));
}

void InnerProductProvider::check_symmetry_sample() const {
  Rng rng(0x5EED5EEDull);
  for (int t = 0; t < 100; ++t) {
    const auto a = PointRef::row(rng.below(n_));
    const auto b = PointRef::row(rng.below(n_));
    const double ab = raw_ip(a, b);
    const double ba = raw_ip(b, a);
    if (std::abs(ab - ba) > 1e-12 * std::max(std::abs(ab), std::abs(ba))) {
      throw UnsupportedError("kernel is not symmetric on sampled pairs");
    }
    if (raw_ip(a, a) < 0.0) throw UnsupportedError("kernel is not positive semidefinite on sampled points");
  }
}

void InnerProductProvider::validate(PointRef p) const {
  switch (p.kind()) {
    case PointRef::Kind::row:
      if (p.index() >= n_) throw ParameterError("row index out of range");
      return;
    case PointRef::Kind::vector:
      if (!accepts_vectors()) throw UnsupportedError("gram provider cannot evaluate explicit vectors");
      if (p.values().size() != data_->d()) {
        throw ParameterError("dimension mismatch: expected " + std::to_string(data_->d()) + ", got " +
                             std::to_string(p.values().size()));
      }
      return;
    case PointRef::Kind::gram_column:
      if (accepts_vectors()) throw UnsupportedError("gram query columns require a gram provider");
      if (p.gram().column.size() != n_) throw ParameterError("gram query column has wrong length");
      return;
  }
}

std::span<const double> InnerProductProvider::coords(PointRef p) const {
  return p.kind() == PointRef::Kind::row ? data_->row(p.index()) : p.values();
}

double InnerProductProvider::gram_ip(PointRef a, PointRef b) const {
  using K = PointRef::Kind;
  if (a.kind() == K::vector || b.kind() == K::vector) {
    throw UnsupportedError("gram provider cannot evaluate explicit vectors");
  }
  if (a.kind() == K::row && b.kind() == K::row) return gram_[a.index() * n_ + b.index()];
  if (a.kind() == K::row) return b.gram().column[a.index()];
  if (b.kind() == K::row) return a.gram().column[b.index()];
  if (&a.gram() == &b.gram()) return a.gram().self;
  throw UnsupportedError("gram provider cannot relate two different query columns");
}

double InnerProductProvider::raw_ip(PointRef a, PointRef b) const {
  if (spec_.kind == KernelKind::gram) return gram_ip(a, b);
  if (a.kind() == PointRef::Kind::gram_column || b.kind() == PointRef::Kind::gram_column) {
    throw UnsupportedError("gram query columns require a gram provider");
  }
  const auto x = coords(a);
  const auto y = coords(b);
  switch (spec_.kind) {
    case KernelKind::dot: return dot(x, y);
    case KernelKind::rbf: return std::exp(-spec_.gamma * squared_distance(x, y));
    case KernelKind::polynomial: return int_pow(dot(x, y) + spec_.offset, spec_.degree);
    case KernelKind::gram: break;
  }
  return 0.0;
}

double InnerProductProvider::ip(PointRef a, PointRef b) const {
  validate(a);
  validate(b);
  evaluations_.fetch_add(1, std::memory_order_relaxed);
  return raw_ip(a, b);
}

double InnerProductProvider::sq_dist(PointRef a, PointRef b) const {
  validate(a);
  validate(b);
  evaluations_.fetch_add(1, std::memory_order_relaxed);
  if (spec_.kind == KernelKind::dot && a.kind() != PointRef::Kind::gram_column &&
      b.kind() != PointRef::Kind::gram_column) {
    return squared_distance(coords(a), coords(b));
  }
  return std::max(0.0, raw_ip(a, a) + raw_ip(b, b) - 2.0 * raw_ip(a, b));
}

std::vector<double> gram_matrix_of(const InnerProductProvider& provider) {
  const std::size_t n = provider.n();
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = provider.ip(PointRef::row(i), PointRef::row(j));
      g[i * n + j] = v;
      g[j * n + i] = v;
    }
  }
  return g;
}

}  // namespace pfls
