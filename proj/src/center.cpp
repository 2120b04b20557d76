#include "pfls/center.hpp"

#include <charconv>

#include "pfls/error.hpp"

namespace pfls {

CenterSpec CenterSpec::parse(std::string_view text) {
  if (text == "none") return none();
  if (text == "mean") return mean();
  if (text.starts_with("point:")) {
    const auto digits = text.substr(6);
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw ParameterError("invalid center point index '" + std::string(digits) + "'");
    }
    return point(index);
  }
  throw ParameterError("invalid center spec '" + std::string(text) + "' (expected none, mean or point:I)");
}

std::string CenterSpec::to_string() const {
  switch (mode) {
    case Mode::none: return "none";
    case Mode::mean: return "mean";
    case Mode::point: return "point:" + std::to_string(index);
    case Mode::explicit_vector: return "explicit";
  }
  return "none";
}

Center Center::resolve(ProviderPtr provider, const CenterSpec& spec) {
  Center c;
  c.spec_ = spec;
  c.provider_ = provider;
  const std::size_t n = provider->n();
  const auto& p = *provider;

  switch (spec.mode) {
    case CenterSpec::Mode::none:
      return c;

    case CenterSpec::Mode::point: {
      if (spec.index >= n) throw ParameterError("center point index out of range");
      c.row_ips_.resize(n);
      for (std::size_t i = 0; i < n; ++i) c.row_ips_[i] = p.ip(PointRef::row(spec.index), PointRef::row(i));
      c.self_ip_ = c.row_ips_[spec.index];
      return c;
    }

    case CenterSpec::Mode::explicit_vector: {
      if (!p.accepts_vectors()) throw UnsupportedError("explicit center vectors need a vector-capable provider");
      if (spec.vector.size() != p.dim()) throw ParameterError("explicit center has wrong dimension");
      const auto cv = PointRef::vector(spec.vector);
      c.row_ips_.resize(n);
      for (std::size_t i = 0; i < n; ++i) c.row_ips_[i] = p.ip(cv, PointRef::row(i));
      c.self_ip_ = p.ip(cv, cv);
      return c;
    }

    case CenterSpec::Mode::mean: {
      c.row_ips_.assign(n, 0.0);
      if (p.spec().kind == KernelKind::dot) {
        const auto& data = *p.dataset();
        c.mean_vector_.assign(data.d(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const auto r = data.row(i);
          for (std::size_t j = 0; j < r.size(); ++j) c.mean_vector_[j] += r[j];
        }
        for (double& v : c.mean_vector_) v /= double(n);
        const auto cv = PointRef::vector(c.mean_vector_);
        for (std::size_t i = 0; i < n; ++i) c.row_ips_[i] = p.ip(cv, PointRef::row(i));
        c.self_ip_ = p.ip(cv, cv);
        return c;
      }
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += p.ip(PointRef::row(j), PointRef::row(i));
        c.row_ips_[i] = s / double(n);
      }
      double s = 0.0;
      for (double v : c.row_ips_) s += v;
      c.self_ip_ = s / double(n);
      return c;
    }
  }
  return c;
}

Center Center::restore(ProviderPtr provider, CenterSpec spec, double self_ip, std::vector<double> row_ips,
                       std::vector<double> mean_vector) {
  Center c;
  c.provider_ = std::move(provider);
  c.spec_ = std::move(spec);
  c.self_ip_ = self_ip;
  c.row_ips_ = std::move(row_ips);
  c.mean_vector_ = std::move(mean_vector);
  if (!c.row_ips_.empty() && c.row_ips_.size() != c.provider_->n()) {
    throw FormatError("center table length does not match dataset size");
  }
  return c;
}

double Center::ip(PointRef q) const {
  if (q.kind() == PointRef::Kind::row && !row_ips_.empty()) return row_ips_[q.index()];
  const auto& p = *provider_;
  switch (spec_.mode) {
    case CenterSpec::Mode::none: return 0.0;
    case CenterSpec::Mode::point: return p.ip(PointRef::row(spec_.index), q);
    case CenterSpec::Mode::explicit_vector: return p.ip(PointRef::vector(spec_.vector), q);
    case CenterSpec::Mode::mean:
      if (!mean_vector_.empty()) return p.ip(PointRef::vector(mean_vector_), q);
      {
        double s = 0.0;
        for (std::size_t j = 0; j < p.n(); ++j) s += p.ip(PointRef::row(j), q);
        return s / double(p.n());
      }
  }
  return 0.0;
}

}  // namespace pfls
