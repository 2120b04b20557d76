#include <fstream>

#include "binary_io.hpp"
#include "pfls/error.hpp"
#include "pfls/index.hpp"

// Index container, all integers and doubles little endian. Layout in
// docs/index_format.md.

namespace pfls {

namespace {

constexpr char kMagic[4] = {'P', 'F', 'L', 'I'};
constexpr std::uint32_t kVersion = 1;

void write_ids(std::ostream& out, const std::vector<std::size_t>& ids) {
  detail::write_u64(out, ids.size());
  for (std::size_t id : ids) detail::write_u64(out, id);
}

void write_vec(std::ostream& out, const std::vector<double>& v) {
  detail::write_u64(out, v.size());
  detail::write_f64s(out, v);
}

std::vector<double> read_vec(std::istream& in, std::size_t limit, const char* what) {
  const std::uint64_t size = detail::read_u64(in, what);
  if (size > limit) throw FormatError(std::string("implausible length for ") + what);
  return detail::read_f64s(in, size, what);
}

}  // namespace

void PflsIndex::write(std::ostream& out) const {
  const auto& provider = *frame_.provider();
  const auto& spec = provider.spec();
  out.write(kMagic, 4);
  detail::write_u32(out, kVersion);

  detail::write_u32(out, static_cast<std::uint32_t>(spec.kind));
  detail::write_f64(out, spec.gamma);
  detail::write_u32(out, spec.degree);
  detail::write_f64(out, spec.offset);
  if (spec.kind == KernelKind::gram) {
    detail::write_u64(out, provider.n());
    detail::write_f64s(out, provider.gram_matrix());
  } else {
    const auto& data = *provider.dataset();
    detail::write_u64(out, data.n());
    detail::write_u64(out, data.d());
    detail::write_f64s(out, data.values());
  }

  const Center& c = frame_.center();
  detail::write_u32(out, static_cast<std::uint32_t>(c.spec().mode));
  detail::write_u64(out, c.spec().index);
  write_vec(out, c.spec().vector);
  detail::write_f64(out, c.self_ip());
  write_vec(out, c.row_ips());
  write_vec(out, c.mean_vector());

  detail::write_u64(out, seed_);
  detail::write_u64(out, k_requested_);

  write_ids(out, frame_.pivot_ids());
  detail::write_f64s(out, frame_.tri_table());
  detail::write_f64s(out, frame_.denoms());
  detail::write_f64s(out, frame_.point_coeffs());
  detail::write_f64s(out, frame_.point_residuals());
  detail::write_f64s(out, frame_.point_sqnorms_c());
  detail::write_f64s(out, frame_.point_sqnorms());
}

PflsIndex PflsIndex::read(std::istream& in) {
  char magic[4];
  detail::read_exact(in, magic, 4, "index magic");
  if (!std::equal(magic, magic + 4, kMagic)) throw FormatError("bad magic bytes; not a pfls index file");
  const std::uint32_t version = detail::read_u32(in, "index version");
  if (version != kVersion) throw FormatError("unsupported index version " + std::to_string(version));

  KernelSpec spec;
  const std::uint32_t kind = detail::read_u32(in, "kernel kind");
  if (kind > static_cast<std::uint32_t>(KernelKind::gram)) throw FormatError("unknown kernel kind");
  spec.kind = static_cast<KernelKind>(kind);
  spec.gamma = detail::read_f64(in, "kernel gamma");
  spec.degree = detail::read_u32(in, "kernel degree");
  spec.offset = detail::read_f64(in, "kernel offset");

  ProviderPtr provider;
  constexpr std::uint64_t kMaxValues = std::uint64_t(1) << 36;
  if (spec.kind == KernelKind::gram) {
    const std::uint64_t n = detail::read_u64(in, "gram size");
    if (n == 0 || n > (std::uint64_t(1) << 18)) throw FormatError("implausible gram size");
    provider = InnerProductProvider::gram(detail::read_f64s(in, n * n, "gram matrix"), n);
  } else {
    const std::uint64_t n = detail::read_u64(in, "dataset n");
    const std::uint64_t d = detail::read_u64(in, "dataset d");
    if (n == 0 || d == 0 || d > kMaxValues || n > kMaxValues / d) throw FormatError("implausible dataset shape");
    auto data = std::make_shared<const Dataset>(n, d, detail::read_f64s(in, n * d, "dataset values"));
    provider = InnerProductProvider::make(std::move(data), spec);
  }
  const std::size_t n = provider->n();

  CenterSpec cspec;
  const std::uint32_t mode = detail::read_u32(in, "center mode");
  if (mode > static_cast<std::uint32_t>(CenterSpec::Mode::explicit_vector)) throw FormatError("unknown center mode");
  cspec.mode = static_cast<CenterSpec::Mode>(mode);
  cspec.index = detail::read_u64(in, "center index");
  cspec.vector = read_vec(in, kMaxValues, "center vector");
  const double self_ip = detail::read_f64(in, "center self");
  auto row_ips = read_vec(in, n, "center row table");
  auto mean_vector = read_vec(in, kMaxValues, "center mean");
  Center center = Center::restore(provider, std::move(cspec), self_ip, std::move(row_ips), std::move(mean_vector));

  const std::uint64_t seed = detail::read_u64(in, "seed");
  const std::uint64_t k_requested = detail::read_u64(in, "requested k");

  PivotFrame::Tables t;
  const std::uint64_t k = detail::read_u64(in, "pivot count");
  if (k > n) throw FormatError("more pivots than points");
  t.pivot_ids.resize(k);
  for (auto& id : t.pivot_ids) id = detail::read_u64(in, "pivot id");
  t.tri = detail::read_f64s(in, k * k, "tri table");
  t.denoms = detail::read_f64s(in, k, "denominators");
  t.coeffs = detail::read_f64s(in, n * k, "point coefficients");
  t.residual = detail::read_f64s(in, n, "point residuals");
  t.sqnorm_c = detail::read_f64s(in, n, "point centered norms");
  t.sqnorm = detail::read_f64s(in, n, "point norms");

  return PflsIndex(PivotFrame::restore(provider, std::move(center), std::move(t)), k_requested, seed);
}

void PflsIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  write(out);
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

PflsIndex PflsIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return read(in);
}

}  // namespace pfls
