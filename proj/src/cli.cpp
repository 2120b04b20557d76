#include "pfls/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "pfls/dataset.hpp"
#include "pfls/error.hpp"
#include "pfls/index.hpp"
#include "pfls/random.hpp"
#include "pfls/spectral.hpp"

namespace pfls::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Interprets flag values; library parse errors become usage errors.
template <class F>
auto interpret(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::int64_t elapsed_ns(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

FileFormat resolve_format(const std::string& path, const std::string& flag) {
  if (flag != "auto") return interpret([&] { return parse_file_format(flag); });
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::memcmp(magic, "PFLS", 4) == 0 ? FileFormat::pfls_bin : FileFormat::csv;
}

Dataset load(const std::string& path, const std::string& format) {
  return load_dataset(path, resolve_format(path, format));
}

void log_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Search request shared by query and bench.
struct Search {
  std::optional<std::size_t> knn;
  std::optional<double> range;
  std::string kind_name;
  KnnKind knn_kind = KnnKind::smallest_distance;
  RangeKind range_kind = RangeKind::distance_within;

  void resolve() {
    if (knn.has_value() == range.has_value()) throw UsageError("exactly one of --knn or --range is required");
    if (knn) {
      if (*knn == 0) throw UsageError("--knn must be at least 1");
      if (kind_name.empty()) kind_name = "smallest-distance";
      try {
        knn_kind = parse_knn_kind(kind_name);
      } catch (const Error&) {
        throw UsageError("--kind " + kind_name + " is not a kNN kind");
      }
    } else {
      if (!std::isfinite(*range)) throw UsageError("--range must be finite");
      if (kind_name.empty()) kind_name = "distance-within";
      try {
        range_kind = parse_range_kind(kind_name);
      } catch (const Error&) {
        throw UsageError("--kind " + kind_name + " is not a range kind");
      }
      if (range_kind == RangeKind::distance_within && *range < 0.0) throw UsageError("--range must be >= 0");
    }
  }

  QueryResult run(const PflsIndex& index, std::span<const double> q) const {
    return knn ? index.knn(q, *knn, knn_kind) : index.range(q, *range, range_kind);
  }

  void add_options(CLI::App& app) {
    app.add_option("--knn", knn, "number of neighbors")->check(CLI::PositiveNumber);
    app.add_option("--range", range, "range threshold");
    app.add_option("--kind", kind_name,
                   "smallest-distance|largest-distance|smallest-ip|largest-ip|distance-within|ip-at-least|ip-at-most");
  }
};

// Exact answer ids by full scan, for spot-checking index output.
std::vector<std::size_t> brute_force_ids(const InnerProductProvider& p, std::span<const double> query,
                                         const Search& s) {
  const auto q = PointRef::vector(query);
  std::vector<std::size_t> ids;
  if (s.knn) {
    const bool distance = s.knn_kind == KnnKind::smallest_distance || s.knn_kind == KnnKind::largest_distance;
    const bool largest = s.knn_kind == KnnKind::largest_distance || s.knn_kind == KnnKind::largest_ip;
    std::vector<std::pair<double, std::size_t>> keyed(p.n());
    for (std::size_t x = 0; x < p.n(); ++x) {
      const auto xr = PointRef::row(x);
      const double v = distance ? std::sqrt(p.sq_dist(xr, q)) : p.ip(xr, q);
      keyed[x] = {largest ? -v : v, x};
    }
    const std::size_t n = std::min(*s.knn, p.n());
    std::partial_sort(keyed.begin(), keyed.begin() + std::ptrdiff_t(n), keyed.end());
    for (std::size_t i = 0; i < n; ++i) ids.push_back(keyed[i].second);
    std::sort(ids.begin(), ids.end());
    return ids;
  }
  for (std::size_t x = 0; x < p.n(); ++x) {
    const auto xr = PointRef::row(x);
    bool hit = false;
    switch (s.range_kind) {
      case RangeKind::distance_within: hit = std::sqrt(p.sq_dist(xr, q)) < *s.range; break;
      case RangeKind::ip_at_least: hit = p.ip(xr, q) >= *s.range; break;
      case RangeKind::ip_at_most: hit = p.ip(xr, q) <= *s.range; break;
    }
    if (hit) ids.push_back(x);
  }
  return ids;
}

struct BuildOptions {
  std::string input;
  std::string format = "auto";
  std::size_t pivots = 0;
  std::uint64_t seed = 0;
  std::string center = "none";
  std::string kernel = "dot";
  std::string out;
};

int cmd_build(const BuildOptions& o, std::ostream& out, std::ostream& err) {
  const auto kernel = interpret([&] { return KernelSpec::parse(o.kernel); });
  const auto center = interpret([&] { return CenterSpec::parse(o.center); });
  auto data = std::make_shared<const Dataset>(load(o.input, o.format));
  const auto provider = InnerProductProvider::make(data, kernel);

  const auto start = Clock::now();
  const auto index = PflsIndex::build(provider, o.pivots, center, o.seed);
  const auto build_ns = elapsed_ns(start);
  log_warnings(err, index.warnings());
  index.save(o.out);

  json j;
  j["retained"] = index.frame().k();
  j["requested"] = o.pivots;
  j["build_time_ns"] = build_ns;
  j["pivot_ids"] = index.frame().pivot_ids();
  j["warnings"] = index.warnings();
  out << j.dump() << '\n';
  return ok;
}

struct QueryOptions {
  std::string index;
  std::string queries;
  std::string format = "auto";
  Search search;
};

int cmd_query(QueryOptions o, std::ostream& out, std::ostream&) {
  o.search.resolve();
  const auto index = PflsIndex::load(o.index);
  const auto queries = load(o.queries, o.format);
  for (std::size_t i = 0; i < queries.n(); ++i) {
    const auto result = o.search.run(index, queries.row(i));
    json hits = json::array();
    for (const auto& h : result.hits) hits.push_back(json::array({h.id, h.value}));
    json line;
    line["query_index"] = i;
    line["hits"] = std::move(hits);
    line["stats"] = {{"exact_evals", result.stats.exact_evals}, {"time_ns", result.stats.total_time.count()}};
    out << line.dump() << '\n';
  }
  return ok;
}

struct BenchOptions {
  std::string input;
  std::string format = "auto";
  std::string queries;
  std::optional<double> holdout;
  std::string grid = "0";
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  std::string center = "none";
  std::string kernel = "dot";
  std::string json_path;
  bool reuse_index = false;
  Search search;
};

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size() || item.front() == '-') throw UsageError("invalid --pivot-grid entry '" + item + "'");
    grid.push_back(v);
  }
  if (grid.empty()) throw UsageError("--pivot-grid is empty");
  return grid;
}

constexpr std::uint64_t kHoldoutStream = 0x401d;

// Splits a fraction of rows off as queries, seeded.
std::pair<Dataset, Dataset> split_holdout(const Dataset& all, double fraction, std::uint64_t seed) {
  const std::size_t q = std::max<std::size_t>(1, std::size_t(std::llround(fraction * double(all.n()))));
  if (q >= all.n()) throw UsageError("--holdout leaves no data points");
  Rng rng(derive_seed(seed, kHoldoutStream));
  SparsePermutation draws(all.n());
  std::vector<char> is_query(all.n(), 0);
  for (std::size_t i = 0; i < q; ++i) is_query[draws.next(rng)] = 1;
  std::vector<std::size_t> data_ids, query_ids;
  for (std::size_t i = 0; i < all.n(); ++i) (is_query[i] ? query_ids : data_ids).push_back(i);
  return {all.subset(data_ids), all.subset(query_ids)};
}

template <class T>
json summary(const std::vector<T>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double sum = 0.0;
  for (const auto& x : v) sum += double(x);
  return {{"mean", sum / double(v.size())}, {"min", *lo}, {"max", *hi}};
}

int cmd_bench(BenchOptions o, std::ostream& out, std::ostream& err) {
  o.search.resolve();
  const auto kernel = interpret([&] { return KernelSpec::parse(o.kernel); });
  const auto center = interpret([&] { return CenterSpec::parse(o.center); });
  auto grid = parse_grid(o.grid);
  if (o.repeats == 0) throw UsageError("--repeats must be at least 1");
  if (o.queries.empty() == !o.holdout.has_value()) throw UsageError("exactly one of --queries or --holdout is required");
  if (o.holdout && !(*o.holdout > 0.0 && *o.holdout < 1.0)) throw UsageError("--holdout must lie in (0, 1)");

  auto all = load(o.input, o.format);
  std::shared_ptr<const Dataset> data;
  std::optional<Dataset> queries;
  if (o.holdout) {
    auto [d, q] = split_holdout(all, *o.holdout, o.seed);
    data = std::make_shared<const Dataset>(std::move(d));
    queries.emplace(std::move(q));
  } else {
    data = std::make_shared<const Dataset>(std::move(all));
    queries.emplace(load(o.queries, o.format));
  }
  const auto provider = InnerProductProvider::make(data, kernel);

  for (auto& k : grid) {
    if (kernel.kind == KernelKind::dot && k > data->d()) {
      err << "warning: pivot count " << k << " exceeds dimension " << data->d() << "; clamped\n";
      k = data->d();
    }
    if (k > data->n()) throw UsageError("pivot count " + std::to_string(k) + " exceeds dataset size");
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  // Exactness is spot-checked on about 1% of the queries, evenly spaced.
  const std::size_t nq = queries->n();
  const std::size_t stride = std::max<std::size_t>(1, nq / std::max<std::size_t>(1, (nq + 99) / 100));
  std::vector<std::size_t> verify;
  for (std::size_t i = 0; i < nq; i += stride) verify.push_back(i);
  std::vector<std::vector<std::size_t>> truth;
  for (std::size_t i : verify) truth.push_back(brute_force_ids(*provider, queries->row(i), o.search));

  json rows = json::array();
  out << "k,mean_retained,mean_exact_evals,min_exact_evals,max_exact_evals,mean_time_ns,min_time_ns,max_time_ns,"
         "recall,mean_build_time_ns\n";
  for (std::size_t k : grid) {
    std::vector<std::uint64_t> evals;
    std::vector<std::int64_t> times;
    std::vector<std::int64_t> builds;
    std::vector<std::size_t> retained;
    std::size_t found = 0, expected = 0;
    std::optional<PflsIndex> index;
    for (std::size_t r = 0; r < o.repeats; ++r) {
      if (!index || !o.reuse_index) {
        const auto start = Clock::now();
        index.emplace(PflsIndex::build(provider, k, center, derive_seed(o.seed, k, o.reuse_index ? 0 : r)));
        builds.push_back(elapsed_ns(start));
        retained.push_back(index->frame().k());
      }
      std::size_t next_verify = 0;
      for (std::size_t i = 0; i < nq; ++i) {
        const auto result = o.search.run(*index, queries->row(i));
        evals.push_back(result.stats.exact_evals);
        times.push_back(result.stats.total_time.count());
        if (next_verify < verify.size() && verify[next_verify] == i) {
          std::vector<std::size_t> ids;
          for (const auto& h : result.hits) ids.push_back(h.id);
          std::sort(ids.begin(), ids.end());
          const auto& want = truth[next_verify];
          std::vector<std::size_t> common;
          std::set_intersection(ids.begin(), ids.end(), want.begin(), want.end(), std::back_inserter(common));
          found += common.size() + (want.empty() && ids.empty() ? 1 : 0);
          expected += want.size() + (want.empty() ? 1 : 0);
          if (ids != want) err << "error: index result differs from brute force for query " << i << " at k=" << k << '\n';
          ++next_verify;
        }
      }
    }
    const double recall = double(found) / double(expected);
    const json e = summary(evals), t = summary(times), b = summary(builds), kr = summary(retained);
    out << k << ',' << kr["mean"].get<double>() << ',' << e["mean"].get<double>() << ',' << e["min"] << ','
        << e["max"] << ',' << t["mean"].get<double>() << ',' << t["min"] << ',' << t["max"] << ',' << recall << ','
        << b["mean"].get<double>() << '\n';
    rows.push_back({{"k", k},
                    {"retained", retained},
                    {"exact_evals", evals},
                    {"time_ns", times},
                    {"build_time_ns", builds},
                    {"recall", recall}});
  }

  if (!o.json_path.empty()) {
    json meta = {{"dataset_hash", hex(content_hash(*data))},
                 {"seed", o.seed},
                 {"query_count", nq},
                 {"n", data->n()},
                 {"d", data->d()},
                 {"repeats", o.repeats},
                 {"reuse_index", o.reuse_index},
                 {"kind", o.search.kind_name},
                 {"center", center.to_string()},
                 {"kernel", kernel.to_string()},
                 {"verified_queries", verify.size()}};
    if (o.search.knn) meta["knn"] = *o.search.knn;
    if (o.search.range) meta["range"] = *o.search.range;
    std::ofstream f(o.json_path);
    if (!f) throw FormatError("cannot write '" + o.json_path + "'");
    f << json{{"metadata", meta}, {"rows", rows}}.dump() << '\n';
    if (!f) throw FormatError("failed writing '" + o.json_path + "'");
  }
  return ok;
}

struct SpectrumOptions {
  std::string input;
  std::string format = "auto";
  std::string method = "exhaustive";
  std::optional<std::size_t> max_k;
  std::optional<double> eta;
  std::optional<double> eta_from_nn;
  std::uint64_t seed = 0;
  std::string center = "none";
  std::string kernel = "dot";
  bool normalize = false;
  std::string trip_csv;
};

int cmd_spectrum(const SpectrumOptions& o, std::ostream& out, std::ostream& err) {
  const auto kernel = interpret([&] { return KernelSpec::parse(o.kernel); });
  const auto center_spec = interpret([&] { return CenterSpec::parse(o.center); });
  if (o.eta && o.eta_from_nn) throw UsageError("--eta and --eta-from-nn are mutually exclusive");
  if (o.eta && !(*o.eta >= 0.0 && *o.eta <= 1.0)) throw UsageError("--eta must lie in [0, 1]");
  if (o.eta_from_nn && !(*o.eta_from_nn > 0.0 && *o.eta_from_nn < 100.0)) {
    throw UsageError("--eta-from-nn must lie in (0, 100)");
  }
  std::size_t samples = 0;
  SpectralMethod method = SpectralMethod::exhaustive;
  if (o.method == "exhaustive") {
    method = SpectralMethod::exhaustive;
  } else if (o.method == "eigen") {
    method = SpectralMethod::eigen_approx;
    if (kernel.kind != KernelKind::dot) throw UsageError("--method eigen needs --kernel dot");
  } else if (o.method.rfind("mc:", 0) == 0) {
    method = SpectralMethod::monte_carlo;
    const std::string digits = o.method.substr(3);
    std::size_t pos = 0;
    try {
      samples = std::stoull(digits, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != digits.size() || digits.front() == '-' || samples == 0) {
      throw UsageError("invalid --method '" + o.method + "' (expected exhaustive, mc:SAMPLES or eigen)");
    }
  } else {
    throw UsageError("invalid --method '" + o.method + "' (expected exhaustive, mc:SAMPLES or eigen)");
  }
  if (o.max_k && *o.max_k == 0) throw UsageError("--max-k must be at least 1");
  if (!o.max_k && kernel.kind != KernelKind::dot) throw UsageError("--max-k is required for kernels");

  const auto data = std::make_shared<const Dataset>(load(o.input, o.format));
  const auto provider = InnerProductProvider::make(data, kernel);
  const auto center = Center::resolve(provider, center_spec);

  SpectralProfile profile;
  std::vector<std::string> warnings;
  if (method == SpectralMethod::eigen_approx) {
    const auto lambdas = covariance_spectrum(*data, center_spec, o.normalize);
    profile = e_approx_from_spectrum(lambdas);
    profile.centering = center.is_origin() ? "origin" : center_spec.to_string();
    profile.normalized = o.normalize;
    if (o.max_k && *o.max_k < profile.K) {
      profile.K = *o.max_k;
      profile.E.resize(profile.K);
      profile.Esum.resize(profile.K);
    }
  } else {
    const RowSpace space(provider, center, o.normalize);
    warnings = space.warnings();
    std::size_t K = o.max_k.value_or(0);
    if (!o.max_k) K = std::min(data->d(), space.size());
    profile = method == SpectralMethod::exhaustive ? e_sigma_exhaustive(space, K)
                                                   : e_sigma_monte_carlo(space, K, samples, o.seed);
  }
  log_warnings(err, warnings);
  log_warnings(err, profile.notes);

  double eta = o.eta.value_or(0.0);
  if (o.eta_from_nn) {
    if (o.normalize) {
      // Noise level is measured on the same unit-norm rows the profile uses.
      if (kernel.kind != KernelKind::dot) throw UsageError("--eta-from-nn with --normalize needs --kernel dot");
      std::vector<double> values;
      std::size_t rows = 0;
      const auto c = Center::resolve(provider, center_spec);
      std::vector<double> cvec(data->d(), 0.0);
      if (!c.is_origin()) {
        if (center_spec.mode == CenterSpec::Mode::point) {
          const auto r = data->row(center_spec.index);
          cvec.assign(r.begin(), r.end());
        } else if (center_spec.mode == CenterSpec::Mode::mean) {
          cvec = c.mean_vector();
        } else {
          cvec = center_spec.vector;
        }
      }
      for (std::size_t i = 0; i < data->n(); ++i) {
        const auto r = data->row(i);
        double norm = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) norm += (r[j] - cvec[j]) * (r[j] - cvec[j]);
        if (!(norm > 0.0)) continue;
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < r.size(); ++j) values.push_back((r[j] - cvec[j]) / norm);
        ++rows;
      }
      const auto unit = std::make_shared<const Dataset>(rows, data->d(), std::move(values));
      const auto unit_provider = InnerProductProvider::make(unit, kernel);
      eta = eta_from_nn(*unit_provider, Center::resolve(unit_provider, CenterSpec::none()), *o.eta_from_nn);
    } else {
      eta = eta_from_nn(*provider, center, *o.eta_from_nn);
    }
  }

  json trip_rows = json::array();
  std::vector<double> trip_values;
  for (std::size_t k = 1; k <= profile.K; ++k) {
    const auto t = trip(profile, k, eta);
    trip_values.push_back(t.finite ? t.value : std::numeric_limits<double>::infinity());
    trip_rows.push_back({{"k", k}, {"trip", finite_or_null(t.value)}});
  }
  const auto suggestion = suggest_pivots(profile, eta);

  if (!o.trip_csv.empty()) {
    std::ofstream f(o.trip_csv);
    if (!f) throw FormatError("cannot write '" + o.trip_csv + "'");
    f << std::setprecision(17) << "k,trip\n";
    for (std::size_t k = 1; k <= trip_values.size(); ++k) f << k << ',' << trip_values[k - 1] << '\n';
    if (!f) throw FormatError("failed writing '" + o.trip_csv + "'");
  }

  json j;
  j["profile"] = to_json(profile);
  j["trip"] = std::move(trip_rows);
  j["suggested_k"] = suggestion.k;
  j["converged"] = suggestion.converged;
  j["eta"] = eta;
  j["warnings"] = warnings;
  out << j.dump() << '\n';
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pivot-frame linear scan: exact similarity search and spectral ID reports", "pfls"};
  app.require_subcommand(1);

  BuildOptions build;
  auto* b = app.add_subcommand("build", "build and save an index");
  b->add_option("--input", build.input, "dataset path")->required();
  b->add_option("--format", build.format, "csv|pfls-bin|auto");
  b->add_option("--pivots", build.pivots, "number of pivots");
  b->add_option("--seed", build.seed, "pivot sampling seed");
  b->add_option("--center", build.center, "none|mean|point:I");
  b->add_option("--kernel", build.kernel, "dot|rbf:G|poly:D,C");
  b->add_option("--out", build.out, "index output path")->required();

  QueryOptions query;
  auto* q = app.add_subcommand("query", "run queries against a saved index");
  q->add_option("--index", query.index, "index path")->required();
  q->add_option("--queries", query.queries, "query dataset path")->required();
  q->add_option("--format", query.format, "csv|pfls-bin|auto");
  query.search.add_options(*q);

  BenchOptions bench;
  auto* be = app.add_subcommand("bench", "sweep pivot counts and report query statistics");
  be->add_option("--input", bench.input, "dataset path")->required();
  be->add_option("--format", bench.format, "csv|pfls-bin|auto");
  be->add_option("--queries", bench.queries, "query dataset path");
  be->add_option("--holdout", bench.holdout, "fraction of rows split off as queries");
  be->add_option("--pivot-grid", bench.grid, "comma-separated pivot counts");
  be->add_option("--repeats", bench.repeats, "index draws per pivot count");
  be->add_option("--seed", bench.seed, "base seed");
  be->add_option("--center", bench.center, "none|mean|point:I");
  be->add_option("--kernel", bench.kernel, "dot|rbf:G|poly:D,C");
  be->add_option("--json", bench.json_path, "write full distributions as JSON");
  be->add_flag("--reuse-index", bench.reuse_index, "one index per pivot count");
  bench.search.add_options(*be);

  SpectrumOptions spectrum;
  auto* s = app.add_subcommand("spectrum", "spectral profile, TRIP curve and suggested pivot count");
  s->add_option("--input", spectrum.input, "dataset path")->required();
  s->add_option("--format", spectrum.format, "csv|pfls-bin|auto");
  s->add_option("--method", spectrum.method, "exhaustive|mc:SAMPLES|eigen");
  s->add_option("--max-k", spectrum.max_k, "largest k");
  s->add_option("--eta", spectrum.eta, "noise fraction");
  s->add_option("--eta-from-nn", spectrum.eta_from_nn, "percentile of squared 1-NN distances");
  s->add_option("--seed", spectrum.seed, "Monte Carlo seed");
  s->add_option("--center", spectrum.center, "none|mean|point:I");
  s->add_option("--kernel", spectrum.kernel, "dot|rbf:G|poly:D,C");
  s->add_flag("--normalize", spectrum.normalize, "scale rows to unit norm about the center");
  s->add_option("--trip-csv", spectrum.trip_csv, "write TRIP(k) as CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    if (b->parsed()) return cmd_build(build, out, err);
    if (q->parsed()) return cmd_query(query, out, err);
    if (be->parsed()) return cmd_bench(bench, out, err);
    return cmd_spectrum(spectrum, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return data_error;
  }
}

}  // namespace pfls::cli
