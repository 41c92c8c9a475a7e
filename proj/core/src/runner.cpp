#include "idslab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "idslab/measure_text.hpp"
#include "idslab/svg.hpp"

namespace idslab {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Interval certainly containing the spectrum (Gershgorin discs of the
// symmetric matrix).
std::pair<double, double> gershgorin(const LatticeOperator& A) {
  const auto& m = A.matrix();
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (int j = 0; j < m.outerSize(); ++j) {
    double diag = 0.0, radius = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, j); it; ++it) {
      if (it.row() == j) {
        diag = it.value();
      } else {
        radius += std::abs(it.value());
      }
    }
    if (first || diag - radius < lo) lo = diag - radius;
    if (first || diag + radius > hi) hi = diag + radius;
    first = false;
  }
  return {lo, hi};
}

GridSpec resolve_grid(const ExperimentConfig& cfg, const std::string& ref, const GridSpec& fallback) {
  if (ref.empty()) return fallback;
  if (const GridSpec* g = cfg.find_grid(ref)) return *g;
  std::string err;
  auto g = parse_grid_literal(ref, &err);
  if (!g) throw std::invalid_argument("grid '" + ref + "': " + err);
  return *g;
}

// Law of coupling * a_site * omega for omega distributed as `base`.
Measure folded_measure(const Measure& base, double factor) {
  if (factor == 0.0) throw std::invalid_argument("disorder factor is zero");
  return factor == 1.0 ? base : base.scaled(1.0 / factor);
}

GridSpec union_support_grid(const Measure& a, const Measure& b) {
  const auto [al, ah] = a.support();
  const auto [bl, bh] = b.support();
  GridSpec g;
  g.x_min = std::min(al, bl) - 1.0;
  g.x_max = std::max(ah, bh) + 1.0;
  return g;
}

// Auto grid for d_nu estimation on a quadrature-averaged box measure. The
// window ratio of such a mixture is only meaningful in a middle band of
// scales: below the atomization scale windows resolve individual quadrature
// atoms and the ratio climbs, while windows wider than the per-node humps
// cover them whole and the ratio falls off as 1/eps^alpha. The mixture
// carries nodes-per-branch atoms per eigenvalue branch, so the lower edge
// keeps several atom spacings inside a window; the upper edge scales with
// the spectral width. An explicit [grids] entry overrides this default.
GridSpec averaged_auto_grid(const LatticeOperator& A, const Measure& mu_eff, int quad_nodes) {
  const auto [glo, ghi] = gershgorin(A);
  const auto [mlo, mhi] = mu_eff.support();
  GridSpec g;
  g.x_min = glo + std::min(0.0, mlo) - 1.0;
  g.x_max = ghi + std::max(0.0, mhi) + 1.0;
  const double width = (g.x_max - 1.0) - (g.x_min + 1.0);
  const double atoms = static_cast<double>(std::max(1, quad_nodes)) * A.size();
  g.eps_min = std::min(std::max(width / 250.0, 5.0 * width / atoms), width / 8.0);
  g.eps_max = std::min(std::max(width / 40.0, 5.0 * g.eps_min), width / 2.0);
  g.eps_count = 21;
  g.log_eps = true;
  return g;
}

bool looks_geometric(const std::vector<double>& v) {
  if (v.size() < 3 || !(v.front() > 0.0)) return false;
  const double r0 = v[1] / v[0];
  const double r1 = v[v.size() - 1] / v[v.size() - 2];
  return std::abs(r0 - r1) <= 1e-6 * r0;
}

struct Sink {
  std::string dir;
  std::vector<std::string>* names;

  void put(const std::string& name, const std::string& content) const {
    write_text_file(dir + "/" + name, content);
    names->push_back(name);
  }
};

void run_one_check(const ExperimentConfig& cfg, const CheckSpec& c, int idx, int workers,
                   const OutputConfig& out, const std::vector<AveragedMeasure>& mc_tables,
                   std::vector<BoundReport>& reports, const Sink& sink) {
  if (c.id == "lemma21") {
    const Measure& sigma = *cfg.find_measure(c.sigma);
    const GridSpec g = resolve_grid(cfg, c.grid, GridSpec::for_support(sigma));
    reports.push_back(check_lemma21(sigma, g));
    if (out.csv || out.svg) {
      const Table sweep = lemma21_sweep(sigma, g);
      const std::string base = "check" + std::to_string(idx) + "_lemma21_sweep";
      if (out.csv) sink.put(base + ".csv", sweep.to_csv());
      if (out.svg) sink.put(base + ".svg", render_sweep_svg(sweep, "contraction ratio sweep", 2.0));
    }
    return;
  }
  if (c.id == "lemma22") {
    const Measure& mu = *cfg.find_measure(c.mu);
    const GridSpec g = resolve_grid(cfg, c.grid, GridSpec::for_support(mu));
    for (double alpha : c.alphas) reports.push_back(check_lemma22(mu, alpha, g));
    return;
  }
  if (c.id == "lemma23") {
    const Measure& sigma = *cfg.find_measure(c.sigma);
    const Measure& mu = *cfg.find_measure(c.mu);
    const GridSpec g = resolve_grid(cfg, c.grid, union_support_grid(sigma, mu));
    for (double alpha : c.alphas) reports.push_back(check_lemma23(sigma, mu, alpha, g));
    return;
  }
  if (c.id == "thm11") {
    const OperatorConfig& op = *cfg.op;
    const LatticeOperator A = background_operator(op);
    const int site = resolve_site(c.site, op);
    const Measure mu_eff =
        folded_measure(*cfg.find_measure(c.mu), op.coupling * modulation_value(op, site));
    const GridSpec nu_g =
        resolve_grid(cfg, c.grid, averaged_auto_grid(A, mu_eff, cfg.quadrature.nodes));
    const GridSpec mu_g = resolve_grid(cfg, c.mu_grid, GridSpec::for_support(mu_eff));
    for (double alpha : c.alphas)
      reports.push_back(check_thm11(A, site, mu_eff, cfg.quadrature, alpha, nu_g, mu_g, workers));
    return;
  }
  if (c.id == "thm12-scaling") {
    const Measure& mu = *cfg.find_measure(c.mu);
    const GridSpec g = resolve_grid(cfg, c.grid, GridSpec::for_support(mu));
    for (double alpha : c.alphas)
      for (double factor : c.factors)
        reports.push_back(check_scaling(mu, factor, alpha, c.translate, g));
    return;
  }
  if (c.id == "thm12-weighted") {
    const double alpha = c.alphas.front();
    std::vector<WeightedComponent> parts;
    for (std::size_t i = 0; i < c.betas.size(); ++i)
      parts.push_back({c.betas[i], c.modulations[i], mc_tables[i]});
    double d_mu;
    if (c.d_mu) {
      d_mu = *c.d_mu;
    } else {
      const Measure base = c.mu.empty() ? folded_measure(cfg.op->single_site, cfg.op->coupling)
                                        : *cfg.find_measure(c.mu);
      const HoelderEstimate est =
          hoelder_constant_direct(base, alpha, GridSpec::for_support(base));
      if (est.divergent()) {
        BoundReport r;
        r.id = "thm12-weighted";
        r.detail = "single-site Hoelder estimate divergent (slope " +
                   format_double(est.divergence_slope) + "); bound has no finite rhs";
        r.pass = false;
        reports.push_back(std::move(r));
        return;
      }
      d_mu = est.constant;
    }
    CombineResult combined = combine_weighted(std::move(parts), alpha, d_mu,
                                              resolve_grid(cfg, c.grid, GridSpec{}));
    reports.push_back(combined.report);
    if (out.csv)
      sink.put("check" + std::to_string(idx) + "_combined.csv",
               combined.combined.smoothed_table().to_csv());
    return;
  }
  throw std::invalid_argument("unknown check id '" + c.id + "'");
}

}  // namespace

int resolve_workers(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("IDSLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 4096) return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunResult res;
  OutputConfig out = cfg.output;
  if (opt.out_dir) out.directory = *opt.out_dir;
  if (opt.formats) {
    out.csv = opt.formats->csv;
    out.json = opt.formats->json;
    out.svg = opt.formats->svg;
  }
  const int workers = resolve_workers(opt.workers);
  const std::uint64_t seed = opt.seed ? *opt.seed : cfg.mc.seed;
  res.out_dir = out.directory;

  std::error_code ec;
  std::filesystem::create_directories(out.directory, ec);
  if (ec) {
    res.exit_code = 3;
    res.error = "cannot create output directory '" + out.directory + "': " + ec.message();
    return res;
  }
  const Sink sink{out.directory, &res.artifacts};

  std::vector<AveragedMeasure> mc_tables;
  try {
    if (cfg.mc.realizations > 0) {
      const Stopwatch sw;
      const OperatorConfig& op = *cfg.op;
      McSweep sweep;
      for (const auto& s : cfg.mc.sites) sweep.sites.push_back(resolve_site(s, op));
      sweep.energies = cfg.mc.energies;
      sweep.scales = cfg.mc.scales;
      sweep.realizations = cfg.mc.realizations;
      sweep.seed = seed;
      mc_tables = mc_average_transform_multi(op, sweep, workers);

      if (out.csv) {
        for (std::size_t i = 0; i < mc_tables.size(); ++i)
          sink.put("mc_site_" + std::to_string(sweep.sites[i]) + ".csv",
                   mc_tables[i].smoothed_table().to_csv());
      }
      if (out.svg) {
        std::vector<CurveSeries> series;
        for (std::size_t i = 0; i < mc_tables.size(); ++i) {
          CurveSeries cs;
          cs.name = "site " + std::to_string(sweep.sites[i]);
          const auto& av = mc_tables[i];
          const std::size_t n_e = av.energies.size();
          for (std::size_t j = 0; j < av.scales.size(); ++j) {
            const double factor = std::pow(av.scales[j], 1.0 - cfg.mc.alpha);
            double best = 0.0;
            for (std::size_t k = 0; k < n_e; ++k)
              best = std::max(best, factor * av.cells[j * n_e + k].mean);
            cs.points.emplace_back(av.scales[j], best);
          }
          series.push_back(std::move(cs));
        }
        sink.put("mc_profile.svg",
                 render_curves_svg(series, "sup over E of a^(1-alpha) mean Im F", "a", "value",
                                   looks_geometric(cfg.mc.scales), false));
      }
      res.stages.push_back({"mc", sw.ms()});
    }

    if (!cfg.checks.empty()) {
      const Stopwatch sw;
      int idx = 0;
      for (const auto& c : cfg.checks) {
        run_one_check(cfg, c, idx, workers, out, mc_tables, res.reports, sink);
        ++idx;
      }
      if (out.json) sink.put("bounds.json", bound_reports_json(res.reports));
      if (out.csv) sink.put("bounds.csv", bound_reports_csv(res.reports));
      if (out.svg && !res.reports.empty())
        sink.put("bound_margins.svg", render_bound_margin_svg(res.reports));
      res.stages.push_back({"checks", sw.ms()});
    }
  } catch (const std::exception& e) {
    res.exit_code = 3;
    res.error = e.what();
  }

  if (res.exit_code == 0) {
    for (const auto& r : res.reports)
      if (!r.pass) res.exit_code = 1;
  }

  nlohmann::ordered_json manifest;
  char hash_hex[20];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(cfg.canonical_text())));
  manifest["version"] = kToolVersion;
  manifest["config_hash"] = hash_hex;
  manifest["seed"] = seed;
  manifest["workers"] = workers;
  manifest["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : res.stages)
    manifest["stages"].push_back({{"stage", s.stage}, {"milliseconds", s.milliseconds}});
  manifest["artifacts"] = res.artifacts;
  int n_pass = 0, n_fail = 0;
  for (const auto& r : res.reports) (r.pass ? n_pass : n_fail) += 1;
  manifest["reports"] = {{"pass", n_pass}, {"fail", n_fail}};
  if (!res.error.empty()) manifest["error"] = res.error;
  try {
    sink.put("run_manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    if (res.exit_code == 0) {
      res.exit_code = 3;
      res.error = e.what();
    }
  }
  return res;
}

}  // namespace idslab
