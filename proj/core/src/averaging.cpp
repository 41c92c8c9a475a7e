#include "idslab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "idslab/measure_text.hpp"

namespace idslab {

// --- quadrature ---------------------------------------------------------------

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] via the symmetric tridiagonal
// recurrence matrix (eigenvalues are the nodes, 2 * first-component^2 the
// weights).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  if (n == 1) {
    nodes[0] = 0.0;
    weights[0] = 2.0;
    return;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw std::runtime_error("quadrature: eigensolver failed");
  for (int k = 0; k < n; ++k) {
    nodes[static_cast<std::size_t>(k)] = es.eigenvalues()[k];
    const double v0 = es.eigenvectors()(0, k);
    weights[static_cast<std::size_t>(k)] = 2.0 * v0 * v0;
  }
}

double piece_value_at(const DensityPiece& p, double x) {
  return p.value_left + p.slope() * (x - p.left);
}

DensityPiece clip_piece(const DensityPiece& p, double lo, double hi) {
  const double a = std::max(p.left, lo), b = std::min(p.right, hi);
  return {a, b, piece_value_at(p, a), piece_value_at(p, b)};
}

}  // namespace

std::vector<std::pair<double, double>> quadrature_points(const Measure& mu, const QuadratureSpec& q) {
  if (q.nodes < 1) throw std::invalid_argument("quadrature: node count must be positive");
  FlattenedMeasure flat = flatten(mu, q.nodes);

  if (q.truncation) {
    const auto [lo, hi] = *q.truncation;
    if (!(lo < hi)) throw std::invalid_argument("quadrature: empty truncation window");
    FlattenedMeasure kept;
    for (const auto& a : flat.atoms)
      if (a.position >= lo && a.position <= hi) kept.atoms.push_back(a);
    for (const auto& p : flat.pieces) {
      if (p.right <= lo || p.left >= hi) continue;
      kept.pieces.push_back(clip_piece(p, lo, hi));
    }
    double kept_mass = 0.0;
    for (const auto& a : kept.atoms) kept_mass += a.weight;
    for (const auto& p : kept.pieces) kept_mass += p.mass();
    if (kept_mass < 1.0 - 1e-10)
      throw std::invalid_argument("quadrature: truncation drops mass " +
                                  format_double(1.0 - kept_mass));
    flat = std::move(kept);
  }

  std::vector<std::pair<double, double>> out;
  for (const auto& a : flat.atoms) out.emplace_back(a.position, a.weight);

  if (q.rule == QuadratureSpec::Rule::AtomicExact) {
    if (!flat.pieces.empty())
      throw std::invalid_argument("quadrature: atomic-exact rule needs a purely atomic measure");
    return out;
  }
  if (flat.pieces.empty()) return out;

  // Split the node budget across pieces proportionally to mass (largest
  // remainder, at least one node each).
  double piece_mass = 0.0;
  for (const auto& p : flat.pieces) piece_mass += p.mass();
  const int budget = q.nodes;
  std::vector<int> alloc(flat.pieces.size(), 1);
  int used = static_cast<int>(flat.pieces.size());
  if (budget > used && piece_mass > 0.0) {
    std::vector<std::pair<double, std::size_t>> remainders;
    for (std::size_t i = 0; i < flat.pieces.size(); ++i) {
      const double ideal = (budget * flat.pieces[i].mass() / piece_mass);
      const int extra = std::max(0, static_cast<int>(std::floor(ideal)) - 1);
      alloc[i] += extra;
      used += extra;
      remainders.emplace_back(-(ideal - std::floor(ideal)), i);
    }
    std::sort(remainders.begin(), remainders.end());
    for (std::size_t k = 0; used < budget && k < remainders.size(); ++k, ++used)
      alloc[remainders[k].second] += 1;
  }

  std::vector<double> gl_nodes, gl_weights;
  for (std::size_t i = 0; i < flat.pieces.size(); ++i) {
    const auto& p = flat.pieces[i];
    const int n = alloc[i];
    const double half = 0.5 * (p.right - p.left);
    const double mid = 0.5 * (p.right + p.left);
    if (q.rule == QuadratureSpec::Rule::GaussLegendre) {
      gauss_legendre(n, gl_nodes, gl_weights);
      for (int k = 0; k < n; ++k) {
        const double x = mid + half * gl_nodes[static_cast<std::size_t>(k)];
        out.emplace_back(x, gl_weights[static_cast<std::size_t>(k)] * half * piece_value_at(p, x));
      }
    } else {  // Trapezoid
      const int m = std::max(n, 2);
      const double h = (p.right - p.left) / (m - 1);
      for (int k = 0; k < m; ++k) {
        const double x = p.left + k * h;
        const double w = (k == 0 || k == m - 1) ? 0.5 * h : h;
        out.emplace_back(x, w * piece_value_at(p, x));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- averaged measures ----------------------------------------------------------

Measure AveragedMeasure::to_measure() const {
  if (!is_mixture()) throw std::invalid_argument("averaged measure: no mixture form available");
  double total = 0.0;
  for (const auto& c : components) total += c.weight;
  if (!(total > 0.0)) throw std::invalid_argument("averaged measure: zero total weight");
  std::vector<std::pair<double, Measure>> parts;
  parts.reserve(components.size());
  for (const auto& c : components) parts.emplace_back(c.weight / total, c.spectral.to_measure());
  return Measure::mixture(std::move(parts));
}

Table AveragedMeasure::mixture_table() const {
  Table t({"component", "weight", "eigenvalue", "spectral_weight"});
  for (std::size_t j = 0; j < components.size(); ++j) {
    for (const auto& p : components[j].spectral.points) {
      t.add_row({static_cast<double>(j), components[j].weight, p.eigenvalue, p.weight});
    }
  }
  return t;
}

Table AveragedMeasure::smoothed_table() const {
  Table t({"energy", "scale", "mean", "stderr", "count"});
  for (const auto& c : cells) {
    t.add_row({c.energy, c.scale, c.mean, c.stderr_value, static_cast<double>(c.count)});
  }
  return t;
}

namespace {

void parallel_over(int count, int workers, const std::function<void(int, int)>& run_range) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    run_range(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    const int lo = static_cast<int>(static_cast<long long>(count) * t / workers);
    const int hi = static_cast<int>(static_cast<long long>(count) * (t + 1) / workers);
    pool.emplace_back([&run_range, lo, hi] { run_range(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

int canonical_site(const Eigen::VectorXd& phi) {
  int site = -1;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (phi[i] == 0.0) continue;
    if (site >= 0 || phi[i] != 1.0) return -1;
    site = static_cast<int>(i);
  }
  return site;
}

}  // namespace

AveragedMeasure average_over_site(const LatticeOperator& A, const Eigen::VectorXd& phi,
                                  const Measure& mu, const QuadratureSpec& quad, int workers) {
  if (phi.size() != A.size()) throw std::invalid_argument("average_over_site: phi size mismatch");
  const auto points = quadrature_points(mu, quad);
  if (points.empty()) throw std::invalid_argument("average_over_site: empty quadrature");
  const int site = canonical_site(phi);

  AveragedMeasure av;
  av.components.resize(points.size());
  parallel_over(static_cast<int>(points.size()), workers, [&](int lo, int hi) {
    for (int j = lo; j < hi; ++j) {
      const auto [node, weight] = points[static_cast<std::size_t>(j)];
      SpectralMeasure sm;
      if (site >= 0) {
        sm = spectral_measure_site(A.with_diagonal_entry(site, A.diagonal(site) + node), site);
      } else {
        Eigen::MatrixXd m = A.dense();
        m.noalias() += node * phi * phi.transpose();
        sm = spectral_measure(LatticeOperator::from_dense(m, A.background_diagonal()), phi);
      }
      av.components[static_cast<std::size_t>(j)] = {weight, std::move(sm)};
    }
  });
  return av;
}

double averaging_identity_residual(const AveragedMeasure& nu, const LatticeOperator& A,
                                   const Eigen::VectorXd& phi, const Measure& mu, HalfPlanePoint p) {
  if (!(p.scale > 0.0)) throw std::domain_error("identity residual: scale must be positive");
  const double lhs = BorelEvaluator(nu.to_measure()).im(p.energy, p.scale);
  const std::complex<double> f_a = resolvent_element(A, phi, p.z());
  const double rhs = BorelEvaluator(mu)(-1.0 / f_a).imag();
  return std::abs(lhs - rhs);
}

double averaging_identity_residual(const LatticeOperator& A, const Eigen::VectorXd& phi,
                                   const Measure& mu, const QuadratureSpec& quad, HalfPlanePoint p) {
  return averaging_identity_residual(average_over_site(A, phi, mu, quad), A, phi, mu, p);
}

// --- Monte Carlo --------------------------------------------------------------

std::vector<AveragedMeasure> mc_average_transform_multi(const OperatorConfig& cfg, const McSweep& sweep,
                                                        int workers) {
  cfg.validate();
  const int n_sites = static_cast<int>(sweep.sites.size());
  const int n_e = static_cast<int>(sweep.energies.size());
  const int n_a = static_cast<int>(sweep.scales.size());
  const int N = sweep.realizations;
  if (n_sites == 0 || n_e == 0 || n_a == 0) throw std::invalid_argument("mc sweep: empty grid");
  if (N < 1) throw std::invalid_argument("mc sweep: need at least one realization");
  for (int s : sweep.sites)
    if (s < 0 || s >= cfg.site_count()) throw std::invalid_argument("mc sweep: site out of range");
  for (double a : sweep.scales)
    if (!(a > 0.0)) throw std::invalid_argument("mc sweep: scales must be positive");

  // slot layout: ((r * n_a + j) * n_e + i) * n_sites + s
  std::vector<double> slots(static_cast<std::size_t>(N) * n_a * n_e * n_sites);
  parallel_over(N, workers, [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      const DisorderSample sample = sample_disorder(cfg, sweep.seed, static_cast<std::uint64_t>(r));
      const LatticeOperator H = build_hamiltonian(cfg, sample);
      for (int j = 0; j < n_a; ++j) {
        for (int i = 0; i < n_e; ++i) {
          const ResolventSolver solver(H, {sweep.energies[static_cast<std::size_t>(i)],
                                           sweep.scales[static_cast<std::size_t>(j)]});
          for (int s = 0; s < n_sites; ++s) {
            slots[(static_cast<std::size_t>(r) * n_a + j) * n_e * n_sites +
                  static_cast<std::size_t>(i) * n_sites + s] =
                solver.site_element(sweep.sites[static_cast<std::size_t>(s)]).imag();
          }
        }
      }
    }
  });

  // Fixed-order reduction by realization index keeps the artifacts
  // bit-identical for any worker count.
  std::vector<AveragedMeasure> out(static_cast<std::size_t>(n_sites));
  for (int s = 0; s < n_sites; ++s) {
    AveragedMeasure& av = out[static_cast<std::size_t>(s)];
    av.energies = sweep.energies;
    av.scales = sweep.scales;
    av.cells.resize(static_cast<std::size_t>(n_a) * n_e);
    for (int j = 0; j < n_a; ++j) {
      for (int i = 0; i < n_e; ++i) {
        double sum = 0.0;
        for (int r = 0; r < N; ++r)
          sum += slots[(static_cast<std::size_t>(r) * n_a + j) * n_e * n_sites +
                       static_cast<std::size_t>(i) * n_sites + s];
        const double mean = sum / N;
        double sq = 0.0;
        for (int r = 0; r < N; ++r) {
          const double d = slots[(static_cast<std::size_t>(r) * n_a + j) * n_e * n_sites +
                                 static_cast<std::size_t>(i) * n_sites + s] -
                           mean;
          sq += d * d;
        }
        const double se = (N > 1) ? std::sqrt(sq / (N - 1) / N) : 0.0;
        av.cells[static_cast<std::size_t>(j) * n_e + i] = {
            sweep.energies[static_cast<std::size_t>(i)], sweep.scales[static_cast<std::size_t>(j)],
            mean, se, N};
      }
    }
  }
  return out;
}

AveragedMeasure mc_average_transform(const OperatorConfig& cfg, int site,
                                     const std::vector<double>& energies,
                                     const std::vector<double>& scales, int realizations,
                                     std::uint64_t seed, int workers) {
  McSweep sweep;
  sweep.sites = {site};
  sweep.energies = energies;
  sweep.scales = scales;
  sweep.realizations = realizations;
  sweep.seed = seed;
  return mc_average_transform_multi(cfg, sweep, workers).front();
}

// --- Hoelder estimation of averages ------------------------------------------------

HoelderEstimate estimate_averaged_hoelder(const AveragedMeasure& av, double alpha, const GridSpec& g,
                                          double divergence_threshold) {
  if (av.is_mixture()) return hoelder_constant_direct(av.to_measure(), alpha, g, divergence_threshold);
  if (!av.is_table()) throw std::invalid_argument("averaged measure: empty");

  const int n_e = static_cast<int>(av.energies.size());
  const int n_a = static_cast<int>(av.scales.size());
  std::vector<std::pair<double, double>> per_scale;  // (scale, max value)
  per_scale.reserve(static_cast<std::size_t>(n_a));
  for (int j = 0; j < n_a; ++j) {
    const double a = av.scales[static_cast<std::size_t>(j)];
    const double factor = std::pow(a, 1.0 - alpha);
    double best = 0.0;
    for (int i = 0; i < n_e; ++i)
      best = std::max(best, factor * av.cells[static_cast<std::size_t>(j) * n_e + i].mean);
    per_scale.emplace_back(a, best);
  }
  std::sort(per_scale.begin(), per_scale.end());
  std::vector<double> as, vals;
  for (const auto& [a, v] : per_scale) {
    as.push_back(a);
    vals.push_back(v);
  }

  HoelderEstimate e;
  e.alpha = alpha;
  e.method = HoelderEstimate::Method::BorelSup;
  GridSpec echoed = g;
  echoed.x_min = *std::min_element(av.energies.begin(), av.energies.end());
  echoed.x_max = *std::max_element(av.energies.begin(), av.energies.end());
  echoed.x_count = n_e;
  echoed.eps_min = as.front();
  echoed.eps_max = as.back();
  echoed.eps_count = n_a;
  if (n_a >= 3) {
    const double r0 = as[1] / as[0], r1 = as[n_a - 1] / as[n_a - 2];
    echoed.log_eps = std::abs(r0 - r1) <= 1e-6 * r0;
  }
  e.grid = echoed;
  for (double v : vals) e.grid_max = std::max(e.grid_max, v);
  e.divergence_slope = -divergence_slope_fit(as, vals);
  e.constant =
      (e.divergence_slope > divergence_threshold) ? std::numeric_limits<double>::infinity() : e.grid_max;
  return e;
}

// --- reports -------------------------------------------------------------------

std::string bound_reports_json(const std::vector<BoundReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["margin"] = r.margin;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["detail"] = r.detail;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';  // RFC 4180 doubling
    out += c;
  }
  out += "\"";
  return out;
}

BoundReport make_report(std::string id, double lhs, double rhs, double tolerance, std::string detail) {
  BoundReport r;
  r.id = std::move(id);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.tolerance = tolerance;
  r.pass = r.margin >= -tolerance;
  r.detail = std::move(detail);
  return r;
}

std::string grid_brief(const GridSpec& g) {
  return "x[" + format_double(g.x_min) + "," + format_double(g.x_max) + "]x" + std::to_string(g.x_count) +
         " eps[" + format_double(g.eps_min) + "," + format_double(g.eps_max) + "]x" +
         std::to_string(g.eps_count) + (g.log_eps ? " log" : " linear");
}

}  // namespace

std::string bound_reports_csv(const std::vector<BoundReport>& reports) {
  std::string out = "inequality,parameters,lhs,rhs,margin,tolerance,pass\n";
  for (const auto& r : reports) {
    out += r.id + "," + csv_quote(r.detail) + "," + format_double(r.lhs) + "," + format_double(r.rhs) +
           "," + format_double(r.margin) + "," + format_double(r.tolerance) + "," +
           (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

// --- checkers --------------------------------------------------------------------

BoundReport check_lemma21(const Measure& sigma, const GridSpec& g) {
  g.validate();
  const BorelEvaluator ev(sigma);
  double worst = 0.0;
  for (const double a : g.eps_points()) {
    for (const double y : g.x_points()) {
      const std::complex<double> w = a * ev({y, a});
      const double im = w.imag();
      if (im == 0.0) continue;
      worst = std::max(worst, std::abs(-std::norm(w) / im));
    }
  }
  return make_report("lemma21", worst, 2.0, 1e-9, "sup |a / Im(1/F)| over " + grid_brief(g));
}

BoundReport check_lemma22(const Measure& mu, double alpha, const GridSpec& g) {
  const HoelderEstimate direct = hoelder_constant_direct(mu, alpha, g);
  const HoelderEstimate borel = hoelder_constant_borel(mu, alpha, g);
  const double rhs_factor = std::pow(2.0, alpha) * std::numbers::pi;
  std::string detail = "alpha=" + format_double(alpha) + " " + grid_brief(g);
  if (direct.divergent() || borel.divergent()) {
    BoundReport r = make_report("lemma22", borel.grid_max, rhs_factor * direct.grid_max, 0.0,
                                detail + " divergent sweep (direct slope " +
                                    format_double(direct.divergence_slope) + ", smoothing slope " +
                                    format_double(borel.divergence_slope) + ")");
    r.pass = false;
    return r;
  }
  return make_report("lemma22", borel.constant, rhs_factor * direct.constant, 0.0,
                     detail + " d_direct=" + format_double(direct.constant));
}

BoundReport check_lemma23(const Measure& sigma, const Measure& mu, double alpha, const GridSpec& g) {
  g.validate();
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must lie in (0, 1]");
  const HoelderEstimate direct = hoelder_constant_direct(mu, alpha, g);
  const BorelEvaluator ev_sigma(sigma), ev_mu(mu);
  double worst = 0.0;
  for (const double a : g.eps_points()) {
    const double factor = std::pow(a, 1.0 - alpha);
    for (const double y : g.x_points()) {
      const std::complex<double> fs = ev_sigma({y, a});
      const double v = std::abs(factor * ev_mu(-1.0 / fs).imag());
      worst = std::max(worst, v);
    }
  }
  std::string detail = "alpha=" + format_double(alpha) + " " + grid_brief(g) + " d_mu=" +
                       (direct.divergent() ? "divergent" : format_double(direct.constant));
  if (direct.divergent()) {
    BoundReport r = make_report("lemma23", worst, 0.0, 0.0, detail);
    r.pass = false;
    return r;
  }
  return make_report("lemma23", worst, 2.0 * std::numbers::pi * direct.constant, 0.0, detail);
}

BoundReport check_thm11(const LatticeOperator& A, int site, const Measure& mu,
                        const QuadratureSpec& quad, double alpha, const GridSpec& nu_grid,
                        const GridSpec& mu_grid, int workers) {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(A.size());
  phi[site] = 1.0;
  const AveragedMeasure nu = average_over_site(A, phi, mu, quad, workers);
  const HoelderEstimate d_nu = estimate_averaged_hoelder(nu, alpha, nu_grid);
  const HoelderEstimate d_mu = hoelder_constant_direct(mu, alpha, mu_grid);

  // Cross-check the two evaluation routes at a few interior points.
  double max_residual = 0.0;
  const auto [lo, hi] = nu.to_measure().support();
  for (int i = 0; i < 5; ++i) {
    const double e = lo + (hi - lo) * (0.1 + 0.2 * i);
    for (const double a : {0.3, 0.7}) {
      max_residual = std::max(max_residual, averaging_identity_residual(nu, A, phi, mu, {e, a}));
    }
  }

  std::string detail = "alpha=" + format_double(alpha) + " site=" + std::to_string(site) + " nodes=" +
                       std::to_string(quad.nodes) + " identity_residual=" + format_double(max_residual) +
                       " d_mu=" + (d_mu.divergent() ? "divergent" : format_double(d_mu.constant)) +
                       " nu_grid " + grid_brief(nu_grid);
  const double rhs_factor = std::pow(2.0, 2.0 - alpha) * std::numbers::pi;
  if (d_nu.divergent() || d_mu.divergent()) {
    BoundReport r = make_report("thm11", d_nu.grid_max, rhs_factor * d_mu.grid_max, 0.0,
                                detail + " divergent estimate");
    r.pass = false;
    return r;
  }
  return make_report("thm11", d_nu.constant, rhs_factor * d_mu.constant, 0.0, detail);
}

BoundReport check_scaling(const Measure& mu, double c, double alpha, bool translate, const GridSpec& g) {
  g.validate();
  const HoelderEstimate base = hoelder_constant_direct(mu, alpha, g);

  GridSpec img = g;
  Measure transformed = translate ? mu.translated(c) : mu.scaled(c);
  if (translate) {
    img.x_min = g.x_min - c;
    img.x_max = g.x_max - c;
  } else {
    const double a = g.x_min / c, b = g.x_max / c;
    img.x_min = std::min(a, b);
    img.x_max = std::max(a, b);
    img.eps_min = g.eps_min / std::abs(c);
    img.eps_max = g.eps_max / std::abs(c);
  }
  const HoelderEstimate image = hoelder_constant_direct(transformed, alpha, img);

  const std::string op = translate ? "translate" : "scale";
  std::string detail = op + " c=" + format_double(c) + " alpha=" + format_double(alpha) + " " +
                       grid_brief(g);
  const double units = translate ? 1.0 : 2.0;

  double base_val, image_val;
  if (base.divergent() && image.divergent()) {
    // Both sweeps blow up; the identity still constrains the raw grid sups.
    base_val = base.grid_max;
    image_val = image.grid_max;
    detail += " (grid sups; both sweeps divergent, slope " + format_double(base.divergence_slope) + ")";
  } else if (base.divergent() != image.divergent()) {
    BoundReport r = make_report("thm12-scaling", 0.0, 0.0, 0.0,
                                detail + " divergence flags disagree between base and image sweeps");
    r.pass = false;
    return r;
  } else {
    base_val = base.constant;
    image_val = image.constant;
  }
  const double expected = translate ? base_val : std::pow(std::abs(c), alpha) * base_val;
  const double deviation = std::abs(image_val - expected);
  const double unit = grid_resolution_unit(g, alpha, base_val);
  detail += " expected=" + format_double(expected) + " got=" + format_double(image_val);
  return make_report("thm12-scaling", deviation, units * unit, 1e-12 * std::max(1.0, expected), detail);
}

CombineResult combine_weighted(std::vector<WeightedComponent> parts, double alpha, double d_mu,
                               const GridSpec& g) {
  if (parts.empty()) throw std::invalid_argument("combine_weighted: no components");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must lie in (0, 1]");
  double beta_sum = 0.0;
  for (const auto& p : parts) {
    if (!(p.weight > 0.0)) throw std::invalid_argument("combine_weighted: weights must be positive");
    if (p.modulation == 0.0) throw std::invalid_argument("combine_weighted: modulations must be nonzero");
    beta_sum += p.weight;
  }
  if (std::abs(beta_sum - 1.0) > 1e-9)
    throw std::invalid_argument("combine_weighted: weights must sum to 1");

  const bool mixtures = parts.front().measure.is_mixture();
  for (const auto& p : parts)
    if (p.measure.is_mixture() != mixtures)
      throw std::invalid_argument("combine_weighted: cannot mix mixture and table forms");

  CombineResult res;
  if (mixtures) {
    for (const auto& p : parts) {
      for (const auto& c : p.measure.components)
        res.combined.components.push_back({p.weight * c.weight, c.spectral});
    }
  } else {
    const auto& first = parts.front().measure;
    for (const auto& p : parts) {
      if (p.measure.energies != first.energies || p.measure.scales != first.scales)
        throw std::invalid_argument("combine_weighted: table axes must match");
    }
    res.combined.energies = first.energies;
    res.combined.scales = first.scales;
    res.combined.cells.resize(first.cells.size());
    for (std::size_t k = 0; k < first.cells.size(); ++k) {
      double mean = 0.0, var = 0.0;
      int count = parts.front().measure.cells[k].count;
      for (const auto& p : parts) {
        mean += p.weight * p.measure.cells[k].mean;
        var += p.weight * p.weight * p.measure.cells[k].stderr_value * p.measure.cells[k].stderr_value;
        count = std::min(count, p.measure.cells[k].count);
      }
      res.combined.cells[k] = {first.cells[k].energy, first.cells[k].scale, mean, std::sqrt(var), count};
    }
  }

  // Summability proxy for the finite family: the increments t_n = beta_n
  // |a_n|^{-alpha} must decay (tail increment at most half the early maximum).
  std::vector<double> increments;
  double sum_t = 0.0;
  for (const auto& p : parts) {
    const double t = p.weight * std::pow(std::abs(p.modulation), -alpha);
    increments.push_back(t);
    sum_t += t;
  }
  bool summable = true;
  if (increments.size() >= 3) {
    double head_max = 0.0;
    for (std::size_t i = 0; i < increments.size() / 2; ++i) head_max = std::max(head_max, increments[i]);
    summable = increments.back() <= 0.5 * head_max;
  }

  const HoelderEstimate combined_est = estimate_averaged_hoelder(res.combined, alpha, g);
  const double sharp_rhs = sum_t * d_mu;
  const double rhs = std::pow(2.0, 2.0 - alpha) * std::numbers::pi * sharp_rhs;
  std::string detail = "terms=" + std::to_string(parts.size()) + " alpha=" + format_double(alpha) +
                       " sum_beta_mod=" + format_double(sum_t) + " sharp_rhs=" + format_double(sharp_rhs) +
                       " tail_increment=" + format_double(increments.back()) +
                       (summable ? " summable" : " non-summable");
  // The divergence sentinel only gates the mixture form, where the window
  // sup estimates d of an explicit measure. Table cells are smoothed
  // transform values at fixed positive scales; the bound holds at each cell
  // individually, so a profile still rising at the finest scale is not a
  // measurement failure.
  if ((mixtures && combined_est.divergent()) || !summable) {
    res.report = make_report("thm12-weighted", combined_est.grid_max, rhs, 0.0, detail);
    res.report.pass = false;
    return res;
  }
  res.report = make_report("thm12-weighted",
                           combined_est.divergent() ? combined_est.grid_max : combined_est.constant,
                           rhs, 0.0, detail);
  return res;
}

BoundReport check_bound(const CheckRequest& req) {
  if (req.id == "lemma21") {
    if (!req.sigma) throw std::invalid_argument("check lemma21: sigma measure required");
    return check_lemma21(*req.sigma, req.grid);
  }
  if (req.id == "lemma22") {
    if (!req.mu) throw std::invalid_argument("check lemma22: mu measure required");
    return check_lemma22(*req.mu, req.alpha, req.grid);
  }
  if (req.id == "lemma23") {
    if (!req.sigma || !req.mu) throw std::invalid_argument("check lemma23: sigma and mu required");
    return check_lemma23(*req.sigma, *req.mu, req.alpha, req.grid);
  }
  if (req.id == "thm11") {
    if (!req.background || !req.mu) throw std::invalid_argument("check thm11: operator and mu required");
    return check_thm11(*req.background, req.site, *req.mu, req.quadrature, req.alpha, req.grid,
                       req.mu_grid, req.workers);
  }
  if (req.id == "thm12-scaling") {
    if (!req.mu) throw std::invalid_argument("check thm12-scaling: mu required");
    return check_scaling(*req.mu, req.scale_factor, req.alpha, req.translate, req.grid);
  }
  if (req.id == "thm12-weighted") {
    if (!req.weighted_parts) throw std::invalid_argument("check thm12-weighted: components required");
    return combine_weighted(*req.weighted_parts, req.alpha, req.d_mu, req.grid).report;
  }
  throw std::invalid_argument("unknown check id '" + req.id + "'");
}

}  // namespace idslab
