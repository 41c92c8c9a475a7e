#include "idslab/transforms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "idslab/measure_text.hpp"

namespace idslab {

GridSpec GridSpec::for_support(const Measure& m) {
  const auto [lo, hi] = m.support();
  GridSpec g;
  g.x_min = lo - 1.0;
  g.x_max = hi + 1.0;
  g.x_count = 401;
  g.eps_min = 1e-4;
  g.eps_max = 1.0;
  g.eps_count = 81;
  g.log_eps = true;
  return g;
}

void GridSpec::validate() const {
  const auto bad = [](const std::string& what) { throw std::invalid_argument("grid: " + what); };
  if (!(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(eps_min) && std::isfinite(eps_max)))
    bad("entries must be finite");
  if (x_count < 1 || eps_count < 1) bad("point counts must be at least 1");
  if (x_count > 1 && !(x_min < x_max)) bad("x range must be nonempty");
  if (!(eps_min > 0.0)) bad("eps must be positive");
  if (eps_count > 1 && !(eps_min < eps_max)) bad("eps range must be nonempty");
}

std::vector<double> GridSpec::x_points() const {
  std::vector<double> xs(static_cast<std::size_t>(x_count));
  if (x_count == 1) {
    xs[0] = x_min;
    return xs;
  }
  const double step = (x_max - x_min) / (x_count - 1);
  for (int i = 0; i < x_count; ++i) xs[static_cast<std::size_t>(i)] = x_min + i * step;
  xs.back() = x_max;
  return xs;
}

std::vector<double> GridSpec::eps_points() const {
  std::vector<double> es(static_cast<std::size_t>(eps_count));
  if (eps_count == 1) {
    es[0] = eps_min;
    return es;
  }
  if (log_eps) {
    const double l0 = std::log(eps_min), l1 = std::log(eps_max);
    const double step = (l1 - l0) / (eps_count - 1);
    for (int i = 0; i < eps_count; ++i) es[static_cast<std::size_t>(i)] = std::exp(l0 + i * step);
  } else {
    const double step = (eps_max - eps_min) / (eps_count - 1);
    for (int i = 0; i < eps_count; ++i) es[static_cast<std::size_t>(i)] = eps_min + i * step;
  }
  es.front() = eps_min;
  es.back() = eps_max;
  return es;
}

double GridSpec::eps_step_factor() const {
  if (eps_count <= 1) return 1.0;
  if (log_eps) return std::pow(eps_max / eps_min, 1.0 / (eps_count - 1));
  return 1.0 + (eps_max - eps_min) / ((eps_count - 1) * eps_min);
}

double grid_resolution_unit(const GridSpec& g, double alpha, double d_ref) {
  return d_ref * (std::pow(g.eps_step_factor(), alpha) - 1.0);
}

std::string format_estimate(const HoelderEstimate& e) {
  std::string out;
  out += "method = ";
  out += (e.method == HoelderEstimate::Method::DirectSup) ? "direct-sup" : "borel-sup";
  out += "\nalpha = " + format_double(e.alpha);
  out += "\nconstant = ";
  out += e.divergent() ? "divergent" : format_double(e.constant);
  out += "\ngrid_max = " + format_double(e.grid_max);
  out += "\ndivergence_slope = " + format_double(e.divergence_slope);
  out += "\ngrid.x = [" + format_double(e.grid.x_min) + ", " + format_double(e.grid.x_max) + "] count " +
         std::to_string(e.grid.x_count);
  out += "\ngrid.eps = [" + format_double(e.grid.eps_min) + ", " + format_double(e.grid.eps_max) + "] count " +
         std::to_string(e.grid.eps_count) + (e.grid.log_eps ? " log" : " linear");
  out += "\n";
  return out;
}

// --- transform evaluation ----------------------------------------------------

BorelEvaluator::BorelEvaluator(const Measure& m, int max_ifs_cells)
    : flat_(flatten(m, max_ifs_cells)) {}

namespace {

// Integral of (value_left + slope (x - left)) / (x - z) over [left, right].
// With c0 + c1 x the same density, this is c1 (r - l) + (c0 + c1 z) (Log(r-z)
// - Log(l-z)); both log arguments share the sign of -Im z, so the principal
// branch difference is the continuous one.
std::complex<double> piece_transform(const DensityPiece& p, std::complex<double> z) {
  const double c1 = p.slope();
  const double c0 = p.value_left - c1 * p.left;
  const std::complex<double> logs = std::log(p.right - z) - std::log(p.left - z);
  return c1 * (p.right - p.left) + (c0 + c1 * z) * logs;
}

}  // namespace

std::complex<double> BorelEvaluator::operator()(std::complex<double> z) const {
  if (z.imag() == 0.0) throw std::domain_error("borel_transform: z must be off the real axis");
  std::complex<double> acc{0.0, 0.0};
  for (const auto& a : flat_.atoms) acc += a.weight / (a.position - z);
  for (const auto& p : flat_.pieces) acc += piece_transform(p, z);
  return acc;
}

double BorelEvaluator::im(double y, double a) const {
  if (a == 0.0) throw std::domain_error("borel_transform: z must be off the real axis");
  double acc = 0.0;
  for (const auto& at : flat_.atoms) {
    const double d = at.position - y;
    acc += at.weight * a / (d * d + a * a);
  }
  if (!flat_.pieces.empty()) {
    const std::complex<double> z{y, a};
    for (const auto& p : flat_.pieces) acc += piece_transform(p, z).imag();
  }
  return acc;
}

std::complex<double> borel_transform(const Measure& m, std::complex<double> z) {
  return BorelEvaluator(m)(z);
}

double poisson_smooth(const Measure& m, double x, double a) {
  if (!(a > 0.0)) throw std::domain_error("poisson_smooth: a must be positive");
  return BorelEvaluator(m).im(x, a);
}

namespace {

double ratio_from_transform(std::complex<double> F, double a) {
  const std::complex<double> w = a * F;
  const double im = w.imag();
  if (im == 0.0) throw std::runtime_error("transform ratio: degenerate Im(a F) = 0");
  return -std::norm(w) / im;
}

}  // namespace

double lemma21_ratio(const Measure& sigma, HalfPlanePoint p) {
  if (p.scale == 0.0) throw std::domain_error("lemma21_ratio: scale must be nonzero");
  return ratio_from_transform(BorelEvaluator(sigma)(p.z()), p.scale);
}

std::complex<double> aggregated_transform(const Measure& sigma, const Measure& mu, HalfPlanePoint p) {
  if (!(p.scale > 0.0)) throw std::domain_error("aggregated_transform: scale must be positive");
  const std::complex<double> fs = BorelEvaluator(sigma)(p.z());
  return BorelEvaluator(mu)(-1.0 / fs);
}

// --- Hoelder estimators --------------------------------------------------------

// Least-squares slope of log(val) against log(eps) over the finest decade of
// the grid (all points when the grid spans less than one decade).
double divergence_slope_fit(const std::vector<double>& eps, const std::vector<double>& val) {
  if (eps.size() != val.size() || eps.empty())
    throw std::invalid_argument("slope fit: need matching nonempty sequences");
  const double cutoff = eps.front() * 10.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i] > cutoff && n >= 2) break;
    if (!(val[i] > 0.0)) continue;
    const double lx = std::log(eps[i]), ly = std::log(val[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  const double denom = n * sxx - sx * sx;
  return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must lie in (0, 1]");
}

HoelderEstimate assemble(double alpha, HoelderEstimate::Method method, const GridSpec& g,
                         const std::vector<double>& eps, const std::vector<double>& per_eps_max,
                         double threshold) {
  HoelderEstimate e;
  e.alpha = alpha;
  e.method = method;
  e.grid = g;
  e.grid_max = 0.0;
  for (double v : per_eps_max) e.grid_max = std::max(e.grid_max, v);
  e.divergence_slope = -divergence_slope_fit(eps, per_eps_max);
  e.constant = (e.divergence_slope > threshold) ? std::numeric_limits<double>::infinity() : e.grid_max;
  return e;
}

}  // namespace

HoelderEstimate hoelder_constant_direct(const Measure& m, double alpha, const GridSpec& g,
                                        double divergence_threshold, Table* sweep_out) {
  check_alpha(alpha);
  g.validate();
  const auto xs = g.x_points();
  const auto eps = g.eps_points();
  if (sweep_out) *sweep_out = Table({"x", "eps", "ratio"});
  std::vector<double> per_eps(eps.size(), 0.0);
  for (std::size_t j = 0; j < eps.size(); ++j) {
    const double denom = std::pow(2.0 * eps[j], alpha);
    double best = 0.0;
    for (const double x : xs) {
      const double r = m.interval_mass(x, eps[j]) / denom;
      best = std::max(best, r);
      if (sweep_out) sweep_out->add_row({x, eps[j], r});
    }
    per_eps[j] = best;
  }
  return assemble(alpha, HoelderEstimate::Method::DirectSup, g, eps, per_eps, divergence_threshold);
}

HoelderEstimate hoelder_constant_borel(const Measure& m, double alpha, const GridSpec& g,
                                       double divergence_threshold, Table* sweep_out) {
  check_alpha(alpha);
  g.validate();
  const BorelEvaluator ev(m);
  const auto ys = g.x_points();
  const auto as = g.eps_points();
  if (sweep_out) *sweep_out = Table({"y", "a", "value"});
  std::vector<double> per_a(as.size(), 0.0);
  for (std::size_t j = 0; j < as.size(); ++j) {
    const double factor = std::pow(as[j], 1.0 - alpha);
    double best = 0.0;
    for (const double y : ys) {
      const double v = factor * ev.im(y, as[j]);
      best = std::max(best, v);
      if (sweep_out) sweep_out->add_row({y, as[j], v});
    }
    per_a[j] = best;
  }
  return assemble(alpha, HoelderEstimate::Method::BorelSup, g, as, per_a, divergence_threshold);
}

Table lemma21_sweep(const Measure& sigma, const GridSpec& g) {
  g.validate();
  const BorelEvaluator ev(sigma);
  Table t({"y", "a", "ratio"});
  for (const double a : g.eps_points()) {
    for (const double y : g.x_points()) {
      t.add_row({y, a, ratio_from_transform(ev({y, a}), a)});
    }
  }
  return t;
}

}  // namespace idslab
