#pragma once

#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "idslab/measure.hpp"
#include "idslab/table.hpp"

namespace idslab {

// Point in the complex plane off the real axis, split into its sweep
// coordinates: z = energy + i * scale with scale != 0.
struct HalfPlanePoint {
  double energy;
  double scale;
  std::complex<double> z() const { return {energy, scale}; }
};

// Evaluation grid for window and smoothing sweeps: x (or energy) points are
// linearly spaced, eps (or scale) points log spaced by default.
struct GridSpec {
  double x_min = 0.0, x_max = 1.0;
  int x_count = 401;
  double eps_min = 1e-4, eps_max = 1.0;
  int eps_count = 81;
  bool log_eps = true;

  // Default grid rule: support widened by 1 on each side, 401 x points,
  // eps in [1e-4, 1] with 81 log points.
  static GridSpec for_support(const Measure& m);

  void validate() const;  // throws std::invalid_argument
  std::vector<double> x_points() const;
  std::vector<double> eps_points() const;
  // Multiplicative step between adjacent eps points (>= 1).
  double eps_step_factor() const;
};

// One-grid-step quantization of a Hoelder-constant estimate: the first-order
// change of d when the optimal window slides one eps grid step.
double grid_resolution_unit(const GridSpec& g, double alpha, double d_ref);

struct HoelderEstimate {
  enum class Method { DirectSup, BorelSup };

  double alpha = 1.0;
  // Grid sup of the defining ratio; +infinity when the sweep is flagged
  // divergent. Always a lower bound for the true constant when finite.
  double constant = 0.0;
  double grid_max = 0.0;  // raw grid sup, kept even when divergent
  Method method = Method::DirectSup;
  GridSpec grid;
  // Fitted decay rate of the ratio over the finest eps decade:
  // -d log(ratio) / d log(eps). Positive values signal blow-up as eps -> 0.
  double divergence_slope = 0.0;

  bool divergent() const { return std::isinf(constant); }
};

std::string format_estimate(const HoelderEstimate& e);

// Cached evaluator of F(z) = integral of (x - z)^{-1} dmu(x). IFS components
// are expanded once (up to max_ifs_cells cells each); the expansion is itself
// a genuine probability measure, so structural facts (Herglotz property,
// contraction bounds) hold for it exactly, not just approximately.
class BorelEvaluator {
 public:
  explicit BorelEvaluator(const Measure& m, int max_ifs_cells = 4096);
  std::complex<double> operator()(std::complex<double> z) const;
  // Fast path for Im F(y + i a); valid for either sign of a.
  double im(double y, double a) const;

 private:
  FlattenedMeasure flat_;
};

// F_mu(z); requires Im z != 0 (std::domain_error otherwise).
std::complex<double> borel_transform(const Measure& m, std::complex<double> z);

// (1/a) (psi_a * mu)(x) with psi(t) = 1/(1+t^2), which equals Im F_mu(x + i a).
// Requires a > 0.
double poisson_smooth(const Measure& m, double x, double a);

// Contraction ratio a / Im(1/F_sigma(y + i a)), evaluated in the cancellation-
// free form -|a F|^2 / Im(a F); bounded by 2 in absolute value for any
// probability measure. Requires scale != 0.
double lemma21_ratio(const Measure& sigma, HalfPlanePoint p);

// Integral of (x + F_sigma(z)^{-1})^{-1} dmu(x) at z = energy + i*scale,
// scale > 0. Equals F_mu evaluated at the reflected point -1/F_sigma(z).
std::complex<double> aggregated_transform(const Measure& sigma, const Measure& mu, HalfPlanePoint p);

// Grid estimators for the uniform Hoelder constant. Direct: windows
// mu((x-eps, x+eps)) / (2 eps)^alpha. Borel: sup |a|^{1-alpha} Im F(y + i a).
// Both report the grid sup (a lower bound of the true sup) and flag
// divergence when the finest-decade slope exceeds the threshold.
// When sweep_out is nonnull it receives the full table
// (x, eps, ratio) resp. (y, a, value).
HoelderEstimate hoelder_constant_direct(const Measure& m, double alpha, const GridSpec& g,
                                        double divergence_threshold = 0.1, Table* sweep_out = nullptr);
HoelderEstimate hoelder_constant_borel(const Measure& m, double alpha, const GridSpec& g,
                                       double divergence_threshold = 0.1, Table* sweep_out = nullptr);

// Full (y, a, ratio) table of lemma21_ratio over the grid (eps axis = a).
Table lemma21_sweep(const Measure& sigma, const GridSpec& g);

// Least-squares slope of log(val) against log(eps) over the finest decade of
// the eps sequence (ascending). The divergence_slope of an estimate is the
// negative of this fit.
double divergence_slope_fit(const std::vector<double>& eps, const std::vector<double>& val);

}  // namespace idslab
