#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idslab/measure.hpp"
#include "idslab/operators.hpp"
#include "idslab/spectral.hpp"
#include "idslab/table.hpp"
#include "idslab/transforms.hpp"

namespace idslab {

// Quadrature over the single-site distribution. Gauss-Legendre splits the
// node budget across density pieces proportionally to mass; explicit atoms
// are always taken exactly; IFS components are expanded to depth-level cells
// within the node budget. AtomicExact requires a purely atomic measure.
struct QuadratureSpec {
  enum class Rule { GaussLegendre, Trapezoid, AtomicExact };
  Rule rule = Rule::GaussLegendre;
  int nodes = 64;
  // Optional clip window; the retained mass must be >= 1 - 1e-10.
  std::optional<std::pair<double, double>> truncation;
};

// (node, weight) pairs; weights sum to the quadrature mass of the measure.
std::vector<std::pair<double, double>> quadrature_points(const Measure& mu, const QuadratureSpec& q);

// Disorder-averaged object in one of two forms:
//  - mixture: weighted spectral measures, one per quadrature node;
//  - table: Monte Carlo means of Im <e_s, (H - z)^{-1} e_s> on a (energy,
//    scale) grid with standard errors (cells ordered scale-major).
struct AveragedMeasure {
  struct Component {
    double weight;
    SpectralMeasure spectral;
  };
  std::vector<Component> components;

  struct TableCell {
    double energy;
    double scale;
    double mean;
    double stderr_value;
    int count;
  };
  std::vector<double> energies;
  std::vector<double> scales;
  std::vector<TableCell> cells;  // index = scale_index * energies.size() + energy_index

  bool is_mixture() const { return !components.empty(); }
  bool is_table() const { return !cells.empty(); }

  // Mixture form only: the averaged measure as an explicit atomic mixture.
  Measure to_measure() const;
  // CSV forms with deterministic bytes.
  Table mixture_table() const;  // (component, weight, eigenvalue, spectral_weight)
  Table smoothed_table() const;  // (energy, scale, mean, stderr, count)
};

// Average of the spectral measures of A + q P_phi over quadrature nodes q.
// Callers fold coupling and modulation into mu beforehand (mu must be the
// distribution of the diagonal increment itself). Deterministic for any
// worker count.
AveragedMeasure average_over_site(const LatticeOperator& A, const Eigen::VectorXd& phi,
                                  const Measure& mu, const QuadratureSpec& quad, int workers = 1);

// | Im F_nu(z) - Im F_mu(-1/F_A(z)) | where nu = average_over_site(A, phi, mu):
// the two routes are an eigensolve-plus-quadrature mixture and a single
// resolvent evaluation pushed through the closed-form transform of mu.
double averaging_identity_residual(const LatticeOperator& A, const Eigen::VectorXd& phi,
                                   const Measure& mu, const QuadratureSpec& quad, HalfPlanePoint p);
double averaging_identity_residual(const AveragedMeasure& nu, const LatticeOperator& A,
                                   const Eigen::VectorXd& phi, const Measure& mu, HalfPlanePoint p);

// Monte Carlo average of Im <e_site, (H^omega - z)^{-1} e_site> over disorder
// realizations, on the (energies x scales) grid. Realization r uses the
// counter-based stream (seed, site, r), so results are bit-identical for any
// worker count (fixed-index reduction) and any site subset.
struct McSweep {
  std::vector<int> sites;
  std::vector<double> energies;
  std::vector<double> scales;
  int realizations = 100;
  std::uint64_t seed = 1;
};

std::vector<AveragedMeasure> mc_average_transform_multi(const OperatorConfig& cfg, const McSweep& sweep,
                                                        int workers = 1);
AveragedMeasure mc_average_transform(const OperatorConfig& cfg, int site,
                                     const std::vector<double>& energies,
                                     const std::vector<double>& scales, int realizations,
                                     std::uint64_t seed, int workers = 1);

// Hoelder-constant estimate of an averaged measure: mixture form goes through
// the direct window estimator of the explicit measure; table form evaluates
// sup_E scale^(1-alpha) * mean per scale with the same divergence fit. The
// echoed GridSpec for tables is reconstructed from the table axes.
HoelderEstimate estimate_averaged_hoelder(const AveragedMeasure& av, double alpha, const GridSpec& g,
                                          double divergence_threshold = 0.1);

// One certified inequality check. lhs is always a grid sup (a lower bound of
// the quantity it estimates); pass == (margin >= -tolerance).
struct BoundReport {
  std::string id;  // lemma21 | lemma22 | lemma23 | thm11 | thm12-scaling | thm12-weighted
  std::string detail;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::string bound_reports_json(const std::vector<BoundReport>& reports);
std::string bound_reports_csv(const std::vector<BoundReport>& reports);

// Weighted combination nu = sum beta_n nu_n of averaged measures with
// per-term modulations a_n. The report records the implied constant
// sum(beta_n |a_n|^{-alpha}) * d_mu (conservative prefactor 2^(2-alpha) pi as
// rhs, sharp variant in detail) and flags non-summable weight/modulation
// families by increment decay of beta_n |a_n|^{-alpha}.
struct WeightedComponent {
  double weight;      // beta_n > 0; family must sum to 1 (1e-9)
  double modulation;  // a_n != 0
  AveragedMeasure measure;
};

struct CombineResult {
  AveragedMeasure combined;
  BoundReport report;
};

CombineResult combine_weighted(std::vector<WeightedComponent> parts, double alpha, double d_mu,
                               const GridSpec& g);

// Typed checkers behind the generic check dispatch. Each returns a filled
// BoundReport; failures are reported, never thrown (exceptions are reserved
// for invalid inputs).
BoundReport check_lemma21(const Measure& sigma, const GridSpec& g);
BoundReport check_lemma22(const Measure& mu, double alpha, const GridSpec& g);
BoundReport check_lemma23(const Measure& sigma, const Measure& mu, double alpha, const GridSpec& g);
BoundReport check_thm11(const LatticeOperator& A, int site, const Measure& mu,
                        const QuadratureSpec& quad, double alpha, const GridSpec& nu_grid,
                        const GridSpec& mu_grid, int workers = 1);
// Pushforward identities for the direct estimator: scale (expected
// |c|^alpha * d) or translate (expected d unchanged). Grids for the
// transformed measure are the image of `g` under the same map, so the
// identity is exact up to float rounding; allowed slack is 2 resp. 1
// grid-resolution units.
BoundReport check_scaling(const Measure& mu, double c, double alpha, bool translate, const GridSpec& g);

// Generic dispatch used by the config runner.
struct CheckRequest {
  std::string id;
  const Measure* sigma = nullptr;
  const Measure* mu = nullptr;
  double alpha = 1.0;
  double scale_factor = 2.0;
  bool translate = false;
  const LatticeOperator* background = nullptr;
  int site = 0;
  QuadratureSpec quadrature;
  GridSpec grid;
  GridSpec mu_grid;
  double d_mu = 0.0;
  std::vector<WeightedComponent>* weighted_parts = nullptr;
  int workers = 1;
};

BoundReport check_bound(const CheckRequest& req);

}  // namespace idslab
