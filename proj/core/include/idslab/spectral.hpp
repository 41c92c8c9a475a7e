#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "idslab/measure.hpp"
#include "idslab/operators.hpp"

namespace idslab {

// Spectral measure <phi, E_H(.) phi> of a finite symmetric operator: atoms at
// the eigenvalues with weights (psi_k . phi)^2. Eigenvalue clusters closer
// than 1e-9 are merged (weighted-mean position, summed weight) so downstream
// atomic measures see strictly increasing positions.
struct SpectralMeasure {
  struct Point {
    double eigenvalue;
    double weight;
  };
  std::vector<Point> points;  // ascending

  double total_weight() const;
  // Atomic measure over the positive-weight points. Weights are renormalized
  // by the total (a pure float-rounding correction for unit phi).
  Measure to_measure() const;
};

// Requires |phi| = 1 within 1e-12 and phi.size() == H.size().
SpectralMeasure spectral_measure(const LatticeOperator& H, const Eigen::VectorXd& phi);
SpectralMeasure spectral_measure_site(const LatticeOperator& H, int site);

// <phi, (H - z)^{-1} phi> for Im z != 0. Tridiagonal operators use a
// pivoting-free recursion (stable: every leading principal minor of H - z is
// nonsingular off the real axis); everything else goes through sparse LU.
std::complex<double> resolvent_element(const LatticeOperator& H, const Eigen::VectorXd& phi,
                                       std::complex<double> z);
std::complex<double> resolvent_element_site(const LatticeOperator& H, int site, std::complex<double> z);

// Factorizes (H - z) once and serves per-site resolvent diagonal entries.
// For tridiagonal H both ratio recursions are precomputed, so site_element is
// O(1) per site; otherwise a sparse LU is stored and each site costs a solve.
class ResolventSolver {
 public:
  ResolventSolver(const LatticeOperator& H, std::complex<double> z);
  ~ResolventSolver();
  ResolventSolver(ResolventSolver&&) noexcept;
  ResolventSolver& operator=(ResolventSolver&&) noexcept;

  std::complex<double> site_element(int site) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Deviation of the resolvent of A + q P_site from the rank-one update formula
// applied to the resolvent of A:  | F_H(z) - 1 / (q + 1 / F_A(z)) |.
double rank_one_residual(const RankOneSplit& split, std::complex<double> z);

}  // namespace idslab
