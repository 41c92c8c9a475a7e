#include "idslab/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace idslab {

namespace {

constexpr double kMergeGap = 1e-9;

void check_phi(const LatticeOperator& H, const Eigen::VectorXd& phi) {
  if (phi.size() != H.size()) throw std::invalid_argument("spectral: phi size mismatch");
  if (std::abs(phi.norm() - 1.0) > 1e-12) throw std::invalid_argument("spectral: phi must be unit norm");
}

void check_z(std::complex<double> z) {
  if (z.imag() == 0.0) throw std::domain_error("resolvent: z must be off the real axis");
}

SpectralMeasure from_eigen(const Eigen::VectorXd& values, const Eigen::VectorXd& overlaps) {
  // values ascending (Eigen guarantees this); overlaps are phi-components in
  // the eigenbasis.
  SpectralMeasure sm;
  const Eigen::Index n = values.size();
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    double wsum = overlaps[i] * overlaps[i];
    double pos_acc = values[i] * wsum;
    double plain_mean = values[i];
    while (j + 1 < n && values[j + 1] - values[j] <= kMergeGap) {
      ++j;
      const double w = overlaps[j] * overlaps[j];
      wsum += w;
      pos_acc += values[j] * w;
      plain_mean = values[j];
    }
    // Weighted mean when the cluster carries weight; last value otherwise.
    sm.points.push_back({wsum > 0.0 ? pos_acc / wsum : plain_mean, wsum});
    i = j + 1;
  }
  return sm;
}

}  // namespace

double SpectralMeasure::total_weight() const {
  double t = 0.0;
  for (const auto& p : points) t += p.weight;
  return t;
}

Measure SpectralMeasure::to_measure() const {
  const double total = total_weight();
  if (!(total > 0.0)) throw std::invalid_argument("spectral measure has no weight");
  std::vector<Atom> atoms;
  atoms.reserve(points.size());
  for (const auto& p : points) {
    if (p.weight > 0.0) atoms.push_back({p.eigenvalue, p.weight / total});
  }
  return Measure::atomic(std::move(atoms));
}

SpectralMeasure spectral_measure(const LatticeOperator& H, const Eigen::VectorXd& phi) {
  check_phi(H, phi);
  if (H.is_tridiagonal()) {
    const int n = H.size();
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
    for (int i = 0; i < n; ++i) diag[i] = H.matrix().coeff(i, i);
    for (int i = 0; i + 1 < n; ++i) sub[i] = H.matrix().coeff(i + 1, i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectral: eigensolver failed");
    return from_eigen(es.eigenvalues(), es.eigenvectors().transpose() * phi);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.dense());
  if (es.info() != Eigen::Success) throw std::runtime_error("spectral: eigensolver failed");
  return from_eigen(es.eigenvalues(), es.eigenvectors().transpose() * phi);
}

SpectralMeasure spectral_measure_site(const LatticeOperator& H, int site) {
  if (site < 0 || site >= H.size()) throw std::invalid_argument("spectral: site out of range");
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(H.size());
  phi[site] = 1.0;
  return spectral_measure(H, phi);
}

// --- resolvents ---------------------------------------------------------------

struct ResolventSolver::Impl {
  bool tridiagonal = false;
  // Tridiagonal path: diag entries and the two minor-ratio recursions.
  Eigen::VectorXcd shifted;      // d_i - z
  Eigen::VectorXcd left_ratio;   // r^-_i, forward continued fraction
  Eigen::VectorXcd right_ratio;  // r^+_i, backward continued fraction
  Eigen::VectorXd sub;           // subdiagonal couplings
  // General path.
  Eigen::SparseMatrix<std::complex<double>> mat;
  Eigen::SparseLU<Eigen::SparseMatrix<std::complex<double>>> lu;
  int n = 0;
};

ResolventSolver::ResolventSolver(const LatticeOperator& H, std::complex<double> z)
    : impl_(std::make_unique<Impl>()) {
  check_z(z);
  impl_->n = H.size();
  impl_->tridiagonal = H.is_tridiagonal();
  const int n = impl_->n;
  if (impl_->tridiagonal) {
    impl_->shifted.resize(n);
    impl_->sub.resize(std::max(n - 1, 0));
    for (int i = 0; i < n; ++i) impl_->shifted[i] = H.matrix().coeff(i, i) - z;
    for (int i = 0; i + 1 < n; ++i) impl_->sub[i] = H.matrix().coeff(i + 1, i);
    impl_->left_ratio.resize(n);
    impl_->right_ratio.resize(n);
    for (int i = 0; i < n; ++i) {
      std::complex<double> r = impl_->shifted[i];
      if (i > 0) {
        const double b = impl_->sub[i - 1];
        r -= b * b / impl_->left_ratio[i - 1];
      }
      impl_->left_ratio[i] = r;
    }
    for (int i = n - 1; i >= 0; --i) {
      std::complex<double> r = impl_->shifted[i];
      if (i + 1 < n) {
        const double b = impl_->sub[i];
        r -= b * b / impl_->right_ratio[i + 1];
      }
      impl_->right_ratio[i] = r;
    }
  } else {
    Eigen::SparseMatrix<std::complex<double>> m = H.matrix().cast<std::complex<double>>();
    Eigen::SparseMatrix<std::complex<double>> eye(n, n);
    eye.setIdentity();
    impl_->mat = m - z * eye;
    impl_->mat.makeCompressed();
    impl_->lu.compute(impl_->mat);
    if (impl_->lu.info() != Eigen::Success) throw std::runtime_error("resolvent: factorization failed");
  }
}

ResolventSolver::~ResolventSolver() = default;
ResolventSolver::ResolventSolver(ResolventSolver&&) noexcept = default;
ResolventSolver& ResolventSolver::operator=(ResolventSolver&&) noexcept = default;

std::complex<double> ResolventSolver::site_element(int site) const {
  if (site < 0 || site >= impl_->n) throw std::invalid_argument("resolvent: site out of range");
  if (impl_->tridiagonal) {
    // (H - z)^{-1}_{ss} = 1 / (d_s - z - b_{s-1}^2 / r^-_{s-1} - b_s^2 / r^+_{s+1})
    std::complex<double> den = impl_->shifted[site];
    if (site > 0) {
      const double b = impl_->sub[site - 1];
      den -= b * b / impl_->left_ratio[site - 1];
    }
    if (site + 1 < impl_->n) {
      const double b = impl_->sub[site];
      den -= b * b / impl_->right_ratio[site + 1];
    }
    return 1.0 / den;
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(impl_->n);
  rhs[site] = 1.0;
  const Eigen::VectorXcd u = impl_->lu.solve(rhs);
  return u[site];
}

std::complex<double> resolvent_element(const LatticeOperator& H, const Eigen::VectorXd& phi,
                                       std::complex<double> z) {
  check_phi(H, phi);
  check_z(z);
  const int n = H.size();
  if (H.is_tridiagonal()) {
    // One pivoting-free forward/backward sweep on (H - z) u = phi.
    Eigen::VectorXcd c(std::max(n - 1, 0)), d(n);
    std::complex<double> denom = H.matrix().coeff(0, 0) - z;
    d[0] = phi[0] / denom;
    if (n > 1) c[0] = H.matrix().coeff(0, 1) / denom;
    for (int i = 1; i < n; ++i) {
      const double b = H.matrix().coeff(i, i - 1);
      denom = (H.matrix().coeff(i, i) - z) - b * c[i - 1];
      if (i < n - 1) c[i] = H.matrix().coeff(i, i + 1) / denom;
      d[i] = (phi[i] - b * d[i - 1]) / denom;
    }
    Eigen::VectorXcd u(n);
    u[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) u[i] = d[i] - c[i] * u[i + 1];
    std::complex<double> acc{0.0, 0.0};
    for (int i = 0; i < n; ++i) acc += phi[i] * u[i];
    return acc;
  }
  Eigen::SparseMatrix<std::complex<double>> m = H.matrix().cast<std::complex<double>>();
  Eigen::SparseMatrix<std::complex<double>> eye(n, n);
  eye.setIdentity();
  Eigen::SparseLU<Eigen::SparseMatrix<std::complex<double>>> lu;
  Eigen::SparseMatrix<std::complex<double>> shifted = m - z * eye;
  shifted.makeCompressed();
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw std::runtime_error("resolvent: factorization failed");
  const Eigen::VectorXcd u = lu.solve(phi.cast<std::complex<double>>());
  std::complex<double> acc{0.0, 0.0};
  for (int i = 0; i < n; ++i) acc += phi[i] * u[i];
  return acc;
}

std::complex<double> resolvent_element_site(const LatticeOperator& H, int site, std::complex<double> z) {
  check_z(z);
  return ResolventSolver(H, z).site_element(site);
}

double rank_one_residual(const RankOneSplit& split, std::complex<double> z) {
  check_z(z);
  const std::complex<double> f_full = resolvent_element_site(split.recombined(), split.site, z);
  const std::complex<double> f_background = resolvent_element_site(split.background, split.site, z);
  const std::complex<double> predicted = 1.0 / (split.coupling + 1.0 / f_background);
  return std::abs(f_full - predicted);
}

}  // namespace idslab
