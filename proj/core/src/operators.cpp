#include "idslab/operators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "idslab/measure_text.hpp"

namespace idslab {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("operator config: " + what);
}

constexpr int kMaxSites = 4096;

}  // namespace

int OperatorConfig::site_count() const {
  int n = 1;
  for (int d = 0; d < dimension; ++d) n *= side;
  return n;
}

void OperatorConfig::validate() const {
  require(dimension == 1 || dimension == 2, "dimension must be 1 or 2");
  require(side >= 1, "box side must be at least 1");
  long long n = 1;
  for (int d = 0; d < dimension; ++d) n *= side;
  require(n <= kMaxSites, "site count " + std::to_string(n) + " exceeds the dense-solver cap " +
                              std::to_string(kMaxSites));
  require(std::isfinite(coupling), "coupling must be finite");

  if (const auto* p = std::get_if<PeriodicBackground>(&background)) {
    require(static_cast<int>(p->period.size()) == dimension, "periodic background needs one period per dimension");
    long long cell = 1;
    for (int q : p->period) {
      require(q >= 1, "periods must be positive");
      cell *= q;
    }
    require(static_cast<long long>(p->values.size()) == cell,
            "periodic background needs " + std::to_string(cell) + " values");
    for (double v : p->values) require(std::isfinite(v), "background values must be finite");
  } else if (const auto* q = std::get_if<QuasiPeriodicBackground>(&background)) {
    require(std::isfinite(q->amplitude) && std::isfinite(q->frequency) && std::isfinite(q->phase),
            "quasiperiodic parameters must be finite");
  }

  switch (modulation.kind) {
    case ModulationSpec::Kind::Stationary:
      break;
    case ModulationSpec::Kind::Decaying:
    case ModulationSpec::Kind::Growing:
      require(modulation.delta >= 0.0 && std::isfinite(modulation.delta),
              "modulation exponent must be finite and nonnegative");
      break;
    case ModulationSpec::Kind::Table:
      require(static_cast<long long>(modulation.table.size()) == n,
              "modulation table needs one value per site");
      for (double v : modulation.table)
        require(std::isfinite(v) && v != 0.0, "modulation values must be finite and nonzero");
      break;
  }
}

std::vector<int> site_coords(const OperatorConfig& cfg, int flat) {
  std::vector<int> c(static_cast<std::size_t>(cfg.dimension));
  for (int d = cfg.dimension - 1; d >= 0; --d) {
    c[static_cast<std::size_t>(d)] = flat % cfg.side;
    flat /= cfg.side;
  }
  return c;
}

int site_flat_index(const OperatorConfig& cfg, const std::vector<int>& coords) {
  int flat = 0;
  for (int d = 0; d < cfg.dimension; ++d) flat = flat * cfg.side + coords[static_cast<std::size_t>(d)];
  return flat;
}

int site_offset_norm(const OperatorConfig& cfg, int flat) {
  const int c = (cfg.side - 1) / 2;
  int norm = 0;
  for (int x : site_coords(cfg, flat)) norm = std::max(norm, std::abs(x - c));
  return norm;
}

int center_site(const OperatorConfig& cfg) {
  const int c = (cfg.side - 1) / 2;
  std::vector<int> coords(static_cast<std::size_t>(cfg.dimension), c);
  return site_flat_index(cfg, coords);
}

double background_value(const OperatorConfig& cfg, int flat) {
  if (std::holds_alternative<std::monostate>(cfg.background)) return 0.0;
  if (const auto* p = std::get_if<PeriodicBackground>(&cfg.background)) {
    const auto coords = site_coords(cfg, flat);
    int idx = 0;
    for (int d = 0; d < cfg.dimension; ++d) {
      const std::size_t sd = static_cast<std::size_t>(d);
      idx = idx * p->period[sd] + coords[sd] % p->period[sd];
    }
    return p->values[static_cast<std::size_t>(idx)];
  }
  const auto& q = std::get<QuasiPeriodicBackground>(cfg.background);
  const int c = (cfg.side - 1) / 2;
  long long s = 0;
  for (int x : site_coords(cfg, flat)) s += x - c;
  return q.amplitude * std::cos(2.0 * std::numbers::pi * (q.frequency * static_cast<double>(s) + q.phase));
}

double modulation_value(const OperatorConfig& cfg, int flat) {
  switch (cfg.modulation.kind) {
    case ModulationSpec::Kind::Stationary:
      return 1.0;
    case ModulationSpec::Kind::Decaying:
      return std::pow(1.0 + site_offset_norm(cfg, flat), -cfg.modulation.delta);
    case ModulationSpec::Kind::Growing:
      return std::pow(1.0 + site_offset_norm(cfg, flat), cfg.modulation.delta);
    case ModulationSpec::Kind::Table:
      return cfg.modulation.table[static_cast<std::size_t>(flat)];
  }
  return 1.0;
}

DisorderSample sample_disorder(const OperatorConfig& cfg, std::uint64_t seed, std::uint64_t realization) {
  cfg.validate();
  DisorderSample s;
  s.seed = seed;
  s.realization = realization;
  const int n = cfg.site_count();
  s.values.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RandomStream rs(seed, static_cast<std::uint64_t>(i), realization);
    s.values[static_cast<std::size_t>(i)] = cfg.single_site.sample(rs);
  }
  return s;
}

// --- LatticeOperator ---------------------------------------------------------

namespace {

bool bandwidth_at_most_one(const Eigen::SparseMatrix<double>& m) {
  for (int k = 0; k < m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
      if (std::abs(it.row() - it.col()) > 1 && it.value() != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

LatticeOperator LatticeOperator::from_lattice(const OperatorConfig& cfg, const std::vector<double>& diag,
                                              std::vector<double> background) {
  const int n = cfg.site_count();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * (1 + 2 * cfg.dimension));
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, diag[static_cast<std::size_t>(i)]);
    const auto coords = site_coords(cfg, i);
    for (int d = 0; d < cfg.dimension; ++d) {
      auto nb = coords;
      ++nb[static_cast<std::size_t>(d)];
      if (nb[static_cast<std::size_t>(d)] < cfg.side) {
        const int j = site_flat_index(cfg, nb);
        trips.emplace_back(i, j, 1.0);
        trips.emplace_back(j, i, 1.0);
      }
    }
  }
  LatticeOperator op;
  op.mat_.resize(n, n);
  op.mat_.setFromTriplets(trips.begin(), trips.end());
  op.mat_.makeCompressed();
  op.background_ = std::move(background);
  op.dimension_ = cfg.dimension;
  op.side_ = cfg.side;
  op.tridiagonal_ = (cfg.dimension == 1) || n == 1;
  return op;
}

LatticeOperator LatticeOperator::from_dense(const Eigen::MatrixXd& symmetric,
                                            std::vector<double> background_diagonal) {
  const auto n = symmetric.rows();
  if (symmetric.cols() != n) throw std::invalid_argument("operator: matrix must be square");
  if (!symmetric.isApprox(symmetric.transpose(), 1e-12))
    throw std::invalid_argument("operator: matrix must be symmetric");
  if (background_diagonal.empty()) {
    background_diagonal.assign(static_cast<std::size_t>(n), 0.0);
  } else if (static_cast<Eigen::Index>(background_diagonal.size()) != n) {
    throw std::invalid_argument("operator: background diagonal size mismatch");
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || symmetric(i, j) != 0.0) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), symmetric(i, j));
    }
  }
  LatticeOperator op;
  op.mat_.resize(n, n);
  op.mat_.setFromTriplets(trips.begin(), trips.end());
  op.mat_.makeCompressed();
  op.background_ = std::move(background_diagonal);
  op.tridiagonal_ = bandwidth_at_most_one(op.mat_);
  return op;
}

LatticeOperator LatticeOperator::chain(std::vector<double> diagonal) {
  OperatorConfig cfg;
  cfg.dimension = 1;
  cfg.side = static_cast<int>(diagonal.size());
  cfg.validate();
  std::vector<double> zeros(diagonal.size(), 0.0);
  return from_lattice(cfg, diagonal, std::move(zeros));
}

double LatticeOperator::diagonal(int i) const {
  if (i < 0 || i >= size()) throw std::invalid_argument("operator: site out of range");
  return mat_.coeff(i, i);
}

LatticeOperator LatticeOperator::with_diagonal_entry(int site, double value) const {
  if (site < 0 || site >= size()) throw std::invalid_argument("operator: site out of range");
  LatticeOperator op(*this);
  op.mat_.coeffRef(site, site) = value;
  return op;
}

std::string LatticeOperator::coordinate_text() const {
  std::string out;
  for (int k = 0; k < mat_.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, k); it; ++it) {
      if (it.row() > it.col()) continue;
      out += std::to_string(it.row()) + " " + std::to_string(it.col()) + " " + format_double(it.value()) + "\n";
    }
  }
  return out;
}

LatticeOperator build_hamiltonian(const OperatorConfig& cfg, const DisorderSample& sample) {
  cfg.validate();
  const int n = cfg.site_count();
  if (static_cast<int>(sample.values.size()) != n)
    throw std::invalid_argument("operator: disorder sample size mismatch");
  std::vector<double> w(static_cast<std::size_t>(n)), diag(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    w[si] = background_value(cfg, i);
    diag[si] = w[si] + cfg.coupling * modulation_value(cfg, i) * sample.values[si];
  }
  return LatticeOperator::from_lattice(cfg, diag, std::move(w));
}

LatticeOperator background_operator(const OperatorConfig& cfg) {
  cfg.validate();
  const int n = cfg.site_count();
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = background_value(cfg, i);
  return LatticeOperator::from_lattice(cfg, w, w);
}

Eigen::VectorXd RankOneSplit::phi() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(background.size());
  v[site] = 1.0;
  return v;
}

LatticeOperator RankOneSplit::recombined() const {
  return background.with_diagonal_entry(site, original_diagonal);
}

RankOneSplit split_rank_one(const LatticeOperator& H, int site) {
  if (site < 0 || site >= H.size()) throw std::invalid_argument("split_rank_one: site out of range");
  const double original = H.diagonal(site);
  const double base = H.background_diagonal()[static_cast<std::size_t>(site)];
  return {H.with_diagonal_entry(site, base), site, original - base, original};
}

}  // namespace idslab
