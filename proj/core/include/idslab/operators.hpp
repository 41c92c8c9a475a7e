#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "idslab/measure.hpp"

namespace idslab {

// Deterministic background potentials W on the box. Periodic patterns are
// anchored at the box origin (raw 0-based coordinates mod period); the
// quasiperiodic family is evaluated in centered coordinates.
struct PeriodicBackground {
  std::vector<int> period;      // one entry per dimension, each >= 1
  std::vector<double> values;   // row-major over one period cell
};

struct QuasiPeriodicBackground {
  double amplitude = 1.0;
  double frequency = 0.61803398874989484820;  // (sqrt(5) - 1) / 2
  double phase = 0.0;
  // W(n) = amplitude * cos(2 pi (frequency * sum_i n_i + phase))
};

using BackgroundSpec = std::variant<std::monostate, PeriodicBackground, QuasiPeriodicBackground>;

// Site-dependent disorder modulation a_n; every value must be nonzero.
// Decaying/Growing use (1 + |n|)^(-delta) resp. (1 + |n|)^(+delta) with |n|
// the sup-norm distance from the box center floor((L-1)/2) per axis.
struct ModulationSpec {
  enum class Kind { Stationary, Decaying, Growing, Table };
  Kind kind = Kind::Stationary;
  double delta = 0.0;
  std::vector<double> table;  // one value per site for Kind::Table
};

struct OperatorConfig {
  int dimension = 1;  // 1 or 2
  int side = 1;       // box side L; sites = L^dimension, capped at 4096
  BackgroundSpec background;
  ModulationSpec modulation;
  Measure single_site = Measure::uniform(0.0, 1.0);
  double coupling = 1.0;

  int site_count() const;
  void validate() const;  // throws std::invalid_argument
};

// Site indexing: flat index i runs row-major over the box. Coordinates are
// 0-based; centered coordinates subtract floor((L-1)/2) per axis.
std::vector<int> site_coords(const OperatorConfig& cfg, int flat);
int site_flat_index(const OperatorConfig& cfg, const std::vector<int>& coords);
int site_offset_norm(const OperatorConfig& cfg, int flat);  // sup-norm of centered coords
int center_site(const OperatorConfig& cfg);

double background_value(const OperatorConfig& cfg, int flat);
double modulation_value(const OperatorConfig& cfg, int flat);

// One disorder realization: values[i] is the single-site draw at flat site i.
// Regeneration from (seed, realization) is bit-exact and independent of
// evaluation order (one counter-based stream per site).
struct DisorderSample {
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
  std::vector<double> values;
};

DisorderSample sample_disorder(const OperatorConfig& cfg, std::uint64_t seed,
                               std::uint64_t realization = 0);

// Symmetric operator on the box: nearest-neighbor hopping of strength 1 plus
// a diagonal. Stores the full symmetric sparse matrix together with the
// disorder-free part of the diagonal (used by rank-one splitting).
class LatticeOperator {
 public:
  static LatticeOperator from_dense(const Eigen::MatrixXd& symmetric,
                                    std::vector<double> background_diagonal = {});
  // 1-D chain with unit hopping and the given diagonal; zero background.
  static LatticeOperator chain(std::vector<double> diagonal);

  int size() const { return static_cast<int>(mat_.rows()); }
  int dimension() const { return dimension_; }  // 0 when not lattice-built
  int side() const { return side_; }
  const Eigen::SparseMatrix<double>& matrix() const { return mat_; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(mat_); }
  const std::vector<double>& background_diagonal() const { return background_; }
  double diagonal(int i) const;
  bool is_tridiagonal() const { return tridiagonal_; }

  // Copy with a single diagonal entry replaced (not incremented), so a
  // rank-one recombination reproduces the original entry bit-exactly.
  LatticeOperator with_diagonal_entry(int site, double value) const;

  // "row col value" lines for the upper triangle, for external inspection.
  std::string coordinate_text() const;

  friend LatticeOperator build_hamiltonian(const OperatorConfig&, const DisorderSample&);
  friend LatticeOperator background_operator(const OperatorConfig&);

 private:
  LatticeOperator() = default;
  static LatticeOperator from_lattice(const OperatorConfig& cfg, const std::vector<double>& diag,
                                      std::vector<double> background);

  Eigen::SparseMatrix<double> mat_;
  std::vector<double> background_;
  int dimension_ = 0;
  int side_ = 0;
  bool tridiagonal_ = false;
};

// H = hopping + diag(W + coupling * a * omega).
LatticeOperator build_hamiltonian(const OperatorConfig& cfg, const DisorderSample& sample);
// A = hopping + diag(W): the disorder-free part.
LatticeOperator background_operator(const OperatorConfig& cfg);

// H = A + q P_site with A equal to H except that the site diagonal is reset
// to its disorder-free value.
struct RankOneSplit {
  LatticeOperator background;  // A
  int site = 0;
  double coupling = 0.0;            // q
  double original_diagonal = 0.0;   // H(site, site), for exact recombination

  Eigen::VectorXd phi() const;          // canonical unit vector at the site
  LatticeOperator recombined() const;   // A with the site diagonal restored
};

RankOneSplit split_rank_one(const LatticeOperator& H, int site);

}  // namespace idslab
