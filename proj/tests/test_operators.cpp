#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "idslab/operators.hpp"

using idslab::DisorderSample;
using idslab::LatticeOperator;
using idslab::Measure;
using idslab::OperatorConfig;

namespace {

OperatorConfig chain_cfg(int side) {
  OperatorConfig cfg;
  cfg.dimension = 1;
  cfg.side = side;
  return cfg;
}

bool same_matrix(const LatticeOperator& a, const LatticeOperator& b) {
  return (a.dense() - b.dense()).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

TEST_CASE("free chain assembles the expected matrix") {
  const DisorderSample zero{0, 0, {0.0, 0.0, 0.0}};
  OperatorConfig cfg = chain_cfg(3);
  cfg.single_site = Measure::point_mass(0.0);
  const auto H = idslab::build_hamiltonian(cfg, zero);
  Eigen::MatrixXd want(3, 3);
  want << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  CHECK((H.dense() - want).cwiseAbs().maxCoeff() == 0.0);
  CHECK(H.is_tridiagonal());
  CHECK(H.dimension() == 1);
}

TEST_CASE("diagonal carries background plus modulated disorder") {
  OperatorConfig cfg = chain_cfg(5);
  cfg.background = idslab::PeriodicBackground{{2}, {10.0, 20.0}};
  cfg.modulation.kind = idslab::ModulationSpec::Kind::Decaying;
  cfg.modulation.delta = 1.0;
  cfg.coupling = 2.0;
  const DisorderSample s{0, 0, {1.0, 1.0, 1.0, 1.0, 1.0}};
  const auto H = idslab::build_hamiltonian(cfg, s);
  // Periodic background anchored at raw coordinate 0; center site is 2, so
  // the decay profile over the chain is 1/3, 1/2, 1, 1/2, 1/3.
  const double want[] = {10 + 2.0 / 3.0, 20 + 1.0, 10 + 2.0, 20 + 1.0, 10 + 2.0 / 3.0};
  for (int i = 0; i < 5; ++i) CHECK(H.diagonal(i) == doctest::Approx(want[i]).epsilon(1e-15));
  // The disorder-free diagonal keeps only the background.
  CHECK(H.background_diagonal() == std::vector<double>{10, 20, 10, 20, 10});
}

TEST_CASE("quasiperiodic background follows its formula in centered coordinates") {
  OperatorConfig cfg = chain_cfg(7);
  idslab::QuasiPeriodicBackground qp;
  qp.amplitude = 1.5;
  qp.frequency = 0.41;
  qp.phase = 0.2;
  cfg.background = qp;
  for (int i = 0; i < 7; ++i) {
    const int n = i - 3;
    const double want = 1.5 * std::cos(2 * std::numbers::pi * (0.41 * n + 0.2));
    CHECK(idslab::background_value(cfg, i) == doctest::Approx(want).epsilon(1e-15));
  }
}

TEST_CASE("modulation families") {
  OperatorConfig cfg = chain_cfg(5);
  cfg.modulation.kind = idslab::ModulationSpec::Kind::Growing;
  cfg.modulation.delta = 2.0;
  CHECK(idslab::modulation_value(cfg, 2) == 1.0);
  CHECK(idslab::modulation_value(cfg, 4) == doctest::Approx(9.0).epsilon(1e-15));
  cfg.modulation.kind = idslab::ModulationSpec::Kind::Table;
  cfg.modulation.table = {1, 2, 3, 4, 5};
  CHECK(idslab::modulation_value(cfg, 3) == 4.0);
}

TEST_CASE("two dimensional indexing is row major with a centered norm") {
  OperatorConfig cfg;
  cfg.dimension = 2;
  cfg.side = 5;
  CHECK(cfg.site_count() == 25);
  CHECK(idslab::center_site(cfg) == 12);
  CHECK(idslab::site_coords(cfg, 7) == std::vector<int>{1, 2});
  CHECK(idslab::site_flat_index(cfg, {1, 2}) == 7);
  CHECK(idslab::site_offset_norm(cfg, 12) == 0);
  CHECK(idslab::site_offset_norm(cfg, 0) == 2);
  CHECK(idslab::site_offset_norm(cfg, 7) == 1);

  // Interior site has 4 neighbors, corner site 2; the diagonal entry is
  // always stored, even when zero.
  const auto A = idslab::background_operator(cfg);
  CHECK(A.matrix().col(12).nonZeros() == 5);
  CHECK(A.matrix().col(0).nonZeros() == 3);
  CHECK_FALSE(A.is_tridiagonal());
}

TEST_CASE("disorder sampling is reproducible and order independent") {
  OperatorConfig cfg = chain_cfg(64);
  const auto a = idslab::sample_disorder(cfg, 11, 3);
  const auto b = idslab::sample_disorder(cfg, 11, 3);
  CHECK(a.values == b.values);
  const auto c = idslab::sample_disorder(cfg, 11, 4);
  CHECK(a.values != c.values);
  const auto d = idslab::sample_disorder(cfg, 12, 3);
  CHECK(a.values != d.values);

  // A wider box extends the same per-site streams: shared sites, shared draws
  // is NOT required by the contract, but every draw lies in the law's support.
  for (const double v : a.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  // Empirical mean over a 2-d box within 5 sigma of the law's mean.
  OperatorConfig big;
  big.dimension = 2;
  big.side = 50;
  const auto s = idslab::sample_disorder(big, 5, 0);
  double mean = 0.0;
  for (const double v : s.values) mean += v;
  mean /= s.values.size();
  CHECK(std::abs(mean - 0.5) < 5.0 * (1.0 / std::sqrt(12.0)) / 50.0);
}

TEST_CASE("masking one site removes all dependence on its draw") {
  OperatorConfig cfg = chain_cfg(9);
  cfg.coupling = 1.7;
  auto s1 = idslab::sample_disorder(cfg, 21, 0);
  auto s2 = s1;
  s2.values[4] = 0.123456789;
  const auto H1 = idslab::build_hamiltonian(cfg, s1);
  const auto H2 = idslab::build_hamiltonian(cfg, s2);
  const auto split1 = idslab::split_rank_one(H1, 4);
  const auto split2 = idslab::split_rank_one(H2, 4);
  CHECK(same_matrix(split1.background, split2.background));
  // Only the coupling differs, by exactly the draw difference times the factor.
  CHECK(split1.coupling - split2.coupling ==
        doctest::Approx(1.7 * (s1.values[4] - s2.values[4])).epsilon(1e-15));
}

TEST_CASE("split and recombine restore the operator bit for bit") {
  OperatorConfig cfg = chain_cfg(12);
  cfg.background = idslab::QuasiPeriodicBackground{};
  cfg.coupling = 0.9;
  const auto s = idslab::sample_disorder(cfg, 3, 1);
  const auto H = idslab::build_hamiltonian(cfg, s);
  for (const int site : {0, 5, 11}) {
    const auto split = idslab::split_rank_one(H, site);
    CHECK((split.recombined().dense() - H.dense()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(split.background.diagonal(site) == H.background_diagonal()[static_cast<std::size_t>(site)]);
    const Eigen::VectorXd phi = split.phi();
    CHECK(phi.size() == 12);
    CHECK(phi(site) == 1.0);
    CHECK(phi.sum() == 1.0);
  }
  CHECK_THROWS_AS(idslab::split_rank_one(H, 12), std::invalid_argument);
}

TEST_CASE("splitting a dense operator keeps the full off-diagonal part") {
  Eigen::MatrixXd m(2, 2);
  m << 5, 1, 1, 2;
  const auto H = LatticeOperator::from_dense(m);
  const auto split = idslab::split_rank_one(H, 0);
  CHECK(split.coupling == 5.0);
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 2;
  CHECK((split.background.dense() - a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eigenvalues respect the deterministic norm bound") {
  OperatorConfig cfg = chain_cfg(60);
  cfg.coupling = 1.0;
  const auto s = idslab::sample_disorder(cfg, 9, 0);
  const auto H = idslab::build_hamiltonian(cfg, s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.dense());
  // Hopping contributes 2 per dimension, the diagonal at most coupling * 1.
  CHECK(es.eigenvalues().minCoeff() >= -3.0 - 1e-12);
  CHECK(es.eigenvalues().maxCoeff() <= 3.0 + 1e-12);
}

TEST_CASE("hopping is translation covariant away from the boundary") {
  OperatorConfig cfg = chain_cfg(10);
  auto s = idslab::sample_disorder(cfg, 14, 0);
  auto shifted = s;
  for (int i = 9; i >= 1; --i) shifted.values[static_cast<std::size_t>(i)] = s.values[static_cast<std::size_t>(i - 1)];
  const auto H = idslab::build_hamiltonian(cfg, s);
  const auto Hs = idslab::build_hamiltonian(cfg, shifted);
  // The shifted operator restricted to sites 1..9 matches the original on 0..8.
  CHECK((Hs.dense().block(1, 1, 9, 9) - H.dense().block(0, 0, 9, 9)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("configuration validation") {
  OperatorConfig cfg = chain_cfg(3);
  cfg.dimension = 3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = chain_cfg(0);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = OperatorConfig{};
  cfg.dimension = 2;
  cfg.side = 70;  // 4900 sites, above the cap
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = chain_cfg(4);
  cfg.modulation.kind = idslab::ModulationSpec::Kind::Table;
  cfg.modulation.table = {1, 0, 1, 1};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.modulation.table = {1, 1, 1};  // wrong length
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = chain_cfg(4);
  cfg.modulation.kind = idslab::ModulationSpec::Kind::Decaying;
  cfg.modulation.delta = -0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = chain_cfg(4);
  cfg.background = idslab::PeriodicBackground{{3}, {1.0, 2.0}};  // period/value mismatch
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("coordinate text lists the upper triangle") {
  const auto H = LatticeOperator::chain({1.0, 2.0});
  const std::string txt = H.coordinate_text();
  CHECK(txt.find("0 0 1") != std::string::npos);
  CHECK(txt.find("0 1 1") != std::string::npos);
  CHECK(txt.find("1 1 2") != std::string::npos);
}

TEST_CASE("chain constructor and diagonal accessors") {
  const auto H = LatticeOperator::chain({0.5, -1.0, 2.0});
  CHECK(H.size() == 3);
  CHECK(H.is_tridiagonal());
  CHECK(H.diagonal(1) == -1.0);
  CHECK(H.background_diagonal() == std::vector<double>{0, 0, 0});
  CHECK_THROWS_AS(H.diagonal(3), std::invalid_argument);
  CHECK_THROWS_AS(H.with_diagonal_entry(-1, 0.0), std::invalid_argument);
  const auto H2 = H.with_diagonal_entry(1, 7.0);
  CHECK(H2.diagonal(1) == 7.0);
  CHECK(H.diagonal(1) == -1.0);
}
