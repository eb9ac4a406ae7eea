#include <doctest.h>

#include <random>

#include "nmzkit/demos.hpp"
#include "nmzkit/errors.hpp"
#include "nmzkit/quantum.hpp"

using namespace nmzkit;
using namespace nmzkit::quantum;

namespace {

MatrixC random_hermitian(std::mt19937_64& eng, int d) {
  std::normal_distribution<double> nd;
  MatrixC m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cplx(nd(eng), nd(eng));
  return (m + m.adjoint()) / 2.0;
}

MatrixC random_density(std::mt19937_64& eng, int d) {
  std::normal_distribution<double> nd;
  MatrixC m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cplx(nd(eng), nd(eng));
  MatrixC r = m * m.adjoint();
  return r / r.trace();
}

}  // namespace

TEST_CASE("Liouvillian superoperator") {
  std::mt19937_64 eng(1);
  const MatrixC h = random_hermitian(eng, 3), rho = random_density(eng, 3);
  const MatrixC L = build_liouvillian_superop(h);
  CHECK(max_abs(unvec(L * vec(rho), 3) - (-I_unit * (h * rho - rho * h))) < 1e-13);
  // trace preservation: vec(I) spans a left null vector
  CHECK((vec(MatrixC::Identity(3, 3)).transpose() * L).cwiseAbs().maxCoeff() < 1e-13);
  MatrixC hd = MatrixC::Zero(3, 3), rd = MatrixC::Zero(3, 3);
  hd.diagonal() << 1.0, -2.0, 0.5;
  rd.diagonal() << 0.2, 0.3, 0.5;
  CHECK((build_liouvillian_superop(hd) * vec(rd)).cwiseAbs().maxCoeff() == 0.0);
  // eigenvalues are -i (E_j - E_k)
  Eigen::SelfAdjointEigenSolver<MatrixC> es(h);
  Eigen::ComplexEigenSolver<MatrixC> ls(L, false);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) {
      const cplx target = -I_unit * (es.eigenvalues()(j) - es.eigenvalues()(k));
      double best = 1e9;
      for (Eigen::Index i = 0; i < ls.eigenvalues().size(); ++i) best = std::min(best, std::abs(ls.eigenvalues()(i) - target));
      CHECK(best < 1e-10);
    }
  MatrixC nh = h;
  nh(0, 1) += 1.0;
  CHECK_THROWS_AS(build_liouvillian_superop(nh), NotHermitian);
}

TEST_CASE("system validation") {
  const MatrixC h = two_qubit_hamiltonian(1.0, 0.3);
  const MatrixC rhoB = MatrixC::Identity(2, 2) / 2.0;
  CHECK_NOTHROW(BipartiteSystem::product(2, 2, h, demos::default_sigma0(), rhoB).validate());
  MatrixC bad = MatrixC::Identity(2, 2);
  CHECK_THROWS_AS(BipartiteSystem::product(2, 2, h, bad, rhoB).validate(), InvalidDensityMatrix);
  auto sys = BipartiteSystem::product(2, 2, h, demos::default_sigma0(), rhoB);
  sys.H(0, 1) += 0.1;
  CHECK_THROWS_AS(sys.validate(), NotHermitian);
  const MatrixC big = MatrixC::Identity(18, 18);
  CHECK_THROWS(BipartiteSystem::product(3, 6, big, MatrixC::Identity(3, 3) / 3.0, MatrixC::Identity(6, 6) / 6.0).validate());
}

TEST_CASE("exact reduction basics") {
  const auto sys = demos::two_qubit_system(1.0, 0.3, 0.7);
  const auto grid = nmz::TimeGrid::span(5.0, 1e-2);
  const auto ex = exact_reduce(sys, grid);
  CHECK(max_abs(ex.front() - partial_trace_b(sys.rho0, 2, 2)) < 1e-15);
  for (const auto& s : ex) CHECK(std::real((s * s).trace()) <= 1.0 + 1e-12);
  // commuting case: populations constant in the eigenbasis of H_A
  MatrixC ha = MatrixC::Zero(2, 2);
  ha.diagonal() << 0.4, -0.4;
  MatrixC hb = MatrixC::Zero(2, 2);
  hb.diagonal() << 1.0, 0.0;
  const MatrixC h = kron(ha, MatrixC::Identity(2, 2)) + kron(ha, hb);
  const auto diag = BipartiteSystem::product(2, 2, h, demos::default_sigma0(), sys.rhoB);
  const auto exd = exact_reduce(diag, grid);
  for (const auto& s : exd) CHECK((s.diagonal() - exd.front().diagonal()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("decoupled Hamiltonian reduces to unitary evolution of A") {
  std::mt19937_64 eng(2);
  const MatrixC ha = random_hermitian(eng, 2), hb = random_hermitian(eng, 3);
  const MatrixC h = kron(ha, MatrixC::Identity(3, 3)) + kron(MatrixC::Identity(2, 2), hb);
  const MatrixC sigma0 = random_density(eng, 2), rhoB = random_density(eng, 3);
  const auto sys = BipartiteSystem::product(2, 3, h, sigma0, rhoB);
  const auto grid = nmz::TimeGrid::span(2.0, 1e-3);
  const auto red = nmz_reduce_bipartite(sys, grid);
  CHECK(red.max_noise_norm <= 1e-12);
  for (std::size_t k = 0; k < grid.size(); k += 100) {
    const MatrixC u = expm(-I_unit * grid.time(k) * ha);
    CHECK(operator_norm(red.sigma[k] - u * sigma0 * u.adjoint()) < 1e-6);
  }
}

TEST_CASE("two-qubit reduction matches exact propagation") {
  const auto sys = demos::two_qubit_system(1.0, 0.3, 0.7);
  const auto grid = nmz::TimeGrid::span(5.0, 1e-3);
  const auto red = nmz_reduce_bipartite(sys, grid);
  const auto ex = exact_reduce(sys, grid);
  double err = 0.0;
  for (std::size_t k = 0; k < ex.size(); ++k) {
    err = std::max(err, operator_norm(red.sigma[k] - ex[k]));
    CHECK(is_hermitian(red.sigma[k], 1e-9));
    CHECK(std::abs(red.sigma[k].trace() - cplx(1.0)) < 1e-9);
    CHECK(hermitian_min_eigenvalue(red.sigma[k]) >= -1e-9);
  }
  CHECK(err <= 1e-6);
  CHECK(red.max_noise_norm <= 1e-12);
  CHECK_FALSE(red.solution.real_valued);
}

TEST_CASE("reduction error is second order in dt") {
  const auto sys = demos::two_qubit_system(1.0, 0.3, 0.7);
  std::vector<double> c;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    const auto grid = nmz::TimeGrid::span(2.0, dt);
    const auto red = nmz_reduce_bipartite(sys, grid);
    const auto ex = exact_reduce(sys, grid);
    double err = 0.0;
    for (std::size_t k = 0; k < ex.size(); ++k) err = std::max(err, operator_norm(red.sigma[k] - ex[k]));
    c.push_back(err / (dt * dt));
  }
  CHECK(c[1] / c[0] == doctest::Approx(1.0).epsilon(0.1));
  CHECK(c[2] / c[1] == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("correlated initial state produces noise") {
  const auto sys0 = demos::two_qubit_system(1.0, 0.3, 0.7);
  BipartiteSystem sys = sys0;
  VectorC bell = VectorC::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  sys.rho0 = bell * bell.adjoint();
  const auto grid = nmz::TimeGrid::span(2.0, 1e-3);
  const auto red = nmz_reduce_bipartite(sys, grid);
  CHECK(red.max_noise_norm > 1e-3);
  const auto ex = exact_reduce(sys, grid);
  double err = 0.0;
  for (std::size_t k = 0; k < ex.size(); ++k) err = std::max(err, operator_norm(red.sigma[k] - ex[k]));
  CHECK(err <= 1e-6);
}
