#include <doctest.h>

#include <random>

#include "nmzkit/demos.hpp"
#include "nmzkit/errors.hpp"
#include "nmzkit/nmz.hpp"

using namespace nmzkit;
using namespace nmzkit::nmz;

namespace {

double su2_error(double dt) {
  const auto m = demos::su2_model(1.0);
  const auto s = solve_observable_nmz(m.L, m.P, VectorC::Unit(2, 0), TimeGrid::span(10.0, dt));
  double err = 0.0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double t = s.times[k];
    err = std::max(err, std::abs(s.trajectory[k](0) - std::cos(t)));
    err = std::max(err, std::abs(s.trajectory[k](1) - std::sin(t)));
  }
  return err;
}

bool contains(const std::vector<cplx>& ev, cplx z, double tol) {
  for (cplx e : ev)
    if (std::abs(e - z) <= tol) return true;
  return false;
}

}  // namespace

TEST_CASE("time grid") {
  const auto g = TimeGrid::span(10.0, 1e-3);
  CHECK(g.nSteps == 10000);
  CHECK(g.size() == 10001);
  CHECK(g.time(10000) == doctest::Approx(10.0));
  CHECK_THROWS(TimeGrid::span(1.0, 0.3));
  CHECK_THROWS(TimeGrid::span(1.0, -0.1));
}

TEST_CASE("SU(2) observable Langevin data") {
  const auto m = demos::su2_model(1.0);
  const auto kt = assemble_gle(m.L, m.P, VectorC::Unit(2, 0), Picture::Observable);
  CHECK(max_abs(kt.full_omega()) < 1e-15);
  const cplx detH = m.H.determinant();
  for (double t : {0.0, 0.5, 3.0, 9.0}) {
    CHECK((kt.full_noise(t) - VectorC::Unit(2, 1)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((kt.full_kernel(t) * VectorC::Unit(2, 0) - detH * VectorC::Unit(2, 0)).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK(kt.rank() == 1);
}

TEST_CASE("SO(3) kernel contraction") {
  const auto m = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7);
  const auto kt = assemble_gle(m.L, m.P, VectorC::Unit(3, 0), Picture::Observable);
  const double r = m.r;
  for (double s = 0.0; s <= 10.0; s += 0.25) {
    const VectorC plr = kt.P * kt.L * kt.full_noise(s);
    const VectorC expected = -(2.0 / 3.0) * r * r * std::cos(r * s / std::sqrt(3.0)) * VectorC::Unit(3, 0);
    CHECK((plr - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("identity projection has no noise and no memory") {
  const auto m = demos::so3_model(0.1, 0.2, 0.3);
  const MatrixC id = MatrixC::Identity(3, 3);
  const auto kt = assemble_gle(m.L.matrix, id, VectorC::Unit(3, 0), Picture::Observable);
  CHECK(max_abs(kt.full_omega() - m.L.matrix) < 1e-15);
  CHECK(max_abs(kt.full_kernel(1.3)) == 0.0);
  CHECK(kt.full_noise(0.7).cwiseAbs().maxCoeff() == 0.0);
  const auto s = solve_volterra(kt, TimeGrid::span(2.0, 1e-3));
  CHECK((s.trajectory.back() - projected_propagation(m.L.matrix, id, VectorC::Unit(3, 0), TimeGrid::span(2.0, 1e-3)).back())
            .cwiseAbs()
            .maxCoeff() < 1e-6);
}

TEST_CASE("kernel reduced and full forms agree and are time homogeneous") {
  const auto m = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7);
  const auto kt = assemble_gle(m.L, m.P, VectorC::Unit(3, 0), Picture::Observable);
  const MatrixC ql = kt.Q * kt.L;
  CHECK(max_abs(kt.full_kernel(0.0) - kt.P * kt.L * kt.Q * kt.L * kt.P) < 1e-14);
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int k = 0; k < 10; ++k) {
    double t = u(eng), s = u(eng);
    if (s > t) std::swap(s, t);
    const MatrixC twoTime = kt.P * kt.L * expm(t * ql) * expm(-s * ql) * ql * kt.P;
    CHECK(max_abs(twoTime - kt.full_kernel(t - s)) < 1e-12);
  }
}

TEST_CASE("constant trajectory for a vanishing system") {
  VolterraSystem sys;
  sys.omega = MatrixC::Zero(2, 2);
  sys.noise = [](double) { return MatrixC::Zero(2, 1); };
  sys.kernel = [](double) { return MatrixC::Zero(2, 2); };
  sys.z0 = MatrixC::Constant(2, 1, cplx(1.5, -0.5));
  const auto tr = solve_volterra_convolution(sys, TimeGrid::span(1.0, 0.01));
  for (const auto& z : tr.z) CHECK(max_abs(z - sys.z0) == 0.0);
}

TEST_CASE("SU(2) observable solution and second-order convergence") {
  const double e1 = su2_error(1e-3), e2 = su2_error(5e-4);
  CHECK(e1 <= 1e-6);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 <= 4.5);
}

TEST_CASE("SO(3) observable solution") {
  const auto m = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7);
  const auto s = solve_observable_nmz(m.L, m.P, VectorC::Unit(3, 0), TimeGrid::span(10.0, 1e-3));
  double err = 0.0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double t = s.times[k];
    VectorC ref(3);
    ref << 1.0, std::sin(t), 1.0 - std::cos(t);
    err = std::max(err, (s.trajectory[k] - ref).cwiseAbs().maxCoeff());
  }
  CHECK(err <= 1e-6);
  CHECK(s.max_imaginary() < 1e-12);
}

TEST_CASE("recursive and convolution history sums agree") {
  const auto m = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7);
  const auto grid = TimeGrid::span(2.0, 1e-2);
  const auto a = solve_observable_nmz(m.L, m.P, VectorC::Unit(3, 0), grid, HistoryMethod::Recursive);
  const auto b = solve_observable_nmz(m.L, m.P, VectorC::Unit(3, 0), grid, HistoryMethod::Convolution);
  double d = 0.0;
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) d = std::max(d, (a.trajectory[k] - b.trajectory[k]).cwiseAbs().maxCoeff());
  CHECK(d < 1e-11);
}

TEST_CASE("SU(2) state solution") {
  const auto m = demos::su2_model(1.0);
  const auto s = solve_state_nmz(m.Lstar, m.Pstar, VectorC::Unit(4, 1), TimeGrid::span(10.0, 2.5e-4));
  double err = 0.0, cons = 0.0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double c = std::cos(2.0 * s.times[k]);
    err = std::max(err, std::abs(s.trajectory[k](1) - (2.0 * c + 1.0) / 3.0));
    cons = std::max(cons, std::abs(s.trajectory[k](0) + s.trajectory[k](1) - cplx(1.0)));
  }
  CHECK(err <= 1e-6);
  CHECK(cons <= 1e-10);
}

TEST_CASE("SO(3) state solution matches direct propagation") {
  const auto m = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7);
  const VectorC rho0 = 9.0 * VectorC::Unit(10, 2);
  const auto grid = TimeGrid::span(5.0, 2.5e-4);
  const auto s = solve_state_nmz(m.Lstar, m.Pstar, rho0, grid);
  const auto ref = projected_propagation(m.Lstar.matrix, m.Pstar.matrix, rho0, grid);
  double err = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) err = std::max(err, (s.trajectory[k] - ref[k]).cwiseAbs().maxCoeff());
  CHECK(err <= 1e-6);
}

TEST_CASE("state noise vanishes when the initial state lies in the image") {
  const auto m = demos::su2_model(1.0);
  const auto kt = assemble_gle(m.Lstar, m.Pstar, VectorC::Unit(4, 1), Picture::State);
  for (double t : {0.0, 1.0, 4.0}) CHECK(kt.full_noise(t).cwiseAbs().maxCoeff() == 0.0);
  const auto s = solve_state_nmz(m.Lstar, m.Pstar, VectorC::Unit(4, 1), TimeGrid::span(1.0, 1e-2));
  for (double n : s.noise_norm) CHECK(n == 0.0);
}

TEST_CASE("implicit step reports a singular step matrix") {
  MatrixC l(1, 1);
  l(0, 0) = 200.0;
  const auto kt = assemble_gle(l, MatrixC::Identity(1, 1), VectorC::Ones(1), Picture::State);
  CHECK_THROWS_AS(solve_volterra(kt, TimeGrid::span(1.0, 1e-2)), StepDivergence);
}

TEST_CASE("problem validation") {
  const auto a = demos::su2_model(1.0), b = demos::su2_model(1.0);
  CHECK_THROWS_AS(GLEProblem::make(a.L, b.P, VectorC::Unit(2, 0), TimeGrid::span(1.0, 0.1), Picture::Observable), BasisMismatch);
  MatrixC notProj = MatrixC::Identity(2, 2);
  notProj(0, 1) = 0.5;
  notProj(1, 1) = 0.5;
  CHECK_THROWS(assemble_gle(a.L.matrix, notProj, VectorC::Unit(2, 0), Picture::Observable));
}

TEST_CASE("Dyson identity") {
  const auto su2 = demos::su2_model(1.0);
  const auto so3 = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7);
  CHECK(dyson_check(su2.L.matrix, su2.P.matrix, 1.0, 200) <= 1e-8);
  CHECK(dyson_check(so3.L.matrix, so3.P.matrix, 1.0, 200) <= 1e-8);
  CHECK(dyson_check(so3.Lstar.matrix, so3.Pstar.matrix, 1.0, 200) <= 1e-8);
  CHECK(dyson_check(su2.L.matrix, su2.P.matrix, 0.0, 200) == 0.0);
  CHECK(dyson_check(so3.L.matrix, MatrixC::Zero(3, 3), 1.0, 200) <= 1e-12);
}

TEST_CASE("Heisenberg and Schroedinger pairings agree") {
  std::vector<double> times;
  for (int k = 0; k <= 50; ++k) times.push_back(0.2 * k);
  const auto su2 = demos::su2_model(1.0);
  const MatrixC G = pairing_gram(*su2.state_basis, *su2.state_basis);
  const auto rep = duality_check(-su2.Lstar.matrix, G, VectorC::Unit(4, 1), VectorC::Unit(4, 3), times, std::nullopt,
                                 VectorC::Unit(4, 0));
  CHECK(rep.max_discrepancy <= 1e-8);
  CHECK(rep.max_normalization_drift <= 1e-10);
  CHECK(max_abs(rep.Lstar - su2.Lstar.matrix) < 1e-10);

  // rho0 = Tr(U)^2 paired with g over the observable basis.
  const MatrixC Gso = pairing_gram(*su2.state_basis, *su2.obs_basis);
  const auto rep2 = duality_check(su2.L.matrix, Gso, VectorC::Unit(4, 1), VectorC::Unit(2, 0), times, su2.Lstar.matrix);
  CHECK(rep2.max_discrepancy <= 1e-8);

  const auto so3 = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7);
  const auto so3Adj = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7, true);
  const MatrixC G3 = pairing_gram(*so3Adj.state_basis, *so3.obs_basis);
  CHECK(max_abs(G3) > 0.1);
  const auto rep3 = duality_check(so3.L.matrix, G3, 9.0 * VectorC::Unit(10, 2), VectorC::Unit(3, 0), times, so3Adj.Lstar.matrix);
  CHECK(rep3.max_discrepancy <= 1e-8);
  const auto rep0 = duality_check(so3.L.matrix, G3, 9.0 * VectorC::Unit(10, 2), VectorC::Unit(3, 0), {0.0}, so3.Lstar.matrix);
  CHECK(rep0.max_discrepancy == 0.0);
}

TEST_CASE("singular pairings are rejected") {
  const auto su2 = demos::su2_model(1.0);
  CHECK_THROWS_AS(pairing_adjoint(su2.L.matrix, MatrixC::Zero(2, 2)), PairingSingular);
  CHECK_THROWS_AS(pairing_adjoint(su2.L.matrix, MatrixC::Zero(4, 2)), PairingSingular);
}

TEST_CASE("spectrum of the orthogonal dynamics") {
  const auto su2 = demos::su2_model(1.0);
  for (cplx e : spectrum_report(su2.L.matrix, su2.P.matrix)) CHECK(std::abs(e) < 1e-7);
  for (cplx e : spectrum_report(su2.L.matrix, MatrixC::Identity(2, 2))) CHECK(std::abs(e) == 0.0);
  const auto so3 = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7);
  const auto ev = spectrum_report(so3.Lstar.matrix, so3.Pstar.matrix);
  CHECK(ev.size() == 10);
  CHECK(contains(ev, cplx(0, 1.0 / std::sqrt(3.0)), 1e-9));
  CHECK(contains(ev, cplx(0, -1.0 / std::sqrt(3.0)), 1e-9));
  for (std::size_t k = 1; k < ev.size(); ++k)
    CHECK((ev[k - 1].real() < ev[k].real() + 1e-9));
}
