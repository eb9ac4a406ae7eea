#include <doctest.h>

#include <random>

#include "nmzkit/algebra.hpp"
#include "nmzkit/demos.hpp"
#include "nmzkit/errors.hpp"

using namespace nmzkit;
using algebra::TracePolynomial;

namespace {

MatrixC random_matrix(std::mt19937_64& eng, int d) {
  std::normal_distribution<double> nd;
  MatrixC m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cplx(nd(eng), nd(eng));
  return m;
}

TracePolynomial random_poly(std::mt19937_64& eng, int d, int degree) {
  TracePolynomial p(d);
  std::normal_distribution<double> nd;
  for (int k = 0; k <= degree; ++k) {
    std::vector<MatrixC> f;
    for (int j = 0; j < k; ++j) f.push_back(random_matrix(eng, d));
    p += TracePolynomial::monomial(d, cplx(nd(eng), nd(eng)), f);
  }
  return p;
}

const MatrixC kH = demos::su2_hamiltonian(1.0);

}  // namespace

TEST_CASE("eval of basic trace polynomials") {
  const MatrixC id = MatrixC::Identity(2, 2);
  const auto g = TracePolynomial::trace(id, 0.5);
  CHECK(std::abs(g.eval(id) - cplx(1.0)) < 1e-15);
  std::mt19937_64 eng(1);
  CHECK(std::abs(TracePolynomial::constant(2, 1.0).eval(random_matrix(eng, 2)) - cplx(1.0)) == 0.0);
  const auto rho0 = TracePolynomial::monomial(2, 1.0, {id, id});
  for (double th : {0.0, 0.3, 1.1, 2.5}) {
    MatrixC u = MatrixC::Zero(2, 2);
    u(0, 0) = std::exp(I_unit * th);
    u(1, 1) = std::exp(-I_unit * th);
    CHECK(std::abs(rho0.eval(u) - 4.0 * std::cos(th) * std::cos(th)) < 1e-14);
  }
  CHECK_THROWS_AS(g.eval(MatrixC::Identity(3, 3)), DimMismatch);
}

TEST_CASE("Liouvillian of g under -iH") {
  const auto gen = algebra::su2_generator(kH);
  CHECK(gen.rate == doctest::Approx(1.0).epsilon(1e-14));
  const auto g = TracePolynomial::trace(MatrixC::Identity(2, 2), 0.5);
  const auto lg = algebra::liouvillian_apply(g, gen.matrix);
  CHECK(algebra::structurally_equal(lg, TracePolynomial::trace(kH, -0.5 * I_unit)));
  const auto l2g = algebra::liouvillian_power(g, gen.matrix, 2);
  CHECK(algebra::structurally_equal(l2g, kH.determinant() * g));
}

TEST_CASE("third power of the SO(3) Liouvillian on g") {
  const auto gen = algebra::so3_generator(2.0 / 7, 3.0 / 7, 6.0 / 7);
  const auto g = TracePolynomial::trace(MatrixC::Identity(3, 3), 1.0 / 3);
  const auto lg = algebra::liouvillian_apply(g, gen.matrix);
  const auto l3g = algebra::liouvillian_power(g, gen.matrix, 3);
  CHECK(algebra::structurally_equal(l3g, -gen.rate * gen.rate * lg));
}

TEST_CASE("Liouvillian is a derivation") {
  std::mt19937_64 eng(11);
  for (int d : {2, 3}) {
    for (int k = 0; k < 10; ++k) {
      const auto p = random_poly(eng, d, 2), q = random_poly(eng, d, 1);
      const MatrixC a = random_matrix(eng, d);
      const auto lhs = algebra::liouvillian_apply(p * q, a);
      const auto rhs = algebra::liouvillian_apply(p, a) * q + p * algebra::liouvillian_apply(q, a);
      CHECK(algebra::structurally_equal(lhs, rhs, 1e-9));
    }
  }
}

TEST_CASE("Liouvillian agrees with the flow derivative") {
  std::mt19937_64 eng(13);
  const haar::GroupSampler s(haar::Group::SU2, 9);
  const auto gen = algebra::su2_generator(kH);
  for (int k = 0; k < 20; ++k) {
    const auto p = random_poly(eng, 2, 3);
    const MatrixC u = s.sample(k);
    const cplx exact = algebra::liouvillian_apply(p, gen.matrix).eval(u);
    const double scale = std::max(1.0, std::abs(exact));
    CHECK(std::abs(algebra::flow_derivative(p, gen.matrix, u, 1e-4, 2) - exact) / scale < 1e-6);
    CHECK(std::abs(algebra::flow_derivative(p, gen.matrix, u, 1e-2, 8) - exact) / scale < 1e-9);
  }
}

TEST_CASE("monomial order and scaling do not affect identity") {
  std::mt19937_64 eng(17);
  const MatrixC a = random_matrix(eng, 3), b = random_matrix(eng, 3), c = random_matrix(eng, 3);
  const auto p1 = TracePolynomial::monomial(3, 2.0, {a, b, c});
  const auto p2 = TracePolynomial::monomial(3, 2.0, {c, a, b});
  const auto p3 = TracePolynomial::monomial(3, 2.0 / (6.0 * I_unit), {b, 2.0 * c, 3.0 * I_unit * a});
  CHECK(algebra::structurally_equal(p1, p2));
  REQUIRE(p1.terms().size() == 1);
  CHECK(p1.terms().front().first == p2.terms().front().first);
  CHECK(algebra::structurally_equal(p1, p3));
  CHECK(algebra::structurally_equal(p1 - p2, TracePolynomial(3)));
  CHECK((p1 - p2).is_zero());
}

TEST_CASE("distinct factors define distinct functions on the group") {
  std::mt19937_64 eng(19);
  for (haar::Group g : {haar::Group::SU2, haar::Group::SO3}) {
    const int d = haar::group_dim(g);
    const haar::GroupSampler s(g, 3);
    const auto f1 = TracePolynomial::trace(random_matrix(eng, d));
    const auto f2 = TracePolynomial::trace(random_matrix(eng, d));
    CHECK_FALSE(algebra::structurally_equal(f1, f2));
    double diff = 0.0;
    for (int i = 0; i < 16; ++i) diff = std::max(diff, std::abs(f1.eval(s.sample(i)) - f2.eval(s.sample(i))));
    CHECK(diff > 1e-3);
  }
}

TEST_CASE("exact matrix representation of L on {g, Lg}") {
  const auto m = demos::su2_model(1.0);
  MatrixC expected = MatrixC::Zero(2, 2);
  expected(0, 1) = kH.determinant();
  expected(1, 0) = 1.0;
  CHECK(max_abs(m.L.matrix - expected) < 1e-14);
  const auto id = algebra::matrix_rep_exact([](const TracePolynomial& p) { return p; }, m.obs_basis);
  CHECK(max_abs(id.matrix - MatrixC::Identity(2, 2)) == 0.0);
}

TEST_CASE("state Liouvillian on the four-element basis matches the published matrix") {
  for (double lambda : {0.5, 1.0, 1.7}) {
    const auto m = demos::su2_model(lambda);
    CHECK(max_abs(m.Lstar.matrix - demos::published_su2_Lstar(lambda)) < 1e-12);
  }
}

TEST_CASE("matrix_rep_exact reports a non-invariant subspace") {
  const auto g = TracePolynomial::trace(MatrixC::Identity(2, 2), 0.5);
  const auto basis = algebra::BasisRep::build({g}, {"g"}, haar::Group::SU2);
  const MatrixC a = algebra::su2_generator(kH).matrix;
  CHECK_THROWS_AS(algebra::matrix_rep_exact([&](const TracePolynomial& p) { return algebra::liouvillian_apply(p, a); }, basis),
                  BasisNotClosed);
}

TEST_CASE("basis construction rejects dependent elements") {
  const auto g = TracePolynomial::trace(MatrixC::Identity(2, 2), 0.5);
  CHECK_THROWS_AS(algebra::BasisRep::build({g, 2.0 * g}, {"g", "2g"}, haar::Group::SU2), LinearlyDependent);
  CHECK_THROWS_AS(algebra::BasisRep::build({g, g}, {"g", "g"}, haar::Group::SU2), LinearlyDependent);
  const auto m = demos::su2_model(1.0);
  CHECK(m.obs_basis->functionally_independent());
  CHECK(m.state_basis->functional_rank() == 4);
}

TEST_CASE("collocation reproduces the exact representation") {
  const auto m = demos::su2_model(1.0);
  const MatrixC a = m.generator.matrix;
  const auto basis = m.obs_basis;
  const haar::GroupSampler s(haar::Group::SU2, 5);
  const auto rep = algebra::matrix_rep_collocation(
      [&](std::size_t i, const MatrixC& u) { return algebra::liouvillian_apply(basis->element(i), a).eval(u); }, basis, s,
      32, 1e-10);
  CHECK(max_abs(rep.rep.matrix - m.L.matrix) < 1e-10);
  const auto zero = algebra::matrix_rep_collocation([](std::size_t, const MatrixC&) { return cplx(0.0); }, basis, s, 32,
                                                    1e-10);
  CHECK(max_abs(zero.rep.matrix) == 0.0);
  CHECK_THROWS(algebra::matrix_rep_collocation([](std::size_t, const MatrixC&) { return cplx(0.0); }, basis, s, 4, 1e-10));
}

TEST_CASE("collocation detects a function outside the span") {
  const auto m = demos::su2_model(1.0);
  const haar::GroupSampler s(haar::Group::SU2, 5);
  CHECK_THROWS_AS(algebra::matrix_rep_collocation(
                      [](std::size_t, const MatrixC& u) { return cplx(u.trace() * u.trace()); }, m.obs_basis, s, 32, 1e-8),
                  BasisNotClosed);
}

TEST_CASE("operator products require a shared basis") {
  const auto a = demos::su2_model(1.0), b = demos::su2_model(1.0);
  CHECK_THROWS_AS(a.L * b.L, BasisMismatch);
  CHECK(max_abs((a.L * a.P).matrix - a.L.matrix * a.P.matrix) == 0.0);
  const auto rowRep = algebra::OperatorRep::from_row_convention(a.obs_basis, a.L.row_convention());
  CHECK(max_abs(rowRep.matrix - a.L.matrix) == 0.0);
}
