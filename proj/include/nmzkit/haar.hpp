// Haar moments on SU(2) and SO(3): order-2 Weingarten tables, the class-function
// projection, a Monte-Carlo counterpart, and an exact polynomial cubature.
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nmzkit/algebra.hpp"
#include "nmzkit/sampling.hpp"

namespace nmzkit::haar {

// Second-moment table: E[(W (x) W) T (W (x) W)^dagger] = sum_ab weights(a,b) Tr(B_a T) B_b,
// with B the commutant basis {1, swap} (SU2) or {1, swap, contraction} (SO3)
// and weights the inverse of the Gram matrix Tr(B_a B_b).
class MomentTable {
 public:
  static const MomentTable& get(Group g);

  Group group() const { return group_; }
  int order() const { return 2; }
  const std::vector<MatrixC>& pairings() const { return pairings_; }
  const std::vector<std::string>& pairing_names() const { return names_; }
  const MatrixR& gram() const { return gram_; }
  const MatrixR& weights() const { return weights_; }

  MatrixC twirl(const MatrixC& t) const;

 private:
  explicit MomentTable(Group g);
  Group group_;
  std::vector<MatrixC> pairings_;
  std::vector<std::string> names_;
  MatrixR gram_;
  MatrixR weights_;
};

MatrixC swap_operator(int d);
MatrixC contraction_operator(int d);

// int W^dagger M W dmu(W)
MatrixC conj_moment1(const MatrixC& m, Group g);
// int Tr(A W M W^-1) Tr(B W N W^-1) dmu(W)
cplx conj_moment2(const MatrixC& a, const MatrixC& m, const MatrixC& b, const MatrixC& n, Group g);

// (P f)(U) = int f(W U W^-1) dmu(W), exact for monomials of degree <= 2.
// The result is written in powers of Tr(U).
algebra::TracePolynomial class_project(const algebra::TracePolynomial& p, Group g);

struct McClassProjection {
  algebra::TracePolynomial projected;
  VectorC coefficients;  // over the target basis
  VectorR std_error;     // per coefficient
  double max_residual_sigma = 0.0;
  std::size_t samples = 0;
};

// Sample average over conjugators, refitted per conjugator onto the target
// basis so every coefficient carries a standard error. Throws BasisNotClosed
// when the averaged function leaves the span of the target by more than
// residualSigmas standard errors.
McClassProjection mc_class_project(const algebra::TracePolynomial& p, Group g, std::size_t nSamples,
                                   const GroupSampler& sampler, const algebra::BasisRep& target,
                                   double residualSigmas = 5.0);

struct McEstimate {
  cplx mean;
  double std_error = 0.0;
};

McEstimate mc_mean(const std::function<cplx(const MatrixC&)>& f, const GroupSampler& sampler, std::size_t n,
                   std::uint64_t offset = 0);

// Positive-weight rule exact for every polynomial of degree <= polyDegree in
// the entries of U (and their conjugates).
struct Cubature {
  std::vector<MatrixC> points;
  std::vector<double> weights;
};

Cubature exact_cubature(Group g, int polyDegree);
cplx integrate_exact(const std::function<cplx(const MatrixC&)>& f, Group g, int polyDegree);
cplx haar_integral(const algebra::TracePolynomial& p, Group g);

// Nodes and weights on [0, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre01(int n);

}  // namespace nmzkit::haar
