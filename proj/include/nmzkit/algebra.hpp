// Trace polynomials on a matrix group, the Liouvillian derivation, and
// coordinate representations of linear maps over finite bases.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nmzkit/linalg.hpp"
#include "nmzkit/sampling.hpp"

namespace nmzkit::algebra {

inline constexpr double kPruneEps = 1e-12;

// Generator of the linear flow U' = A U together with its rate
// (lambda = sqrt(-det H) for A = -iH on SU(2), r = |(x, y, z)| on SO(3)).
struct Generator {
  MatrixC matrix;
  double rate = 0.0;
};

Generator su2_generator(const MatrixC& hamiltonian);
Generator so3_generator(double x, double y, double z);
MatrixC so3_skew(double x, double y, double z);

// ---- trace monomials ----

// Product of factors Tr(F U). Factors are normalized (unit Frobenius norm,
// first significant entry real positive) and sorted, so two monomials are
// structurally equal iff they define the same function on SU(2) or SO(3).
class TraceMonomial {
 public:
  explicit TraceMonomial(int dim = 1) : dim_(dim) {}

  // Normalizes the factors; the returned scalar carries the stripped scale
  // (zero if any factor vanishes).
  static std::pair<TraceMonomial, cplx> make(int dim, std::vector<MatrixC> factors);

  int dim() const { return dim_; }
  std::size_t degree() const { return factors_.size(); }
  const std::vector<MatrixC>& factors() const { return factors_; }

  cplx eval(const MatrixC& u) const;
  TraceMonomial times(const TraceMonomial& other) const;
  std::string describe() const;

 private:
  int dim_;
  std::vector<MatrixC> factors_;
};

int compare_factor(const MatrixC& a, const MatrixC& b);
int compare(const TraceMonomial& a, const TraceMonomial& b);
inline bool operator==(const TraceMonomial& a, const TraceMonomial& b) { return compare(a, b) == 0; }
inline bool operator<(const TraceMonomial& a, const TraceMonomial& b) { return compare(a, b) < 0; }

// ---- trace polynomials ----

class TracePolynomial {
 public:
  using Term = std::pair<TraceMonomial, cplx>;

  explicit TracePolynomial(int dim = 1) : dim_(dim) {}

  static TracePolynomial constant(int dim, cplx c);
  // c * Tr(F U)
  static TracePolynomial trace(const MatrixC& f, cplx c = 1.0);
  // c * prod_k Tr(F_k U)
  static TracePolynomial monomial(int dim, cplx c, std::vector<MatrixC> factors);

  int dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t max_degree() const;

  void add_term(const TraceMonomial& m, cplx c);
  cplx eval(const MatrixC& u) const;
  // Coefficient of a monomial (zero when absent).
  cplx coefficient(const TraceMonomial& m) const;

  TracePolynomial& operator+=(const TracePolynomial& o);
  TracePolynomial& operator-=(const TracePolynomial& o);
  TracePolynomial& operator*=(cplx s);
  friend TracePolynomial operator+(TracePolynomial a, const TracePolynomial& b) { return a += b; }
  friend TracePolynomial operator-(TracePolynomial a, const TracePolynomial& b) { return a -= b; }
  friend TracePolynomial operator*(TracePolynomial a, cplx s) { return a *= s; }
  friend TracePolynomial operator*(cplx s, TracePolynomial a) { return a *= s; }
  friend TracePolynomial operator*(const TracePolynomial& a, const TracePolynomial& b);

  std::string describe() const;

 private:
  void require_dim(int d, const char* what) const;
  int dim_;
  std::vector<Term> terms_;  // sorted by monomial, no near-zero coefficients
};

bool structurally_equal(const TracePolynomial& a, const TracePolynomial& b, double tol = 1e-10);

cplx eval(const TracePolynomial& p, const MatrixC& u);
TracePolynomial liouvillian_apply(const TracePolynomial& p, const MatrixC& a);
// L^k p
TracePolynomial liouvillian_power(const TracePolynomial& p, const MatrixC& a, int k);

// d/dt p(e^{tA} U) at t = 0 by central differences of the given even order
// (2, 4, 6 or 8).
cplx flow_derivative(const TracePolynomial& p, const MatrixC& a, const MatrixC& u, double h, int order = 8);

// ---- bases ----

class BasisRep {
 public:
  // Throws LinearlyDependent when the elements are formally dependent or
  // pairwise equal. Functional rank on the group is recorded from samples.
  static std::shared_ptr<const BasisRep> build(std::vector<TracePolynomial> elements,
                                               std::vector<std::string> labels, haar::Group group,
                                               std::uint64_t seed = 7, std::size_t nSamples = 0);

  std::size_t size() const { return elements_.size(); }
  int dim() const { return elements_.front().dim(); }
  haar::Group group() const { return group_; }
  const TracePolynomial& element(std::size_t i) const { return elements_.at(i); }
  const std::vector<TracePolynomial>& elements() const { return elements_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Distinct monomials across all elements, and the coefficient matrix
  // (rows = monomials, columns = elements).
  const std::vector<TraceMonomial>& monomials() const { return monomials_; }
  const MatrixC& coefficient_matrix() const { return coeffs_; }

  const std::vector<MatrixC>& sample_points() const { return points_; }
  const MatrixC& sample_matrix() const { return samples_; }
  double condition_estimate() const { return condition_; }
  std::size_t functional_rank() const { return functionalRank_; }
  bool functionally_independent() const { return functionalRank_ == size(); }

  // Coordinates of p by exact monomial matching; throws BasisNotClosed with
  // the given element index for reporting.
  VectorC coordinates(const TracePolynomial& p, std::size_t elementForError = 0) const;
  TracePolynomial combine(const VectorC& coords) const;
  VectorC evaluate(const MatrixC& u) const;

 private:
  BasisRep() = default;
  std::vector<TracePolynomial> elements_;
  std::vector<std::string> labels_;
  haar::Group group_ = haar::Group::SU2;
  std::vector<TraceMonomial> monomials_;
  MatrixC coeffs_;
  Eigen::FullPivHouseholderQR<MatrixC> qr_;
  std::vector<MatrixC> points_;
  MatrixC samples_;
  double condition_ = 0.0;
  std::size_t functionalRank_ = 0;
};

using BasisPtr = std::shared_ptr<const BasisRep>;

// Action-on-coefficients convention: column j holds the coordinates of the
// image of basis element j.
struct OperatorRep {
  BasisPtr basis;
  MatrixC matrix;

  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
  static OperatorRep identity(BasisPtr b);
  static OperatorRep zero(BasisPtr b);
  // Wraps a matrix written in the row convention (row j = image of element j).
  static OperatorRep from_row_convention(BasisPtr b, const MatrixC& rowMatrix);
  MatrixC row_convention() const { return matrix.transpose(); }
};

OperatorRep operator*(const OperatorRep& a, const OperatorRep& b);

using PolyMap = std::function<TracePolynomial(const TracePolynomial&)>;
// Evaluates (Op f_element)(U).
using PointEvaluator = std::function<cplx(std::size_t element, const MatrixC& u)>;

OperatorRep matrix_rep_exact(const PolyMap& op, BasisPtr basis);

struct CollocationReport {
  OperatorRep rep;
  double max_residual = 0.0;
};

// Least-squares fit of Op f_i sampled at group points. When codomain is
// given, images are fitted onto that subset of basis elements (which must be
// functionally independent) and the remaining rows are zero.
CollocationReport matrix_rep_collocation(const PointEvaluator& op, BasisPtr basis,
                                         const haar::GroupSampler& sampler, std::size_t nSamples,
                                         double tol, const std::vector<std::size_t>& codomain = {});

}  // namespace nmzkit::algebra
