// Conditional expectations on finite measure spaces and on bipartite matrix
// algebras, with executable checks of the conditional-expectation axioms.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nmzkit/linalg.hpp"

namespace nmzkit::projections {

struct FiniteMeasureSpace {
  std::vector<std::string> points;  // may be empty (unlabelled)
  VectorR weights;
  bool probability = true;

  // Validates nonnegativity (and unit mass when probability is set).
  static FiniteMeasureSpace make(VectorR weights, bool probability = true, std::vector<std::string> labels = {});
  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
};

using FiniteObservable = VectorC;

enum class AlgebraKind { Functions, Matrices };

// A linear projection on functions (value vectors) or on D x D matrices
// (column-stacked vectors of length D^2). The predual acts on states: weight
// vectors <rho, f> = sum rho_i f_i, or density matrices <rho, X> = Tr(rho X).
struct ProjectionOp {
  AlgebraKind kind = AlgebraKind::Functions;
  std::size_t length = 0;      // vector length of an element
  int matrix_dim = 0;          // D for the matrix kind
  std::function<VectorC(const VectorC&)> apply;
  std::function<VectorC(const VectorC&)> predual;
  std::string image;           // human-readable image descriptor
  // Faithful state used for the tracial-compatibility axiom (weights for
  // functions, density matrix for matrices).
  std::optional<VectorC> tau;
  // Elements known to lie in the image; the module and tracial axioms draw
  // from P(random) when empty.
  std::function<VectorC(std::uint64_t)> image_sampler;

  VectorC operator()(const VectorC& x) const { return apply(x); }
  MatrixC dense() const;
  MatrixC dense_predual() const;
};

// ---- constructors ----

struct LevelSetProjection {
  ProjectionOp op;
  std::vector<int> bin;  // bin index per point
  int bins = 0;
};

// binTol < 0 selects the default 1e-9 * (range of h).
LevelSetProjection condexp_level_sets(const FiniteMeasureSpace& space, const FiniteObservable& h,
                                      double binTol = -1.0);

// Product space N x R flattened with the R index running fastest.
struct TensorReduction {
  std::size_t nN = 0, nR = 0;
  std::function<VectorC(const VectorC&)> pi;       // A -> B
  std::function<VectorC(const VectorC&)> embed;    // K: B -> A, g -> g (x) 1
  std::function<VectorC(const VectorC&)> pi_star;  // psi -> psi (x) p
  std::function<VectorC(const VectorC&)> embed_star;  // phi -> sum_y phi(., y)
  ProjectionOp P;
};

TensorReduction condexp_tensor(const FiniteMeasureSpace& spaceN, const FiniteMeasureSpace& spaceR,
                               const VectorR& p);

// Superoperators in column-stacking vectorization of operators on C^dA (x) C^dB.
struct PartialTraceReduction {
  int dA = 0, dB = 0;
  MatrixC rhoB;
  MatrixC pi;        // dA^2 x D^2 : X -> Tr_B(X (1 (x) rhoB))
  MatrixC embed;     // D^2 x dA^2 : Y -> Y (x) 1
  MatrixC P;         // embed * pi
  MatrixC pi_star;   // D^2 x dA^2 : sigma -> sigma (x) rhoB
  MatrixC embed_star;  // dA^2 x D^2 : A -> Tr_B(A)
  MatrixC P_star;    // pi_star * embed_star
  ProjectionOp op;
};

PartialTraceReduction condexp_partial_trace(int dA, int dB, const MatrixC& rhoB);

// Builds a superoperator matrix from its action on D x D matrices.
MatrixC superoperator(const std::function<MatrixC(const MatrixC&)>& f, Eigen::Index inDim);

// ---- verification ----

struct AxiomResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;  // largest violation observed
  bool applicable = true;
};

struct AxiomReport {
  std::vector<AxiomResult> axioms;
  bool all_passed() const;
  const AxiomResult& find(const std::string& name) const;
};

inline constexpr double kAxiomTol = 1e-10;

AxiomReport verify_condexp_axioms(const ProjectionOp& P, int trials, std::uint64_t seed, double tol = kAxiomTol);

struct StatePreservation {
  bool passed = true;
  double worst_negativity = 0.0;
  double worst_norm_error = 0.0;
};

StatePreservation check_state_preservation(const ProjectionOp& P, int trials, std::uint64_t seed,
                                           double tol = kAxiomTol);
bool verify_state_preservation(const ProjectionOp& P, int trials, std::uint64_t seed);

// Largest |rho(P f) - (P* rho)(f)| over sampled f and states.
double predual_consistency(const ProjectionOp& P, int trials, std::uint64_t seed);

// ---- counterexamples ----

// f -> <w, f> e with <w, e> = 1: idempotent but not positive when e takes negative values.
ProjectionOp rank_one_projection(const FiniteMeasureSpace& space, const VectorC& e);
// f -> <w', f> 1 with sum w' = 1: unital and idempotent; its predual rho -> rho(1) w'
// leaves the state space when w' has negative entries.
ProjectionOp signed_average_projection(const VectorR& wPrime);

// ---- torus ----

struct TorusDemo {
  double q_norm = 0.0;    // sup-norm of (1 - P) f_n on the grid
  double v_n = 0.0;       // grid average of f_n over the second circle
  double reference_q_norm = 0.0;
  double reference_v_n = 0.0;
};

// f_n(s1, s2) = -1 + 2 exp(-n^2 (s2 - 1/2)^2 / 2), P averages over s2.
TorusDemo torus_demo(int n, int gridSize, int retainedPoints = 8);
double torus_q_norm_demo(int n, int gridSize);

}  // namespace nmzkit::projections
