// Bipartite quantum systems: Liouvillian superoperators and the partial-trace
// NMZ reduction, with an exact propagation oracle.
#pragma once

#include <vector>

#include "nmzkit/linalg.hpp"
#include "nmzkit/nmz.hpp"

namespace nmzkit::quantum {

inline constexpr int kDefaultMaxDimension = 16;

struct BipartiteSystem {
  int dA = 2, dB = 2;
  MatrixC H;     // on C^dA (x) C^dB
  MatrixC rhoB;  // reference state of B used by the projection
  MatrixC rho0;  // initial joint state

  // Product initial state sigma0 (x) rhoB.
  static BipartiteSystem product(int dA, int dB, MatrixC H, const MatrixC& sigma0, MatrixC rhoB);
  void validate(int maxDimension = kDefaultMaxDimension) const;
};

void require_density_matrix(const MatrixC& rho, Eigen::Index dim, const char* what);

// rho -> -i (H rho - rho H) under column stacking: -i (1 (x) H - H^T (x) 1).
MatrixC build_liouvillian_superop(const MatrixC& H);

MatrixC two_qubit_hamiltonian(double omega, double gamma);

struct ReducedTrajectory {
  nmz::GLESolution solution;   // coordinates: vec(sigma(t)), column stacked
  std::vector<MatrixC> sigma;  // dA x dA
  double max_noise_norm = 0.0;
};

ReducedTrajectory nmz_reduce_bipartite(const BipartiteSystem& sys, const nmz::TimeGrid& grid,
                                       nmz::HistoryMethod method = nmz::HistoryMethod::Recursive);
std::vector<MatrixC> exact_reduce(const BipartiteSystem& sys, const nmz::TimeGrid& grid);

}  // namespace nmzkit::quantum
