#include "nmzkit/quantum.hpp"

#include <cmath>
#include <string>

#include "nmzkit/errors.hpp"
#include "nmzkit/projections.hpp"

namespace nmzkit::quantum {

void require_density_matrix(const MatrixC& rho, Eigen::Index dim, const char* what) {
  if (rho.rows() != dim || rho.cols() != dim) throw InvalidDensityMatrix(std::string(what) + ": wrong shape");
  if (!all_finite(rho) || !is_hermitian(rho, 1e-12)) throw InvalidDensityMatrix(std::string(what) + ": not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0)) > 1e-12) throw InvalidDensityMatrix(std::string(what) + ": trace is not 1");
  if (hermitian_min_eigenvalue(rho) < -1e-12) throw InvalidDensityMatrix(std::string(what) + ": not positive");
}

BipartiteSystem BipartiteSystem::product(int dA, int dB, MatrixC H, const MatrixC& sigma0, MatrixC rhoB) {
  require_density_matrix(sigma0, dA, "sigma0");
  BipartiteSystem s{dA, dB, std::move(H), std::move(rhoB), MatrixC()};
  s.rho0 = kron(sigma0, s.rhoB);
  return s;
}

void BipartiteSystem::validate(int maxDimension) const {
  if (dA < 1 || dB < 1) throw DimMismatch("BipartiteSystem: dimensions must be positive");
  if (dA * dB > maxDimension)
    throw DimMismatch("BipartiteSystem: dA*dB = " + std::to_string(dA * dB) + " exceeds the cap " +
                      std::to_string(maxDimension));
  const int D = dA * dB;
  if (H.rows() != D || H.cols() != D) throw DimMismatch("BipartiteSystem: H has wrong shape");
  if (!all_finite(H) || !is_hermitian(H, 1e-12)) throw NotHermitian("BipartiteSystem: H is not Hermitian");
  require_density_matrix(rhoB, dB, "rhoB");
  require_density_matrix(rho0, D, "rho0");
}

MatrixC build_liouvillian_superop(const MatrixC& H) {
  if (H.rows() != H.cols()) throw DimMismatch("build_liouvillian_superop: H not square");
  if (!all_finite(H) || !is_hermitian(H, 1e-12)) throw NotHermitian("build_liouvillian_superop: H is not Hermitian");
  const MatrixC id = MatrixC::Identity(H.rows(), H.cols());
  return -I_unit * (kron(id, H) - kron(H.transpose(), id));
}

MatrixC two_qubit_hamiltonian(double omega, double gamma) {
  MatrixC sx(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  const MatrixC id = MatrixC::Identity(2, 2);
  return 0.5 * omega * (kron(sz, id) + kron(id, sz)) + gamma * kron(sx, sx);
}

ReducedTrajectory nmz_reduce_bipartite(const BipartiteSystem& sys, const nmz::TimeGrid& grid, nmz::HistoryMethod method) {
  sys.validate();
  const projections::PartialTraceReduction red = projections::condexp_partial_trace(sys.dA, sys.dB, sys.rhoB);
  const MatrixC Lstar = build_liouvillian_superop(sys.H);
  const nmz::GLESolution full = nmz::solve_state_nmz(Lstar, red.P_star, vec(sys.rho0), grid, method);

  ReducedTrajectory out;
  out.solution.picture = nmz::Picture::State;
  out.solution.real_valued = false;
  for (int j = 0; j < sys.dA; ++j)
    for (int i = 0; i < sys.dA; ++i) out.solution.labels.push_back("sigma_" + std::to_string(i) + std::to_string(j));
  out.solution.times = full.times;
  out.solution.residual = full.residual;
  out.solution.noise_norm = full.noise_norm;
  for (const auto& x : full.trajectory) {
    const VectorC s = red.embed_star * x;
    out.solution.trajectory.push_back(s);
    out.sigma.push_back(unvec(s, sys.dA));
  }
  for (double v : full.noise_norm) out.max_noise_norm = std::max(out.max_noise_norm, v);
  return out;
}

std::vector<MatrixC> exact_reduce(const BipartiteSystem& sys, const nmz::TimeGrid& grid) {
  sys.validate();
  grid.validate();
  Eigen::SelfAdjointEigenSolver<MatrixC> es(0.5 * (sys.H + sys.H.adjoint()));
  const MatrixC& v = es.eigenvectors();
  const VectorR& e = es.eigenvalues();
  const MatrixC rhoEig = v.adjoint() * sys.rho0 * v;
  std::vector<MatrixC> out;
  out.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    MatrixC r = rhoEig;
    for (Eigen::Index i = 0; i < r.rows(); ++i)
      for (Eigen::Index j = 0; j < r.cols(); ++j) r(i, j) *= std::exp(-I_unit * (e(i) - e(j)) * t);
    out.push_back(partial_trace_b(v * r * v.adjoint(), sys.dA, sys.dB));
  }
  return out;
}

}  // namespace nmzkit::quantum
