// Generalized Langevin equations from a Liouvillian and a projection in
// matrix form: assembly, Volterra solvers, and consistency checks.
#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nmzkit/algebra.hpp"
#include "nmzkit/linalg.hpp"

namespace nmzkit::nmz {

struct TimeGrid {
  double t0 = 0.0;
  double dt = 1e-3;
  std::size_t nSteps = 1;

  static TimeGrid span(double tMax, double dt);  // [0, tMax], nSteps = round(tMax / dt)
  std::size_t size() const { return nSteps + 1; }
  double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
  void validate() const;
};

// Observable: x holds coefficients of an observable, dynamics x' = L x.
// State: x holds coefficients of a state, L and P are the predual matrices.
enum class Picture { Observable, State };

struct GLEProblem {
  MatrixC L, P;
  VectorC x0;
  TimeGrid grid;
  Picture picture = Picture::Observable;
  std::vector<std::string> labels;

  static GLEProblem make(const algebra::OperatorRep& L, const algebra::OperatorRep& P, VectorC x0, TimeGrid grid,
                         Picture picture);
  void validate() const;
};

// Reduced left-acting Volterra data on the image of P (orthonormal columns V):
//   z' = omega z + R(t) + int_0^t K(t - s) z(s) ds,
//   K(tau) = kernel_left e^{tau M} kernel_right,  R(t) = noise_left e^{t M} noise_right.
// Observable picture: z = (e^{tL} V)^T, M = (QL)^T, x(t) = z(t)^T V^H x0.
// State picture: z = V^H sigma, M = QL, x(t) = V z(t).
struct KernelTable {
  Picture picture = Picture::Observable;
  MatrixC L, P, Q;
  VectorC x0;
  MatrixC image;  // V
  MatrixC omega;
  MatrixC generator;  // M
  MatrixC kernel_left, kernel_right;
  MatrixC noise_left, noise_right;
  MatrixC initial;  // z(0)

  std::size_t rank() const { return static_cast<std::size_t>(image.cols()); }
  MatrixC kernel(double tau) const;
  MatrixC noise(double t) const;
  // Unreduced views: P L e^{tau QL} Q L P, and e^{tQL} Q L x0 (observables)
  // or P L e^{tQL} Q x0 (states).
  MatrixC full_kernel(double tau) const;
  VectorC full_noise(double t) const;
  MatrixC full_omega() const { return P * L * P; }
  // Maps reduced z to full coordinates.
  VectorC lift(const MatrixC& z) const;
};

KernelTable assemble_gle(const MatrixC& L, const MatrixC& P, const VectorC& x0, Picture picture);
KernelTable assemble_gle(const algebra::OperatorRep& L, const algebra::OperatorRep& P, const VectorC& x0,
                         Picture picture);
KernelTable assemble_gle(const GLEProblem& problem);

enum class HistoryMethod {
  Recursive,    // O(N) update exploiting K(tau) = C e^{tau M} B
  Convolution,  // O(N^2) lag table with compensated sums
};

struct GLESolution {
  Picture picture = Picture::Observable;
  std::vector<std::string> labels;
  std::vector<double> times;
  std::vector<VectorC> trajectory;
  std::vector<double> residual;    // |central difference - right-hand side| per step
  std::vector<double> noise_norm;  // max-norm of the noise term per step
  bool real_valued = true;

  std::vector<std::string> reference_labels;
  std::vector<VectorC> reference;
  double max_reference_error = std::numeric_limits<double>::quiet_NaN();

  void attach_reference(std::vector<VectorC> ref, std::vector<std::string> refLabels = {});
  double max_imaginary() const;
};

// Generic homogeneous-kernel Volterra system for the convolution solver.
struct VolterraSystem {
  MatrixC omega;
  std::function<MatrixC(double)> noise;
  std::function<MatrixC(double)> kernel;
  MatrixC z0;
};

struct VolterraTrajectory {
  std::vector<MatrixC> z;
  std::vector<double> residual;
};

VolterraTrajectory solve_volterra_convolution(const VolterraSystem& sys, const TimeGrid& grid);

GLESolution solve_volterra(const KernelTable& kt, const TimeGrid& grid, HistoryMethod method = HistoryMethod::Recursive);

GLESolution solve_observable_nmz(const algebra::OperatorRep& L, const algebra::OperatorRep& P, const VectorC& f0,
                                 const TimeGrid& grid, HistoryMethod method = HistoryMethod::Recursive);
GLESolution solve_state_nmz(const algebra::OperatorRep& Lstar, const algebra::OperatorRep& Pstar,
                            const VectorC& rho0, const TimeGrid& grid, HistoryMethod method = HistoryMethod::Recursive);
GLESolution solve_state_nmz(const MatrixC& Lstar, const MatrixC& Pstar, const VectorC& rho0, const TimeGrid& grid,
                            HistoryMethod method = HistoryMethod::Recursive);

// P e^{tL} x0 on the grid by repeated multiplication with e^{dt L}.
std::vector<VectorC> projected_propagation(const MatrixC& L, const MatrixC& P, const VectorC& x0, const TimeGrid& grid);

// Frobenius norm of e^{tL} - e^{tQL} - int_0^t e^{sL} PL e^{(t-s)QL} ds, composite
// Simpson with nQuad subintervals (rounded up to even).
double dyson_check(const MatrixC& L, const MatrixC& P, double t, int nQuad);

// G_ij = int s_i o_j dmu over the group, exact.
MatrixC pairing_gram(const algebra::BasisRep& states, const algebra::BasisRep& observables);
// L* with <L* rho, f> = <rho, L f> for the bilinear pairing rho^T G f.
MatrixC pairing_adjoint(const MatrixC& L, const MatrixC& gram);

struct DualityReport {
  double max_discrepancy = 0.0;
  double max_normalization_drift = 0.0;  // only when unitCoords is given
  MatrixC Lstar;
};

DualityReport duality_check(const MatrixC& L, const MatrixC& gram, const VectorC& rho0, const VectorC& f0,
                            const std::vector<double>& times, const std::optional<MatrixC>& Lstar = std::nullopt,
                            const std::optional<VectorC>& unitCoords = std::nullopt);

// Eigenvalues of (1 - P) L sorted by real part, then imaginary part
// (values within 1e-9 treated as equal).
std::vector<cplx> spectrum_report(const MatrixC& L, const MatrixC& P);

}  // namespace nmzkit::nmz
