// Dense complex linear algebra helpers on top of Eigen.
#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace nmzkit {

using cplx = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;
using MatrixR = Eigen::MatrixXd;
using VectorR = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

MatrixC expm(const MatrixC& a);
MatrixC kron(const MatrixC& a, const MatrixC& b);

// Column-stacking vectorization: vec(X)[i + rows*j] = X(i, j).
VectorC vec(const MatrixC& x);
MatrixC unvec(const VectorC& v, Eigen::Index rows);

// Bipartite operators act on C^dA (x) C^dB with the A index running slowest.
MatrixC partial_trace_b(const MatrixC& x, int dA, int dB);
MatrixC partial_trace_a(const MatrixC& x, int dA, int dB);

bool all_finite(const MatrixC& m);
bool is_hermitian(const MatrixC& m, double tol);
double hermitian_min_eigenvalue(const MatrixC& m);
double operator_norm(const MatrixC& m);
double max_abs(const MatrixC& m);

// Orthonormal basis of the column space, rank decided relative to the largest singular value.
MatrixC column_space(const MatrixC& m, double relTol = 1e-10);

}  // namespace nmzkit
