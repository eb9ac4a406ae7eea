#include "nmzkit/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "nmzkit/errors.hpp"

namespace nmzkit {

MatrixC expm(const MatrixC& a) {
  if (a.rows() != a.cols()) throw DimMismatch("expm: matrix not square");
  if (a.size() == 0) return a;
  return a.exp();
}

MatrixC kron(const MatrixC& a, const MatrixC& b) { return Eigen::kroneckerProduct(a, b).eval(); }

VectorC vec(const MatrixC& x) { return Eigen::Map<const VectorC>(x.data(), x.size()); }

MatrixC unvec(const VectorC& v, Eigen::Index rows) {
  if (rows <= 0 || v.size() % rows != 0) throw DimMismatch("unvec: length not divisible by rows");
  return Eigen::Map<const MatrixC>(v.data(), rows, v.size() / rows);
}

MatrixC partial_trace_b(const MatrixC& x, int dA, int dB) {
  if (x.rows() != dA * dB || x.cols() != dA * dB) throw DimMismatch("partial_trace_b: shape");
  MatrixC out = MatrixC::Zero(dA, dA);
  for (int i = 0; i < dA; ++i)
    for (int j = 0; j < dA; ++j)
      for (int k = 0; k < dB; ++k) out(i, j) += x(i * dB + k, j * dB + k);
  return out;
}

MatrixC partial_trace_a(const MatrixC& x, int dA, int dB) {
  if (x.rows() != dA * dB || x.cols() != dA * dB) throw DimMismatch("partial_trace_a: shape");
  MatrixC out = MatrixC::Zero(dB, dB);
  for (int i = 0; i < dB; ++i)
    for (int j = 0; j < dB; ++j)
      for (int k = 0; k < dA; ++k) out(i, j) += x(k * dB + i, k * dB + j);
  return out;
}

bool all_finite(const MatrixC& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
  return true;
}

bool is_hermitian(const MatrixC& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double hermitian_min_eigenvalue(const MatrixC& m) {
  MatrixC h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixC> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double operator_norm(const MatrixC& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixC> svd(m);
  return svd.singularValues()(0);
}

double max_abs(const MatrixC& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

MatrixC column_space(const MatrixC& m, double relTol) {
  Eigen::JacobiSVD<MatrixC> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  if (s.size() > 0 && s(0) > 0)
    while (rank < s.size() && s(rank) > relTol * s(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace nmzkit
