#include "nmzkit/nmz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nmzkit/errors.hpp"
#include "nmzkit/haar.hpp"

namespace nmzkit::nmz {

namespace {

constexpr double kIdempotenceTol = 1e-10;

void check_square(const MatrixC& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) throw DimMismatch(std::string(what) + ": dimension mismatch");
}

// Neumaier-compensated accumulation of matrices.
class CompensatedSum {
 public:
  CompensatedSum(Eigen::Index r, Eigen::Index c) : sum_(MatrixC::Zero(r, c)), comp_(MatrixC::Zero(r, c)) {}
  void add(const MatrixC& x) {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      add_part(sum_.data()[k], comp_.data()[k], x.data()[k]);
    }
  }
  MatrixC value() const { return sum_ + comp_; }

 private:
  static void add_scalar(double& s, double& c, double x) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  static void add_part(cplx& s, cplx& c, cplx x) {
    double sr = s.real(), si = s.imag(), cr = c.real(), ci = c.imag();
    add_scalar(sr, cr, x.real());
    add_scalar(si, ci, x.imag());
    s = {sr, si};
    c = {cr, ci};
  }
  MatrixC sum_, comp_;
};

struct StepSolver {
  StepSolver(const MatrixC& omega, const MatrixC& k0, double h) {
    const auto m = omega.rows();
    MatrixC a = MatrixC::Identity(m, m) - 0.5 * h * omega - 0.25 * h * h * k0;
    if (!all_finite(a)) throw StepDivergence("Volterra step matrix is not finite");
    lu.compute(a);
    if (!(lu.rcond() > 1e-14)) throw StepDivergence("Volterra step matrix is singular at this dt");
  }
  MatrixC solve(const MatrixC& rhs) const {
    MatrixC z = lu.solve(rhs);
    if (!all_finite(z)) throw StepDivergence("Volterra step produced non-finite values");
    return z;
  }
  Eigen::PartialPivLU<MatrixC> lu;
};

std::vector<double> central_residual(const std::vector<MatrixC>& z, const std::vector<MatrixC>& f, double h) {
  const std::size_t n = z.size();
  std::vector<double> r(n, 0.0);
  if (n < 3) return r;
  for (std::size_t k = 1; k + 1 < n; ++k) r[k] = max_abs((z[k + 1] - z[k - 1]) / (2.0 * h) - f[k]);
  r[0] = r[1];
  r[n - 1] = r[n - 2];
  return r;
}

// Convolution core on precomputed lag tables K_j = K(j h), R_j = R(j h).
VolterraTrajectory convolution_core(const MatrixC& omega, const std::vector<MatrixC>& kLag,
                                    const std::vector<MatrixC>& rTab, const MatrixC& z0, double h) {
  const std::size_t N = rTab.size() - 1;
  const StepSolver step(omega, kLag[0], h);
  VolterraTrajectory out;
  out.z.reserve(N + 1);
  out.z.push_back(z0);
  std::vector<MatrixC> f;
  f.reserve(N + 1);
  f.push_back(omega * z0 + rTab[0]);
  for (std::size_t n = 0; n < N; ++n) {
    // History part of the trapezoid at t_{n+1}, all nodes except the new one.
    CompensatedSum hist(z0.rows(), z0.cols());
    hist.add(0.5 * (kLag[n + 1] * z0));
    for (std::size_t j = 1; j <= n; ++j) hist.add(kLag[n + 1 - j] * out.z[j]);
    const MatrixC hpart = h * hist.value();
    const MatrixC rhs = out.z[n] + 0.5 * h * (f[n] + rTab[n + 1] + hpart);
    out.z.push_back(step.solve(rhs));
    f.push_back(omega * out.z.back() + rTab[n + 1] + hpart + 0.5 * h * (kLag[0] * out.z.back()));
  }
  out.residual = central_residual(out.z, f, h);
  return out;
}

VolterraTrajectory recursive_core(const KernelTable& kt, const TimeGrid& grid) {
  const double h = grid.dt;
  const std::size_t N = grid.nSteps;
  const MatrixC e = expm(h * kt.generator);
  const MatrixC& kc = kt.kernel_left;
  const MatrixC& kb = kt.kernel_right;
  const StepSolver step(kt.omega, kc * kb, h);

  VolterraTrajectory out;
  out.z.reserve(N + 1);
  std::vector<MatrixC> f;
  f.reserve(N + 1);

  MatrixC zn = kt.initial;
  MatrixC noiseState = expm(grid.t0 * kt.generator) * kt.noise_right;  // e^{t M} noise_right
  MatrixC s = MatrixC::Zero(kt.generator.rows(), zn.cols());            // memory state
  MatrixC un = kb * zn;
  MatrixC fn = kt.omega * zn + kt.noise_left * noiseState;
  out.z.push_back(zn);
  f.push_back(fn);
  for (std::size_t n = 0; n < N; ++n) {
    noiseState = e * noiseState;
    const MatrixC rNext = kt.noise_left * noiseState;
    const MatrixC sPred = e * (s + 0.5 * h * un);
    const MatrixC rhs = zn + 0.5 * h * (fn + rNext + kc * sPred);
    zn = step.solve(rhs);
    un = kb * zn;
    s = sPred + 0.5 * h * un;
    fn = kt.omega * zn + rNext + kc * s;
    out.z.push_back(zn);
    f.push_back(fn);
  }
  out.residual = central_residual(out.z, f, h);
  return out;
}

}  // namespace

// ---- grid and problem ----

TimeGrid TimeGrid::span(double tMax, double dt) {
  if (!(dt > 0.0) || !(tMax >= dt) || !std::isfinite(tMax)) throw std::invalid_argument("TimeGrid: need 0 < dt <= tMax");
  const double steps = std::round(tMax / dt);
  if (std::abs(steps * dt - tMax) > 1e-9 * tMax) throw std::invalid_argument("TimeGrid: tMax must be a multiple of dt");
  return {0.0, dt, static_cast<std::size_t>(steps)};
}

void TimeGrid::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t0)) throw std::invalid_argument("TimeGrid: dt must be positive");
  if (nSteps < 1) throw std::invalid_argument("TimeGrid: nSteps must be at least 1");
}

GLEProblem GLEProblem::make(const algebra::OperatorRep& L, const algebra::OperatorRep& P, VectorC x0, TimeGrid grid,
                            Picture picture) {
  if (L.basis != P.basis) throw BasisMismatch("GLEProblem: L and P are over different bases");
  GLEProblem p{L.matrix, P.matrix, std::move(x0), grid, picture, L.basis ? L.basis->labels() : std::vector<std::string>{}};
  p.validate();
  return p;
}

void GLEProblem::validate() const {
  const auto n = L.rows();
  check_square(L, n, "GLEProblem L");
  check_square(P, n, "GLEProblem P");
  if (x0.size() != n) throw DimMismatch("GLEProblem: x0 length");
  if (max_abs(P * P - P) > kIdempotenceTol) throw std::invalid_argument("GLEProblem: P is not idempotent");
  grid.validate();
}

// ---- kernel table ----

MatrixC KernelTable::kernel(double tau) const { return kernel_left * expm(tau * generator) * kernel_right; }

MatrixC KernelTable::noise(double t) const { return noise_left * expm(t * generator) * noise_right; }

MatrixC KernelTable::full_kernel(double tau) const { return P * L * expm(tau * (Q * L)) * Q * L * P; }

VectorC KernelTable::full_noise(double t) const {
  const MatrixC e = expm(t * (Q * L));
  if (picture == Picture::Observable) return e * (Q * L * x0);
  return P * L * e * (Q * x0);
}

VectorC KernelTable::lift(const MatrixC& z) const {
  if (picture == Picture::Observable) return z.transpose() * (image.adjoint() * x0);
  return image * z;
}

KernelTable assemble_gle(const MatrixC& L, const MatrixC& P, const VectorC& x0, Picture picture) {
  const auto n = L.rows();
  check_square(L, n, "assemble_gle L");
  check_square(P, n, "assemble_gle P");
  if (x0.size() != n) throw DimMismatch("assemble_gle: x0 length");
  if (!all_finite(L) || !all_finite(P) || !all_finite(x0)) throw std::invalid_argument("assemble_gle: non-finite input");
  if (max_abs(P * P - P) > kIdempotenceTol) throw std::invalid_argument("assemble_gle: P is not idempotent");

  KernelTable kt;
  kt.picture = picture;
  kt.L = L;
  kt.P = P;
  kt.Q = MatrixC::Identity(n, n) - P;
  kt.x0 = x0;
  kt.image = column_space(P);
  const MatrixC& V = kt.image;
  const MatrixC QL = kt.Q * L;
  const MatrixC PL = P * L;
  if (picture == Picture::Observable) {
    if ((P * x0 - x0).norm() > 1e-10 * std::max(1.0, x0.norm()))
      throw std::invalid_argument("assemble_gle: observable initial condition must lie in the image of P");
    kt.omega = (V.adjoint() * PL * V).transpose();
    kt.generator = QL.transpose();
    kt.kernel_left = (QL * V).transpose();
    kt.kernel_right = (V.adjoint() * PL).transpose();
    kt.noise_left = (QL * V).transpose();
    kt.noise_right = MatrixC::Identity(n, n);
    kt.initial = V.transpose();
  } else {
    kt.omega = V.adjoint() * PL * V;
    kt.generator = QL;
    kt.kernel_left = V.adjoint() * PL;
    kt.kernel_right = QL * V;
    kt.noise_left = V.adjoint() * PL;
    kt.noise_right = kt.Q * x0;
    kt.initial = V.adjoint() * (P * x0);
  }
  return kt;
}

KernelTable assemble_gle(const algebra::OperatorRep& L, const algebra::OperatorRep& P, const VectorC& x0,
                         Picture picture) {
  if (L.basis != P.basis) throw BasisMismatch("assemble_gle: L and P are over different bases");
  return assemble_gle(L.matrix, P.matrix, x0, picture);
}

KernelTable assemble_gle(const GLEProblem& problem) {
  problem.validate();
  return assemble_gle(problem.L, problem.P, problem.x0, problem.picture);
}

// ---- solution ----

void GLESolution::attach_reference(std::vector<VectorC> ref, std::vector<std::string> refLabels) {
  if (ref.size() != trajectory.size()) throw DimMismatch("attach_reference: length mismatch");
  max_reference_error = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    if (ref[k].size() != trajectory[k].size()) throw DimMismatch("attach_reference: coordinate count");
    max_reference_error = std::max(max_reference_error, (ref[k] - trajectory[k]).cwiseAbs().maxCoeff());
  }
  if (refLabels.empty())
    for (const auto& l : labels) refLabels.push_back(l + "_ref");
  reference_labels = std::move(refLabels);
  reference = std::move(ref);
}

double GLESolution::max_imaginary() const {
  double m = 0.0;
  for (const auto& v : trajectory) m = std::max(m, v.imag().cwiseAbs().maxCoeff());
  return m;
}

// ---- solvers ----

VolterraTrajectory solve_volterra_convolution(const VolterraSystem& sys, const TimeGrid& grid) {
  grid.validate();
  const auto m = sys.omega.rows();
  check_square(sys.omega, m, "solve_volterra_convolution omega");
  if (sys.z0.rows() != m) throw DimMismatch("solve_volterra_convolution: z0 rows");
  std::vector<MatrixC> kLag, rTab;
  for (std::size_t j = 0; j <= grid.nSteps; ++j) {
    kLag.push_back(sys.kernel ? sys.kernel(grid.dt * static_cast<double>(j)) : MatrixC::Zero(m, m));
    rTab.push_back(sys.noise ? sys.noise(grid.time(j)) : MatrixC::Zero(m, sys.z0.cols()));
  }
  return convolution_core(sys.omega, kLag, rTab, sys.z0, grid.dt);
}

GLESolution solve_volterra(const KernelTable& kt, const TimeGrid& grid, HistoryMethod method) {
  grid.validate();
  VolterraTrajectory traj;
  const double h = grid.dt;
  if (method == HistoryMethod::Recursive) {
    traj = recursive_core(kt, grid);
  } else {
    // Lag tables from powers of e^{hM}.
    const MatrixC e = expm(h * kt.generator);
    std::vector<MatrixC> kLag, rTab;
    MatrixC pw = MatrixC::Identity(e.rows(), e.cols());
    MatrixC nz = expm(grid.t0 * kt.generator) * kt.noise_right;
    for (std::size_t j = 0; j <= grid.nSteps; ++j) {
      kLag.push_back(kt.kernel_left * pw * kt.kernel_right);
      rTab.push_back(kt.noise_left * nz);
      pw = e * pw;
      nz = e * nz;
    }
    traj = convolution_core(kt.omega, kLag, rTab, kt.initial, h);
  }

  GLESolution sol;
  sol.picture = kt.picture;
  sol.residual = std::move(traj.residual);
  sol.times.reserve(grid.size());
  sol.trajectory.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    sol.times.push_back(grid.time(k));
    sol.trajectory.push_back(kt.lift(traj.z[k]));
  }
  // Noise magnitude along the grid.
  const MatrixC QL = kt.Q * kt.L;
  const MatrixC eQ = expm(h * QL);
  VectorC carrier = kt.picture == Picture::Observable ? VectorC(QL * kt.x0) : VectorC(kt.Q * kt.x0);
  carrier = expm(grid.t0 * QL) * carrier;
  const MatrixC PL = kt.P * kt.L;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const VectorC r = kt.picture == Picture::Observable ? carrier : VectorC(PL * carrier);
    sol.noise_norm.push_back(r.size() ? r.cwiseAbs().maxCoeff() : 0.0);
    carrier = eQ * carrier;
  }
  return sol;
}

GLESolution solve_observable_nmz(const algebra::OperatorRep& L, const algebra::OperatorRep& P, const VectorC& f0,
                                 const TimeGrid& grid, HistoryMethod method) {
  GLESolution s = solve_volterra(assemble_gle(L, P, f0, Picture::Observable), grid, method);
  if (L.basis) s.labels = L.basis->labels();
  return s;
}

GLESolution solve_state_nmz(const MatrixC& Lstar, const MatrixC& Pstar, const VectorC& rho0, const TimeGrid& grid,
                            HistoryMethod method) {
  return solve_volterra(assemble_gle(Lstar, Pstar, rho0, Picture::State), grid, method);
}

GLESolution solve_state_nmz(const algebra::OperatorRep& Lstar, const algebra::OperatorRep& Pstar,
                            const VectorC& rho0, const TimeGrid& grid, HistoryMethod method) {
  if (Lstar.basis != Pstar.basis) throw BasisMismatch("solve_state_nmz: L* and P* are over different bases");
  GLESolution s = solve_state_nmz(Lstar.matrix, Pstar.matrix, rho0, grid, method);
  if (Lstar.basis) s.labels = Lstar.basis->labels();
  return s;
}

std::vector<VectorC> projected_propagation(const MatrixC& L, const MatrixC& P, const VectorC& x0,
                                           const TimeGrid& grid) {
  grid.validate();
  const MatrixC e = expm(grid.dt * L);
  VectorC x = expm(grid.t0 * L) * x0;
  std::vector<VectorC> out;
  out.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.push_back(P * x);
    x = e * x;
  }
  return out;
}

// ---- checks ----

double dyson_check(const MatrixC& L, const MatrixC& P, double t, int nQuad) {
  const auto n = L.rows();
  check_square(L, n, "dyson_check L");
  check_square(P, n, "dyson_check P");
  if (nQuad < 2) throw std::invalid_argument("dyson_check: nQuad must be at least 2");
  if (nQuad % 2) ++nQuad;
  const MatrixC QL = (MatrixC::Identity(n, n) - P) * L;
  const MatrixC PL = P * L;
  const MatrixC lhs = expm(t * L) - expm(t * QL);
  if (t == 0.0) return lhs.norm();
  const double h = t / nQuad;
  MatrixC integral = MatrixC::Zero(n, n);
  for (int k = 0; k <= nQuad; ++k) {
    const double s = h * k;
    const double w = (k == 0 || k == nQuad) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    integral += w * (expm(s * L) * PL * expm((t - s) * QL));
  }
  integral *= h / 3.0;
  return (lhs - integral).norm();
}

MatrixC pairing_gram(const algebra::BasisRep& states, const algebra::BasisRep& observables) {
  if (states.group() != observables.group()) throw DimMismatch("pairing_gram: bases over different groups");
  const auto m = static_cast<Eigen::Index>(states.size()), n = static_cast<Eigen::Index>(observables.size());
  std::size_t deg = 0;
  for (const auto& e : states.elements()) deg = std::max(deg, e.max_degree());
  std::size_t degO = 0;
  for (const auto& e : observables.elements()) degO = std::max(degO, e.max_degree());
  const haar::Cubature c = haar::exact_cubature(states.group(), static_cast<int>(deg + degO));
  MatrixC g = MatrixC::Zero(m, n);
  for (std::size_t k = 0; k < c.points.size(); ++k) {
    const VectorC s = states.evaluate(c.points[k]);
    const VectorC o = observables.evaluate(c.points[k]);
    g += c.weights[k] * (s * o.transpose());
  }
  return g;
}

MatrixC pairing_adjoint(const MatrixC& L, const MatrixC& gram) {
  if (gram.rows() != gram.cols() || gram.cols() != L.rows())
    throw PairingSingular("pairing_adjoint: Gram matrix must be square and match L");
  Eigen::FullPivLU<MatrixC> lu(gram);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) throw PairingSingular("pairing_adjoint: Gram matrix is rank-deficient");
  // (L*)^T G = G L
  return (gram * L * lu.inverse()).transpose();
}

DualityReport duality_check(const MatrixC& L, const MatrixC& gram, const VectorC& rho0, const VectorC& f0,
                            const std::vector<double>& times, const std::optional<MatrixC>& Lstar,
                            const std::optional<VectorC>& unitCoords) {
  if (gram.cols() != L.rows() || f0.size() != L.rows() || rho0.size() != gram.rows())
    throw DimMismatch("duality_check: dimensions");
  DualityReport rep;
  rep.Lstar = Lstar ? *Lstar : pairing_adjoint(L, gram);
  check_square(rep.Lstar, gram.rows(), "duality_check L*");
  const cplx norm0 = unitCoords ? cplx(rho0.transpose() * gram * *unitCoords) : cplx(0.0);
  for (double t : times) {
    const VectorC ft = expm(t * L) * f0;
    const VectorC rt = expm(t * rep.Lstar) * rho0;
    const cplx lhs = rho0.transpose() * gram * ft;
    const cplx rhs = rt.transpose() * gram * f0;
    rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(lhs - rhs));
    if (unitCoords) {
      const cplx nt = rt.transpose() * gram * *unitCoords;
      rep.max_normalization_drift = std::max(rep.max_normalization_drift, std::abs(nt - norm0));
    }
  }
  return rep;
}

std::vector<cplx> spectrum_report(const MatrixC& L, const MatrixC& P) {
  const auto n = L.rows();
  check_square(L, n, "spectrum_report L");
  check_square(P, n, "spectrum_report P");
  Eigen::ComplexEigenSolver<MatrixC> es((MatrixC::Identity(n, n) - P) * L, false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
    if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
    if (std::abs(a.imag() - b.imag()) > 1e-9) return a.imag() < b.imag();
    return false;
  });
  return ev;
}

}  // namespace nmzkit::nmz
