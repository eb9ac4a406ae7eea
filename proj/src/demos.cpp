#include "nmzkit/demos.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nmzkit/errors.hpp"
#include "nmzkit/haar.hpp"
#include "nmzkit/projections.hpp"

namespace nmzkit::demos {

using algebra::BasisRep;
using algebra::OperatorRep;
using algebra::TracePolynomial;
using haar::Group;

namespace {

// sin(a t) / a and (1 - cos(a t)) / a^2 with their small-a limits.
double sin_over(double a, double t) { return std::abs(a) < 1e-8 ? t - a * a * t * t * t / 6.0 : std::sin(a * t) / a; }
double one_minus_cos_over(double a, double t) {
  return std::abs(a) < 1e-6 ? t * t / 2.0 - a * a * t * t * t * t / 24.0 : (1.0 - std::cos(a * t)) / (a * a);
}

nmz::TimeGrid grid_for(const std::string& demo, const DemoParams& p) {
  return nmz::TimeGrid::span(p.tMax.value_or(default_tmax(demo)), p.dt.value_or(default_dt(demo)));
}

double nearest(const std::vector<cplx>& ev, cplx target) {
  double d = INFINITY;
  for (cplx e : ev) d = std::min(d, std::abs(e - target));
  return d;
}

OperatorRep class_projection_rep(algebra::BasisPtr basis) {
  const Group g = basis->group();
  return algebra::matrix_rep_exact([g](const TracePolynomial& f) { return haar::class_project(f, g); }, basis);
}

OperatorRep liouvillian_rep(algebra::BasisPtr basis, const MatrixC& a) {
  return algebra::matrix_rep_exact([a](const TracePolynomial& f) { return algebra::liouvillian_apply(f, a); }, basis);
}

double alpha_published() { return std::sqrt(7.0 / 12 + std::sqrt(67.0 / 15)); }
double beta_published() { return std::sqrt(-7.0 / 12 + std::sqrt(67.0 / 15)); }

std::vector<cplx> so3_targets(double r) {
  const double a = alpha_published(), b = beta_published();
  return {cplx(0, r / std::sqrt(3.0)), cplx(0, -r / std::sqrt(3.0)), r * cplx(a, b), r * cplx(a, -b),
          -r * cplx(a, b), -r * cplx(a, -b)};
}

}  // namespace

// ---- models ----

MatrixC su2_hamiltonian(double lambda) {
  MatrixC h(2, 2);
  const double nx = 0.48, ny = 0.6, nz = 0.64;
  h << nz, cplx(nx, -ny), cplx(nx, ny), -nz;
  return lambda * h;
}

Su2Model su2_model(double lambda) {
  Su2Model m;
  m.lambda = lambda;
  m.H = su2_hamiltonian(lambda);
  m.generator = algebra::su2_generator(m.H);
  const MatrixC id = MatrixC::Identity(2, 2);
  const TracePolynomial g = TracePolynomial::trace(id, 0.5);
  const TracePolynomial lg = algebra::liouvillian_apply(g, m.generator.matrix);
  m.obs_basis = BasisRep::build({g, lg}, {"g", "Lg"}, Group::SU2);
  m.L = liouvillian_rep(m.obs_basis, m.generator.matrix);
  m.P = class_projection_rep(m.obs_basis);

  const MatrixC aStar = I_unit * m.H;
  const TracePolynomial lsg = algebra::liouvillian_apply(g, aStar);
  const TracePolynomial one = TracePolynomial::constant(2, 1.0);
  m.state_basis = BasisRep::build({one, 4.0 * (g * g), 4.0 * (g * lsg), 4.0 * (lsg * lsg)},
                                  {"1", "rho0", "4gL*g", "4(L*g)^2"}, Group::SU2);
  m.Lstar = liouvillian_rep(m.state_basis, aStar);
  m.Pstar = class_projection_rep(m.state_basis);
  return m;
}

So3Model so3_model(double x, double y, double z, bool negateStateGenerator) {
  So3Model m;
  m.x = x;
  m.y = y;
  m.z = z;
  const algebra::Generator gen = algebra::so3_generator(x, y, z);
  m.r = gen.rate;
  m.X = gen.matrix;
  const MatrixC id = MatrixC::Identity(3, 3);
  const TracePolynomial g = TracePolynomial::trace(id, 1.0 / 3.0);
  const TracePolynomial lg = algebra::liouvillian_apply(g, m.X);
  const TracePolynomial l2g = algebra::liouvillian_apply(lg, m.X);
  m.obs_basis = BasisRep::build({g, lg, l2g}, {"g", "Lg", "L2g"}, Group::SO3);
  m.L = liouvillian_rep(m.obs_basis, m.X);
  m.P = class_projection_rep(m.obs_basis);

  const MatrixC xs = negateStateGenerator ? MatrixC(-m.X) : m.X;
  const TracePolynomial sg = algebra::liouvillian_apply(g, xs);
  const TracePolynomial s2g = algebra::liouvillian_apply(sg, xs);
  const TracePolynomial one = TracePolynomial::constant(3, 1.0);
  m.state_basis = BasisRep::build(
      {one, g, g * g, sg, s2g, g * sg, g * s2g, sg * sg, sg * s2g, s2g * s2g},
      {"1", "g", "g^2", "L*g", "L*^2g", "gL*g", "gL*^2g", "(L*g)^2", "L*gL*^2g", "(L*^2g)^2"}, Group::SO3);
  m.Lstar = liouvillian_rep(m.state_basis, xs);
  m.Pstar = class_projection_rep(m.state_basis);
  return m;
}

MatrixC published_su2_Lstar(double lambda) {
  const double l2 = lambda * lambda;
  MatrixC m = MatrixC::Zero(4, 4);
  m(1, 2) = -l2;
  m(2, 1) = 2.0;
  m(2, 3) = -2.0 * l2;
  m(3, 2) = 1.0;
  return m;
}

MatrixC published_su2_Pstar(double lambda) {
  const double l2 = lambda * lambda;
  MatrixC m = MatrixC::Zero(4, 4);
  m(0, 0) = 1.0;
  m(0, 3) = 4.0 / 3.0 * l2;
  m(1, 1) = 1.0;
  m(1, 3) = -l2 / 3.0;
  return m;
}

MatrixC published_so3_Lstar(double r) {
  const double r2 = r * r;
  MatrixC m = MatrixC::Zero(10, 10);
  m(3, 1) = 1;
  m(3, 4) = -r2;
  m(4, 3) = 1;
  m(5, 2) = 2;
  m(5, 6) = -r2;
  m(6, 5) = 1;
  m(7, 5) = 1;
  m(7, 8) = -r2;
  m(8, 6) = 1;
  m(8, 7) = 2;
  m(8, 9) = -2 * r2;
  m(9, 8) = 1;
  return m;
}

MatrixC published_so3_Pstar(double r) {
  const double r2 = r * r, r4 = r2 * r2;
  MatrixC m = MatrixC::Zero(10, 10);
  m(0, 0) = 1;
  m(0, 7) = r2;
  m(0, 9) = r4 / 5;
  m(1, 1) = 1;
  m(1, 4) = -2.0 / 3 * r2;
  m(1, 7) = 2 * r2;
  m(1, 9) = -2.0 / 5 * r4;
  m(2, 2) = 1;
  m(2, 6) = -2.0 / 3 * r2;
  m(2, 7) = -3 * r2;
  m(2, 9) = 21.0 / 5 * r4;
  return m;
}

VectorC so3_state_oracle(const MatrixC& stateGenerator, double t) {
  const MatrixC f = expm(t * stateGenerator);
  const TracePolynomial rhoT = TracePolynomial::monomial(3, 1.0, {f, f});
  const TracePolynomial proj = haar::class_project(rhoT, Group::SO3);
  const MatrixC id = MatrixC::Identity(3, 3);
  const TracePolynomial g = TracePolynomial::trace(id, 1.0 / 3.0);
  static const auto target = BasisRep::build({TracePolynomial::constant(3, 1.0), g, g * g}, {"1", "g", "g^2"}, Group::SO3);
  return target->coordinates(proj);
}

VectorC so3_state_trig(double r, double t) {
  const double c = std::cos(r * t), c2 = std::cos(2 * r * t);
  VectorC v(3);
  v << 0.4 * (2 - c - c2), 0.4 * (1 + 2 * c - 3 * c2), 1.8 * (1 + 2 * c + 2 * c2);
  return v;
}

VectorC so3_state_published(double r, double t) {
  const double c = std::cos(r * t), c2 = std::cos(2 * r * t), s = std::sin(r * t);
  VectorC v(3);
  v << 18.0 / 5 * (2 - c - c2), 4.0 / 9495 * (-19179 + 61376 * c - 42917 * c2 - 32241 * r * t * s),
      9.0 / 15 * (67 - 106 * c + 54 * c2);
  return v;
}

// ---- outcomes ----

bool DemoOutcome::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

void DemoOutcome::check(std::string name, double value, double tolerance, bool upper) {
  const bool ok = std::isfinite(value) && (upper ? value <= tolerance : value >= tolerance);
  checks.push_back({std::move(name), value, tolerance, upper, ok});
}

Table solution_table(const nmz::GLESolution& s) {
  Table t;
  t.header.push_back("t");
  const bool hasRef = !s.reference.empty();
  auto add_labels = [&](const std::vector<std::string>& labels, const std::string& suffix) {
    for (const auto& l : labels) {
      if (s.real_valued) {
        t.header.push_back(l + suffix);
      } else {
        t.header.push_back("re_" + l + suffix);
        t.header.push_back("im_" + l + suffix);
      }
    }
  };
  std::vector<std::string> labels = s.labels;
  if (labels.size() != static_cast<std::size_t>(s.trajectory.front().size())) {
    labels.clear();
    for (Eigen::Index i = 0; i < s.trajectory.front().size(); ++i) labels.push_back("x" + std::to_string(i));
  }
  add_labels(labels, "");
  if (hasRef) {
    std::vector<std::string> refLabels = s.reference_labels;
    if (refLabels.size() != labels.size()) {
      refLabels.clear();
      for (const auto& l : labels) refLabels.push_back(l + "_ref");
    }
    add_labels(refLabels, "");
    for (const auto& l : labels) t.header.push_back("abs_err_" + l);
  }
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    std::vector<double> row{s.times[k]};
    auto push = [&](const VectorC& v) {
      for (const auto& c : v) {
        row.push_back(c.real());
        if (!s.real_valued) row.push_back(c.imag());
      }
    };
    push(s.trajectory[k]);
    if (hasRef) {
      push(s.reference[k]);
      for (Eigen::Index i = 0; i < s.trajectory[k].size(); ++i) row.push_back(std::abs(s.trajectory[k](i) - s.reference[k](i)));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

double default_dt(const std::string& demo) {
  if (demo == "su2-state" || demo == "so3-state") return 2.5e-4;
  return 1e-3;
}

double default_tmax(const std::string& demo) { return demo == "quantum-bipartite" ? 5.0 : 10.0; }

const std::vector<std::string>& demo_names() {
  static const std::vector<std::string> names{"su2-observable", "su2-state",         "so3-observable",
                                              "so3-state",      "quantum-bipartite", "torus-qnorm"};
  return names;
}

// ---- SU(2) ----

DemoOutcome run_su2_observable(const DemoParams& p) {
  DemoOutcome out;
  out.demo = "su2-observable";
  const auto grid = grid_for(out.demo, p);
  out.parameters = {{"lambda", p.lambda}, {"dt", grid.dt}, {"tMax", grid.time(grid.nSteps)}};
  const Su2Model m = su2_model(p.lambda);
  nmz::GLESolution s = nmz::solve_observable_nmz(m.L, m.P, VectorC::Unit(2, 0), grid);
  std::vector<VectorC> ref;
  for (double t : s.times) {
    VectorC v(2);
    v << std::cos(p.lambda * t), sin_over(p.lambda, t);
    ref.push_back(v);
  }
  s.attach_reference(std::move(ref), {"g_ref", "Lg_ref"});
  out.references.push_back({"trajectory", "g(t) = cos(lambda t) g + sin(lambda t)/lambda Lg"});
  out.check("max_abs_error", s.max_reference_error, p.tolerance);
  out.metrics.push_back({"max_imaginary", s.max_imaginary()});
  double maxRes = 0.0;
  for (double r : s.residual) maxRes = std::max(maxRes, r);
  out.metrics.push_back({"max_step_residual", maxRes});
  out.spectrum = nmz::spectrum_report(m.L.matrix, m.P.matrix);
  out.table = solution_table(s);
  out.solution = std::move(s);
  return out;
}

DemoOutcome run_su2_state(const DemoParams& p) {
  DemoOutcome out;
  out.demo = "su2-state";
  const auto grid = grid_for(out.demo, p);
  out.parameters = {{"lambda", p.lambda}, {"dt", grid.dt}, {"tMax", grid.time(grid.nSteps)}};
  const Su2Model m = su2_model(p.lambda);
  nmz::GLESolution s = nmz::solve_state_nmz(m.Lstar, m.Pstar, VectorC::Unit(4, 1), grid);
  std::vector<VectorC> ref;
  double conservation = 0.0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double c = std::cos(2 * p.lambda * s.times[k]);
    VectorC v = VectorC::Zero(4);
    v(0) = 2.0 / 3.0 * (1 - c);
    v(1) = (1 + 2 * c) / 3.0;
    ref.push_back(v);
    conservation = std::max(conservation, std::abs(s.trajectory[k](0) + s.trajectory[k](1) - cplx(1.0)));
  }
  s.attach_reference(std::move(ref));
  out.references.push_back({"trajectory", "P* rho(t) = 2/3 (1 - cos 2 lambda t) 1 + 1/3 (2 cos 2 lambda t + 1) rho0"});
  out.check("max_abs_error", s.max_reference_error, p.tolerance);
  out.check("a_plus_b_conservation", conservation, 1e-10);
  out.check("Lstar_matches_published", max_abs(m.Lstar.matrix - published_su2_Lstar(p.lambda)), 1e-12);
  out.check("Pstar_matches_published", max_abs(m.Pstar.matrix - published_su2_Pstar(p.lambda)), 1e-12);
  out.spectrum = nmz::spectrum_report(m.Lstar.matrix, m.Pstar.matrix);
  out.table = solution_table(s);
  out.solution = std::move(s);
  return out;
}

// ---- SO(3) ----

DemoOutcome run_so3_observable(const DemoParams& p) {
  DemoOutcome out;
  out.demo = "so3-observable";
  const auto grid = grid_for(out.demo, p);
  const So3Model m = so3_model(p.so3x, p.so3y, p.so3z);
  out.parameters = {{"x", m.x}, {"y", m.y}, {"z", m.z}, {"r", m.r}, {"dt", grid.dt}, {"tMax", grid.time(grid.nSteps)}};
  const VectorC f0 = VectorC::Unit(3, 0);
  nmz::GLESolution s = nmz::solve_observable_nmz(m.L, m.P, f0, grid);
  std::vector<VectorC> ref;
  for (double t : s.times) {
    VectorC v(3);
    v << 1.0, sin_over(m.r, t), one_minus_cos_over(m.r, t);
    ref.push_back(v);
  }
  s.attach_reference(std::move(ref), {"g_ref", "Lg_ref", "L2g_ref"});
  out.references.push_back({"trajectory", "g_t = g + sin(rt)/r Lg + (1 - cos rt)/r^2 L^2g"});
  out.references.push_back({"kernel", "P L e^{sQL} Q L g = -(2/3) r^2 cos(r s / sqrt 3) g"});
  out.check("max_abs_error", s.max_reference_error, p.tolerance);

  const nmz::KernelTable kt = nmz::assemble_gle(m.L, m.P, f0, nmz::Picture::Observable);
  double kernelErr = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double sv = 0.1 * k;
    const VectorC got = kt.full_kernel(sv) * f0;
    const VectorC want = -(2.0 / 3.0) * m.r * m.r * std::cos(m.r * sv / std::sqrt(3.0)) * f0;
    kernelErr = std::max(kernelErr, (got - want).cwiseAbs().maxCoeff());
  }
  out.check("kernel_error", kernelErr, 1e-10);
  out.spectrum = nmz::spectrum_report(m.L.matrix, m.P.matrix);
  out.table = solution_table(s);
  out.solution = std::move(s);
  return out;
}

DemoOutcome run_so3_state(const DemoParams& p) {
  DemoOutcome out;
  out.demo = "so3-state";
  const auto grid = grid_for(out.demo, p);
  const So3Model m = so3_model(p.so3x, p.so3y, p.so3z);
  out.parameters = {{"x", m.x}, {"y", m.y}, {"z", m.z}, {"r", m.r}, {"dt", grid.dt}, {"tMax", grid.time(grid.nSteps)}};
  // rho0 = Tr(O)^2 = 9 g^2
  const VectorC rho0 = 9.0 * VectorC::Unit(10, 2);
  nmz::GLESolution s = nmz::solve_state_nmz(m.Lstar, m.Pstar, rho0, grid);
  s.attach_reference(nmz::projected_propagation(m.Lstar.matrix, m.Pstar.matrix, rho0, grid));
  out.references.push_back({"trajectory", "P* e^{tL*} rho0 by matrix exponential on the 10-element family"});
  out.check("max_abs_error", s.max_reference_error, p.tolerance);

  // Weingarten route straight from the group, no basis involved.
  double oracleErr = 0.0, trigErr = 0.0, publishedErr = 0.0, publishedAtZero = 0.0;
  const std::size_t stride = std::max<std::size_t>(1, grid.nSteps / 200);
  for (std::size_t k = 0; k < s.times.size(); k += stride) {
    const double t = s.times[k];
    const VectorC got = s.trajectory[k].head(3);
    const VectorC oracle = so3_state_oracle(m.X, t);
    oracleErr = std::max(oracleErr, (got - oracle).cwiseAbs().maxCoeff());
    trigErr = std::max(trigErr, (so3_state_trig(m.r, t) - oracle).cwiseAbs().maxCoeff());
    publishedErr = std::max(publishedErr, (so3_state_published(m.r, t) - oracle).cwiseAbs().maxCoeff());
  }
  publishedAtZero = (so3_state_published(m.r, 0.0) - so3_state_oracle(m.X, 0.0)).cwiseAbs().maxCoeff();
  out.references.push_back({"oracle", "class projection of Tr(e^{tX} O)^2 by order-2 Weingarten weights"});
  out.references.push_back({"closed_form", "2/5 (2 - cos rt - cos 2rt) 1 + 2/5 (1 + 2 cos rt - 3 cos 2rt) g + 1/5 (1 + 2 cos rt + 2 cos 2rt) rho0"});
  out.check("weingarten_oracle_error", oracleErr, p.tolerance);
  out.check("closed_form_vs_oracle", trigErr, 1e-12);
  out.metrics.push_back({"published_closed_form_vs_oracle", publishedErr});
  out.metrics.push_back({"published_closed_form_vs_oracle_t0", publishedAtZero});
  out.notes.push_back({"published_closed_form", publishedErr <= p.tolerance ? "agrees" : "disagrees with oracle"});

  // Spectrum of Q*L* on the exact representation.
  out.spectrum = nmz::spectrum_report(m.Lstar.matrix, m.Pstar.matrix);
  const auto targets = so3_targets(m.r);
  const double dSqrt3 = std::max(nearest(out.spectrum, targets[0]), nearest(out.spectrum, targets[1]));
  double dAB = 0.0;
  for (std::size_t k = 2; k < targets.size(); ++k) dAB = std::max(dAB, nearest(out.spectrum, targets[k]));
  out.check("spectrum_pm_i_r_over_sqrt3", dSqrt3, 1e-9);
  out.check("spectrum_pm_r_alpha_pm_i_beta", dAB, 1e-9);

  // The published matrices, for comparison.
  const MatrixC pubL = published_so3_Lstar(m.r), pubP = published_so3_Pstar(m.r);
  out.check("Lstar_matches_published", max_abs(m.Lstar.matrix - pubL), 1e-12);
  out.metrics.push_back({"Pstar_vs_published_max_deviation", max_abs(m.Pstar.matrix - pubP)});
  std::string cols;
  for (Eigen::Index j = 0; j < 10; ++j)
    if (max_abs(m.Pstar.matrix.col(j) - pubP.col(j)) > 1e-12) cols += (cols.empty() ? "" : ",") + m.state_basis->label(j);
  out.notes.push_back({"Pstar_columns_differing_from_published", cols.empty() ? "none" : cols});
  const auto pubSpec = nmz::spectrum_report(pubL, pubP);
  double pubAB = 0.0;
  for (std::size_t k = 2; k < targets.size(); ++k) pubAB = std::max(pubAB, nearest(pubSpec, targets[k]));
  out.metrics.push_back({"published_matrices_alpha_beta_distance", pubAB});
  out.metrics.push_back({"functional_rank", static_cast<double>(m.state_basis->functional_rank())});
  out.table = solution_table(s);
  out.solution = std::move(s);
  return out;
}

// ---- bipartite ----

MatrixC default_sigma0() {
  MatrixC s(2, 2);
  s << 0.6, cplx(0.2, -0.1), cplx(0.2, 0.1), 0.4;
  return s;
}

quantum::BipartiteSystem two_qubit_system(double omega, double gamma, double rhoBp0) {
  MatrixC rhoB = MatrixC::Zero(2, 2);
  rhoB(0, 0) = rhoBp0;
  rhoB(1, 1) = 1.0 - rhoBp0;
  return quantum::BipartiteSystem::product(2, 2, quantum::two_qubit_hamiltonian(omega, gamma), default_sigma0(), rhoB);
}

DemoOutcome run_quantum_bipartite(const DemoParams& p) {
  DemoOutcome out;
  out.demo = "quantum-bipartite";
  const auto grid = grid_for(out.demo, p);
  out.parameters = {{"omega", p.omega}, {"gamma", p.gamma}, {"rhoB_00", p.rhoBp0}, {"dt", grid.dt}, {"tMax", grid.time(grid.nSteps)}};
  const auto sys = two_qubit_system(p.omega, p.gamma, p.rhoBp0);
  auto red = quantum::nmz_reduce_bipartite(sys, grid);
  const auto exact = quantum::exact_reduce(sys, grid);
  double opErr = 0.0, herm = 0.0, trace = 0.0, negativity = 0.0;
  std::vector<VectorC> ref;
  for (std::size_t k = 0; k < exact.size(); ++k) {
    const MatrixC& s = red.sigma[k];
    opErr = std::max(opErr, operator_norm(s - exact[k]));
    herm = std::max(herm, max_abs(s - s.adjoint()));
    trace = std::max(trace, std::abs(s.trace() - cplx(1.0)));
    negativity = std::max(negativity, -hermitian_min_eigenvalue(s));
    ref.push_back(vec(exact[k]));
  }
  red.solution.attach_reference(std::move(ref));
  out.references.push_back({"trajectory", "Tr_B(e^{-iHt} rho0 e^{iHt}) by eigendecomposition"});
  out.check("max_operator_norm_error", opErr, p.tolerance);
  out.check("max_noise_norm", red.max_noise_norm, 1e-12);
  out.check("hermiticity", herm, 1e-9);
  out.check("trace", trace, 1e-9);
  out.check("negativity", negativity, 1e-9);
  out.table = solution_table(red.solution);
  out.solution = std::move(red.solution);
  return out;
}

// ---- torus ----

DemoOutcome run_torus_qnorm(const DemoParams& p) {
  DemoOutcome out;
  out.demo = "torus-qnorm";
  out.parameters = {{"n", static_cast<double>(p.torusN)}, {"gridSize", static_cast<double>(p.torusGrid)}};
  const auto d = projections::torus_demo(p.torusN, p.torusGrid);
  out.metrics.push_back({"qNorm", d.q_norm});
  out.metrics.push_back({"v_n", d.v_n});
  out.metrics.push_back({"qNorm_ref", d.reference_q_norm});
  out.references.push_back({"v_n", "-1 + 2 sqrt(2 pi)/n erf(n / (2 sqrt 2))"});
  out.references.push_back({"qNorm", "max(1 - v_n, v_n - f_n(0))"});
  out.check("qNorm_vs_reference", std::abs(d.q_norm - d.reference_q_norm), p.tolerance);
  out.check("qNorm_upper_bound", d.q_norm, 2.0);
  if (p.torusN >= 100 && p.torusGrid >= 4096) out.check("qNorm_near_two", d.q_norm, 1.9, false);
  out.table.header = {"s2", "f", "Pf", "Qf"};
  const int N = p.torusGrid;
  for (int k = 0; k < N; ++k) {
    const double s2 = static_cast<double>(k) / N, dd = s2 - 0.5;
    const double f = -1.0 + 2.0 * std::exp(-static_cast<double>(p.torusN) * p.torusN * dd * dd / 2.0);
    out.table.rows.push_back({s2, f, d.v_n, f - d.v_n});
  }
  return out;
}

DemoOutcome run_demo(const std::string& name, const DemoParams& p) {
  if (name == "su2-observable") return run_su2_observable(p);
  if (name == "su2-state") return run_su2_state(p);
  if (name == "so3-observable") return run_so3_observable(p);
  if (name == "so3-state") return run_so3_state(p);
  if (name == "quantum-bipartite") return run_quantum_bipartite(p);
  if (name == "torus-qnorm") return run_torus_qnorm(p);
  throw std::invalid_argument("unknown demo '" + name + "'");
}

}  // namespace nmzkit::demos
