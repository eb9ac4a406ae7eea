#include "nmzkit/projections.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "nmzkit/errors.hpp"

namespace nmzkit::projections {

namespace {

VectorC ones(std::size_t n) { return VectorC::Ones(static_cast<Eigen::Index>(n)); }

std::function<VectorC(const VectorC&)> dense_map(const MatrixC& m) {
  return [m](const VectorC& x) -> VectorC {
    if (x.size() != m.cols()) throw DimMismatch("projection applied to vector of wrong length");
    return m * x;
  };
}

struct Rng {
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(eng); }
  double normal() { return std::normal_distribution<double>()(eng); }
  std::mt19937_64 eng;
};

VectorC random_complex(Rng& r, std::size_t n) {
  VectorC v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = cplx(r.uniform(-1, 1), r.uniform(-1, 1));
  return v;
}

MatrixC random_gaussian(Rng& r, int rows, int cols) {
  MatrixC g(rows, cols);
  for (Eigen::Index k = 0; k < g.size(); ++k) g.data()[k] = cplx(r.normal(), r.normal());
  return g;
}

// Random element of the algebra with O(1) norm.
VectorC random_element(const ProjectionOp& P, Rng& r) {
  if (P.kind == AlgebraKind::Functions) return random_complex(r, P.length);
  MatrixC g = random_gaussian(r, P.matrix_dim, P.matrix_dim);
  return vec(g / operator_norm(g));
}

VectorC random_positive(const ProjectionOp& P, Rng& r, int trial) {
  if (P.kind == AlgebraKind::Functions) {
    VectorC v(static_cast<Eigen::Index>(P.length));
    const bool indicator = trial % 3 == 0;
    for (auto& x : v) x = indicator ? (r.uniform() < 0.3 ? 1.0 : 0.0) : r.uniform();
    return v;
  }
  const int rank = 1 + trial % P.matrix_dim;
  MatrixC g = random_gaussian(r, P.matrix_dim, rank);
  MatrixC x = g * g.adjoint();
  return vec(x / operator_norm(x));
}

VectorC random_state(const ProjectionOp& P, Rng& r, int trial) {
  if (P.kind == AlgebraKind::Functions) {
    VectorC v = VectorC::Zero(static_cast<Eigen::Index>(P.length));
    if (trial % 4 == 0) {
      v(static_cast<Eigen::Index>(r.eng() % P.length)) = 1.0;
      return v;
    }
    double s = 0.0;
    for (auto& x : v) {
      const double e = -std::log(1.0 - r.uniform());
      x = e;
      s += e;
    }
    return v / s;
  }
  const int rank = 1 + trial % P.matrix_dim;
  MatrixC g = random_gaussian(r, P.matrix_dim, rank);
  MatrixC rho = g * g.adjoint();
  return vec(rho / rho.trace().real());
}

VectorC unit(const ProjectionOp& P) {
  if (P.kind == AlgebraKind::Functions) return ones(P.length);
  return vec(MatrixC::Identity(P.matrix_dim, P.matrix_dim));
}

VectorC product(const ProjectionOp& P, const VectorC& a, const VectorC& b) {
  if (P.kind == AlgebraKind::Functions) return a.cwiseProduct(b);
  return vec(unvec(a, P.matrix_dim) * unvec(b, P.matrix_dim));
}

double norm(const ProjectionOp& P, const VectorC& a) {
  if (P.kind == AlgebraKind::Functions) return a.cwiseAbs().maxCoeff();
  return operator_norm(unvec(a, P.matrix_dim));
}

// <rho, x>
cplx pairing(const ProjectionOp& P, const VectorC& rho, const VectorC& x) {
  if (P.kind == AlgebraKind::Functions) return (rho.array() * x.array()).sum();
  return (unvec(rho, P.matrix_dim) * unvec(x, P.matrix_dim)).trace();
}

// Violation of positivity for an element expected to be positive.
double negativity(const ProjectionOp& P, const VectorC& y) {
  if (P.kind == AlgebraKind::Functions) {
    double v = 0.0;
    for (const auto& c : y) v = std::max({v, -c.real(), std::abs(c.imag())});
    return v;
  }
  const MatrixC m = unvec(y, P.matrix_dim);
  const double herm = max_abs(m - m.adjoint());
  return std::max(herm, -hermitian_min_eigenvalue(m));
}

VectorC image_element(const ProjectionOp& P, Rng& r) {
  if (P.image_sampler) return P.image_sampler(r.eng());
  return P.apply(random_element(P, r));
}

}  // namespace

FiniteMeasureSpace FiniteMeasureSpace::make(VectorR weights, bool probability, std::vector<std::string> labels) {
  if (weights.size() == 0) throw EmptySpace("FiniteMeasureSpace: no points");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("FiniteMeasureSpace: weights must be finite and >= 0");
  if (probability && std::abs(weights.sum() - 1.0) > 1e-12) throw NotNormalized("FiniteMeasureSpace: weights do not sum to 1");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(weights.size()))
    throw std::invalid_argument("FiniteMeasureSpace: label count");
  return {std::move(labels), std::move(weights), probability};
}

MatrixC ProjectionOp::dense() const {
  const auto n = static_cast<Eigen::Index>(length);
  MatrixC m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = apply(VectorC::Unit(n, j));
  return m;
}

MatrixC ProjectionOp::dense_predual() const {
  const auto n = static_cast<Eigen::Index>(length);
  MatrixC m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = predual(VectorC::Unit(n, j));
  return m;
}

MatrixC superoperator(const std::function<MatrixC(const MatrixC&)>& f, Eigen::Index inDim) {
  MatrixC out;
  for (Eigen::Index k = 0; k < inDim * inDim; ++k) {
    MatrixC e = MatrixC::Zero(inDim, inDim);
    e(k % inDim, k / inDim) = 1.0;
    const VectorC col = vec(f(e));
    if (k == 0) out.resize(col.size(), inDim * inDim);
    out.col(k) = col;
  }
  return out;
}

// ---- level sets ----

LevelSetProjection condexp_level_sets(const FiniteMeasureSpace& space, const FiniteObservable& h, double binTol) {
  const std::size_t n = space.size();
  if (n == 0) throw EmptySpace("condexp_level_sets: no points");
  if (static_cast<std::size_t>(h.size()) != n) throw DimMismatch("condexp_level_sets: h length");
  for (double w : space.weights)
    if (!(w > 0.0)) throw std::invalid_argument("condexp_level_sets: weights must be strictly positive");
  for (const auto& v : h)
    if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v))) throw std::invalid_argument("condexp_level_sets: h must be real");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return h(a).real() < h(b).real(); });
  const double range = h(order.back()).real() - h(order.front()).real();
  if (binTol < 0.0) binTol = 1e-9 * range;

  LevelSetProjection out;
  out.bin.assign(n, 0);
  int current = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && h(order[k]).real() - h(order[k - 1]).real() > binTol) ++current;
    out.bin[order[k]] = current;
  }
  out.bins = current + 1;

  const VectorR w = space.weights / space.weights.sum();
  VectorR binMass = VectorR::Zero(out.bins);
  for (std::size_t i = 0; i < n; ++i) binMass(out.bin[i]) += w(i);

  auto bins = out.bin;
  const int nb = out.bins;
  ProjectionOp& P = out.op;
  P.kind = AlgebraKind::Functions;
  P.length = n;
  P.image = "functions constant on " + std::to_string(nb) + " level sets";
  P.tau = w.cast<cplx>();
  P.apply = [bins, w, binMass, nb](const VectorC& f) -> VectorC {
    if (f.size() != w.size()) throw DimMismatch("level-set projection: length");
    VectorC acc = VectorC::Zero(nb);
    for (Eigen::Index i = 0; i < f.size(); ++i) acc(bins[i]) += w(i) * f(i);
    VectorC out(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) out(i) = acc(bins[i]) / binMass(bins[i]);
    return out;
  };
  P.predual = [bins, w, binMass, nb](const VectorC& rho) -> VectorC {
    if (rho.size() != w.size()) throw DimMismatch("level-set predual: length");
    VectorC mass = VectorC::Zero(nb);
    for (Eigen::Index i = 0; i < rho.size(); ++i) mass(bins[i]) += rho(i);
    VectorC out(rho.size());
    for (Eigen::Index i = 0; i < rho.size(); ++i) out(i) = w(i) * mass(bins[i]) / binMass(bins[i]);
    return out;
  };
  P.image_sampler = [bins, nb](std::uint64_t s) -> VectorC {
    Rng r(s);
    VectorC vals = random_complex(r, static_cast<std::size_t>(nb));
    VectorC out(static_cast<Eigen::Index>(bins.size()));
    for (std::size_t i = 0; i < bins.size(); ++i) out(static_cast<Eigen::Index>(i)) = vals(bins[i]);
    return out;
  };
  return out;
}

// ---- tensor factor ----

TensorReduction condexp_tensor(const FiniteMeasureSpace& spaceN, const FiniteMeasureSpace& spaceR, const VectorR& p) {
  const std::size_t nN = spaceN.size(), nR = spaceR.size();
  if (nN == 0 || nR == 0) throw EmptySpace("condexp_tensor: empty factor");
  if (static_cast<std::size_t>(p.size()) != nR) throw DimMismatch("condexp_tensor: p length");
  for (double v : p)
    if (!(v >= 0.0)) throw NotNormalized("condexp_tensor: p has negative entries");
  if (std::abs(p.sum() - 1.0) > 1e-12) throw NotNormalized("condexp_tensor: p does not sum to 1");

  const auto N = static_cast<Eigen::Index>(nN), R = static_cast<Eigen::Index>(nR);
  TensorReduction t;
  t.nN = nN;
  t.nR = nR;
  const VectorC pc = p.cast<cplx>();
  t.pi = [N, R, pc](const VectorC& f) -> VectorC {
    if (f.size() != N * R) throw DimMismatch("pi: length");
    VectorC g(N);
    for (Eigen::Index x = 0; x < N; ++x) g(x) = (f.segment(x * R, R).array() * pc.array()).sum();
    return g;
  };
  t.embed = [N, R](const VectorC& g) -> VectorC {
    if (g.size() != N) throw DimMismatch("embed: length");
    VectorC f(N * R);
    for (Eigen::Index x = 0; x < N; ++x) f.segment(x * R, R).setConstant(g(x));
    return f;
  };
  t.pi_star = [N, R, pc](const VectorC& psi) -> VectorC {
    if (psi.size() != N) throw DimMismatch("pi_star: length");
    VectorC f(N * R);
    for (Eigen::Index x = 0; x < N; ++x) f.segment(x * R, R) = psi(x) * pc;
    return f;
  };
  t.embed_star = [N, R](const VectorC& phi) -> VectorC {
    if (phi.size() != N * R) throw DimMismatch("embed_star: length");
    VectorC g(N);
    for (Eigen::Index x = 0; x < N; ++x) g(x) = phi.segment(x * R, R).sum();
    return g;
  };

  ProjectionOp& P = t.P;
  P.kind = AlgebraKind::Functions;
  P.length = nN * nR;
  P.image = "functions of the first factor";
  auto pi = t.pi, embed = t.embed, piStar = t.pi_star, embedStar = t.embed_star;
  P.apply = [pi, embed](const VectorC& f) { return embed(pi(f)); };
  P.predual = [piStar, embedStar](const VectorC& rho) { return piStar(embedStar(rho)); };
  const VectorR wN = spaceN.weights / spaceN.weights.sum();
  VectorC tau(N * R);
  for (Eigen::Index x = 0; x < N; ++x) tau.segment(x * R, R) = wN(x) * pc;
  P.tau = tau;
  P.image_sampler = [embed, nN](std::uint64_t s) {
    Rng r(s);
    return embed(random_complex(r, nN));
  };
  return t;
}

// ---- partial trace ----

PartialTraceReduction condexp_partial_trace(int dA, int dB, const MatrixC& rhoB) {
  if (dA < 1 || dB < 1) throw DimMismatch("condexp_partial_trace: dimensions must be positive");
  if (rhoB.rows() != dB || rhoB.cols() != dB) throw InvalidDensityMatrix("condexp_partial_trace: rhoB shape");
  if (!all_finite(rhoB) || !is_hermitian(rhoB, 1e-12)) throw InvalidDensityMatrix("condexp_partial_trace: rhoB not Hermitian");
  if (std::abs(rhoB.trace() - cplx(1.0)) > 1e-12) throw InvalidDensityMatrix("condexp_partial_trace: rhoB trace != 1");
  if (hermitian_min_eigenvalue(rhoB) < -1e-12) throw InvalidDensityMatrix("condexp_partial_trace: rhoB not positive");

  const int D = dA * dB;
  const MatrixC idA = MatrixC::Identity(dA, dA), idB = MatrixC::Identity(dB, dB);
  const MatrixC insertB = kron(idA, rhoB);
  PartialTraceReduction t;
  t.dA = dA;
  t.dB = dB;
  t.rhoB = rhoB;
  t.pi = superoperator([&](const MatrixC& x) { return partial_trace_b(x * insertB, dA, dB); }, D);
  t.embed = superoperator([&](const MatrixC& y) { return kron(y, idB); }, dA);
  t.P = t.embed * t.pi;
  t.pi_star = superoperator([&](const MatrixC& s) { return kron(s, rhoB); }, dA);
  t.embed_star = superoperator([&](const MatrixC& a) { return partial_trace_b(a, dA, dB); }, D);
  t.P_star = t.pi_star * t.embed_star;

  ProjectionOp& P = t.op;
  P.kind = AlgebraKind::Matrices;
  P.length = static_cast<std::size_t>(D) * D;
  P.matrix_dim = D;
  P.image = "A (x) 1 with A on the first factor";
  P.apply = dense_map(t.P);
  P.predual = dense_map(t.P_star);
  P.tau = vec(kron(idA / static_cast<double>(dA), rhoB));
  P.image_sampler = [dA, idB](std::uint64_t s) {
    Rng r(s);
    MatrixC y = random_gaussian(r, dA, dA);
    return vec(kron(y / operator_norm(y), idB));
  };
  return t;
}

// ---- verification ----

bool AxiomReport::all_passed() const {
  return std::all_of(axioms.begin(), axioms.end(), [](const AxiomResult& a) { return a.passed; });
}

const AxiomResult& AxiomReport::find(const std::string& name) const {
  for (const auto& a : axioms)
    if (a.name == name) return a;
  throw std::out_of_range("AxiomReport: no axiom named " + name);
}

AxiomReport verify_condexp_axioms(const ProjectionOp& P, int trials, std::uint64_t seed, double tol) {
  Rng r(seed);
  AxiomResult idem{"idempotence"}, pos{"positivity"}, unital{"unitality"}, contr{"contractivity"},
      module{"module"}, tracial{"tracial"};
  tracial.applicable = P.tau.has_value();

  const VectorC one = unit(P);
  unital.worst = (P.apply(one) - one).cwiseAbs().maxCoeff();

  for (int k = 0; k < trials; ++k) {
    const VectorC x = random_element(P, r);
    const VectorC px = P.apply(x);
    idem.worst = std::max(idem.worst, (P.apply(px) - px).cwiseAbs().maxCoeff());
    pos.worst = std::max(pos.worst, negativity(P, P.apply(random_positive(P, r, k))));
    contr.worst = std::max(contr.worst, norm(P, px) - norm(P, x));

    const VectorC b = image_element(P, r), b2 = image_element(P, r);
    const VectorC lhs = P.apply(product(P, product(P, b, x), b2));
    const VectorC rhs = product(P, product(P, b, px), b2);
    module.worst = std::max(module.worst, (lhs - rhs).cwiseAbs().maxCoeff());

    if (tracial.applicable) {
      const cplx a1 = pairing(P, *P.tau, product(P, x, b));
      const cplx a2 = pairing(P, *P.tau, product(P, px, b));
      tracial.worst = std::max(tracial.worst, std::abs(a1 - a2));
    }
  }
  AxiomReport rep;
  for (AxiomResult* a : {&idem, &pos, &unital, &contr, &module, &tracial}) {
    a->worst = std::max(0.0, a->worst);
    a->passed = !a->applicable || a->worst <= tol;
    rep.axioms.push_back(*a);
  }
  return rep;
}

StatePreservation check_state_preservation(const ProjectionOp& P, int trials, std::uint64_t seed, double tol) {
  Rng r(seed);
  StatePreservation s;
  const VectorC one = unit(P);
  for (int k = 0; k < trials; ++k) {
    const VectorC rho = random_state(P, r, k);
    const VectorC out = P.predual(rho);
    s.worst_negativity = std::max(s.worst_negativity, negativity(P, out));
    s.worst_norm_error = std::max(s.worst_norm_error, std::abs(pairing(P, out, one) - cplx(1.0)));
  }
  s.passed = s.worst_negativity <= tol && s.worst_norm_error <= tol;
  return s;
}

bool verify_state_preservation(const ProjectionOp& P, int trials, std::uint64_t seed) {
  return check_state_preservation(P, trials, seed).passed;
}

double predual_consistency(const ProjectionOp& P, int trials, std::uint64_t seed) {
  Rng r(seed);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const VectorC f = random_element(P, r);
    const VectorC rho = random_state(P, r, k);
    worst = std::max(worst, std::abs(pairing(P, rho, P.apply(f)) - pairing(P, P.predual(rho), f)));
  }
  return worst;
}

// ---- counterexamples ----

ProjectionOp rank_one_projection(const FiniteMeasureSpace& space, const VectorC& e) {
  if (static_cast<std::size_t>(e.size()) != space.size()) throw DimMismatch("rank_one_projection: length");
  const VectorC w = (space.weights / space.weights.sum()).cast<cplx>();
  if (std::abs((w.array() * e.array()).sum() - cplx(1.0)) > 1e-12)
    throw NotNormalized("rank_one_projection: <w, e> must equal 1");
  ProjectionOp P;
  P.kind = AlgebraKind::Functions;
  P.length = space.size();
  P.image = "span of a single function";
  P.tau = w;
  P.apply = [w, e](const VectorC& f) -> VectorC { return (w.array() * f.array()).sum() * e; };
  P.predual = [w, e](const VectorC& rho) -> VectorC { return (rho.array() * e.array()).sum() * w; };
  return P;
}

ProjectionOp signed_average_projection(const VectorR& wPrime) {
  if (wPrime.size() == 0) throw EmptySpace("signed_average_projection: no points");
  if (std::abs(wPrime.sum() - 1.0) > 1e-12) throw NotNormalized("signed_average_projection: weights must sum to 1");
  const VectorC w = wPrime.cast<cplx>();
  ProjectionOp P;
  P.kind = AlgebraKind::Functions;
  P.length = static_cast<std::size_t>(wPrime.size());
  P.image = "constants";
  P.apply = [w](const VectorC& f) -> VectorC {
    return VectorC::Constant(f.size(), (w.array() * f.array()).sum());
  };
  P.predual = [w](const VectorC& rho) -> VectorC { return rho.sum() * w; };
  return P;
}

// ---- torus ----

TorusDemo torus_demo(int n, int gridSize, int retainedPoints) {
  if (n < 0) throw std::invalid_argument("torus_demo: n must be nonnegative");
  if (gridSize < 64) throw std::invalid_argument("torus_demo: gridSize must be at least 64");
  if (retainedPoints < 1) throw std::invalid_argument("torus_demo: retainedPoints must be positive");
  const auto fn = [n](double s2) {
    const double d = s2 - 0.5;
    return -1.0 + 2.0 * std::exp(-static_cast<double>(n) * n * d * d / 2.0);
  };
  // Uniform product grid s_k = k / N on both circles, retained index slowest.
  const int N2 = gridSize, N1 = retainedPoints;
  VectorR w = VectorR::Constant(N1, 1.0 / N1);
  VectorR w2 = VectorR::Constant(N2, 1.0 / N2);
  auto spaceN = FiniteMeasureSpace::make(w);
  auto spaceR = FiniteMeasureSpace::make(w2);
  TensorReduction t = condexp_tensor(spaceN, spaceR, w2);

  VectorC f(static_cast<Eigen::Index>(N1) * N2);
  for (int a = 0; a < N1; ++a)
    for (int k = 0; k < N2; ++k) f(static_cast<Eigen::Index>(a) * N2 + k) = fn(static_cast<double>(k) / N2);
  const VectorC pf = t.P.apply(f);

  TorusDemo out;
  out.q_norm = (f - pf).cwiseAbs().maxCoeff();
  out.v_n = pf(0).real();
  if (n == 0) {
    out.reference_v_n = 1.0;
  } else {
    const double nn = static_cast<double>(n);
    out.reference_v_n = -1.0 + 2.0 * std::sqrt(2.0 * std::numbers::pi) / nn * std::erf(nn / (2.0 * std::sqrt(2.0)));
  }
  const double fMin = fn(0.0);
  out.reference_q_norm = std::max(1.0 - out.reference_v_n, out.reference_v_n - fMin);
  return out;
}

double torus_q_norm_demo(int n, int gridSize) { return torus_demo(n, gridSize).q_norm; }

}  // namespace nmzkit::projections
