#include "nmzkit/haar.hpp"

#include <cmath>
#include <numbers>

#include "nmzkit/errors.hpp"

namespace nmzkit::haar {

using algebra::TraceMonomial;
using algebra::TracePolynomial;

MatrixC swap_operator(int d) {
  MatrixC s = MatrixC::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(j * d + i, i * d + j) = 1.0;
  return s;
}

MatrixC contraction_operator(int d) {
  VectorC phi = VectorC::Zero(d * d);
  for (int i = 0; i < d; ++i) phi(i * d + i) = 1.0;
  return phi * phi.adjoint();
}

MomentTable::MomentTable(Group g) : group_(g) {
  const int d = group_dim(g);
  pairings_ = {MatrixC::Identity(d * d, d * d), swap_operator(d)};
  names_ = {"identity", "swap"};
  if (g == Group::SO3) {
    pairings_.push_back(contraction_operator(d));
    names_.push_back("contraction");
  }
  const auto n = static_cast<Eigen::Index>(pairings_.size());
  gram_.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) gram_(a, b) = (pairings_[a] * pairings_[b]).trace().real();
  weights_ = gram_.inverse();
}

const MomentTable& MomentTable::get(Group g) {
  static const MomentTable su2(Group::SU2);
  static const MomentTable so3(Group::SO3);
  return g == Group::SU2 ? su2 : so3;
}

MatrixC MomentTable::twirl(const MatrixC& t) const {
  const int d = group_dim(group_);
  if (t.rows() != d * d || t.cols() != d * d) throw DimMismatch("twirl: operator dimension");
  const auto n = static_cast<Eigen::Index>(pairings_.size());
  MatrixC out = MatrixC::Zero(d * d, d * d);
  for (Eigen::Index a = 0; a < n; ++a) {
    const cplx ta = (pairings_[a] * t).trace();
    for (Eigen::Index b = 0; b < n; ++b) out += weights_(a, b) * ta * pairings_[b];
  }
  return out;
}

MatrixC conj_moment1(const MatrixC& m, Group g) {
  const int d = group_dim(g);
  if (m.rows() != d || m.cols() != d) throw DimMismatch("conj_moment1: dimension");
  return (m.trace() / static_cast<double>(d)) * MatrixC::Identity(d, d);
}

cplx conj_moment2(const MatrixC& a, const MatrixC& m, const MatrixC& b, const MatrixC& n, Group g) {
  const int d = group_dim(g);
  for (const MatrixC* x : {&a, &m, &b, &n})
    if (x->rows() != d || x->cols() != d) throw DimMismatch("conj_moment2: dimension");
  return (kron(a, b) * MomentTable::get(g).twirl(kron(m, n))).trace();
}

TracePolynomial class_project(const TracePolynomial& p, Group g) {
  const int d = group_dim(g);
  if (p.dim() != d) throw DimMismatch("class_project: dimension");
  const MatrixC id = MatrixC::Identity(d, d);
  const TracePolynomial one = TracePolynomial::constant(d, 1.0);
  const TracePolynomial tr = TracePolynomial::trace(id);
  const TracePolynomial tr2 = tr * tr;
  // Tr(U^2) and Tr(U^T U) rewritten through the group relations.
  const TracePolynomial trSquare = g == Group::SU2 ? tr2 - 2.0 * one : tr2 - 2.0 * tr;
  const TracePolynomial trTransposeProduct = 3.0 * one;
  const MomentTable& table = MomentTable::get(g);
  const auto np = static_cast<Eigen::Index>(table.pairings().size());

  TracePolynomial out(d);
  for (const auto& [mono, c] : p.terms()) {
    switch (mono.degree()) {
      case 0: out.add_term(mono, c); break;
      case 1: out += tr * (c * mono.factors()[0].trace() / static_cast<double>(d)); break;
      case 2: {
        const MatrixC fk = kron(mono.factors()[0], mono.factors()[1]);
        const std::vector<const TracePolynomial*> invariants{&tr2, &trSquare, &trTransposeProduct};
        for (Eigen::Index a = 0; a < np; ++a) {
          cplx w = 0.0;
          for (Eigen::Index b = 0; b < np; ++b) w += table.weights()(a, b) * (fk * table.pairings()[b]).trace();
          out += *invariants[a] * (c * w);
        }
        break;
      }
      default:
        throw UnsupportedOrder("class_project: monomial with " + std::to_string(mono.degree()) +
                               " trace factors needs mc_class_project");
    }
  }
  return out;
}

McClassProjection mc_class_project(const TracePolynomial& p, Group g, std::size_t nSamples,
                                   const GroupSampler& sampler, const algebra::BasisRep& target,
                                   double residualSigmas) {
  if (nSamples < 1000) throw std::invalid_argument("mc_class_project: need at least 1000 samples");
  if (target.group() != g || sampler.group() != g || p.dim() != group_dim(g))
    throw DimMismatch("mc_class_project: group mismatch");
  const auto n = static_cast<Eigen::Index>(target.size());
  const auto nPts = std::max<Eigen::Index>(16, 8 * n);
  const GroupSampler pointSampler = sampler.substream(1);
  const GroupSampler conjSampler = sampler.substream(2);

  std::vector<MatrixC> pts;
  MatrixC s(nPts, n);
  for (Eigen::Index k = 0; k < nPts; ++k) {
    pts.push_back(pointSampler.sample(static_cast<std::uint64_t>(k)));
    s.row(k) = target.evaluate(pts.back()).transpose();
  }
  Eigen::BDCSVD<MatrixC> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (!(svd.singularValues()(n - 1) >= 1e-8 * svd.singularValues()(0)))
    throw RankDeficient("mc_class_project: target basis is not functionally independent");
  const MatrixC pinv = svd.solve(MatrixC::Identity(nPts, nPts));

  // Welford accumulators for the coefficients and the out-of-span residual.
  VectorC meanC = VectorC::Zero(n), meanR = VectorC::Zero(nPts);
  VectorR m2C = VectorR::Zero(n), m2R = VectorR::Zero(nPts);
  VectorC y(nPts);
  for (std::size_t i = 0; i < nSamples; ++i) {
    const MatrixC w = conjSampler.sample(i);
    const MatrixC wInv = w.adjoint();
    for (Eigen::Index k = 0; k < nPts; ++k) y(k) = p.eval(w * pts[k] * wInv);
    const VectorC c = pinv * y;
    const VectorC r = y - s * c;
    const double cnt = static_cast<double>(i + 1);
    const VectorC dC = c - meanC;
    meanC += dC / cnt;
    m2C += (dC.conjugate().cwiseProduct(c - meanC)).real();
    const VectorC dR = r - meanR;
    meanR += dR / cnt;
    m2R += (dR.conjugate().cwiseProduct(r - meanR)).real();
  }
  const double ns = static_cast<double>(nSamples);
  McClassProjection out;
  out.samples = nSamples;
  out.coefficients = meanC;
  out.std_error = (m2C / (ns - 1.0) / ns).cwiseMax(0.0).cwiseSqrt();
  const VectorR seR = (m2R / (ns - 1.0) / ns).cwiseMax(0.0).cwiseSqrt();
  const double scale = std::max(1.0, meanC.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < nPts; ++k) {
    const double dev = std::abs(meanR(k));
    if (dev <= 1e-10 * scale) continue;
    const double sig = seR(k) > 0 ? dev / seR(k) : INFINITY;
    out.max_residual_sigma = std::max(out.max_residual_sigma, sig);
    if (sig > residualSigmas)
      throw BasisNotClosed(0, "mc_class_project: averaged function leaves the target span (" +
                                  std::to_string(sig) + " sigma)");
  }
  out.projected = target.combine(meanC);
  return out;
}

McEstimate mc_mean(const std::function<cplx(const MatrixC&)>& f, const GroupSampler& sampler, std::size_t n,
                   std::uint64_t offset) {
  if (n < 2) throw std::invalid_argument("mc_mean: need at least two samples");
  cplx mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx v = f(sampler.sample(offset + i));
    const cplx d = v - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += std::real(std::conj(d) * (v - mean));
  }
  return {mean, std::sqrt(std::max(0.0, m2 / (n - 1.0) / static_cast<double>(n)))};
}

// ---- exact cubature ----

std::pair<std::vector<double>, std::vector<double>> gauss_legendre01(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre01: n >= 1");
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  MatrixR j = MatrixR::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<MatrixR> es(j);
  std::vector<double> x(n), w(n);
  for (int k = 0; k < n; ++k) {
    x[k] = 0.5 * (es.eigenvalues()(k) + 1.0);
    const double v = es.eigenvectors()(0, k);
    w[k] = v * v;  // weights on [-1,1] are 2 v^2; halved for [0,1]
  }
  return {x, w};
}

Cubature exact_cubature(Group g, int polyDegree) {
  if (polyDegree < 0) throw std::invalid_argument("exact_cubature: negative degree");
  // Group entries are linear (SU2) or quadratic (SO3) in the quaternion.
  const int qDeg = g == Group::SU2 ? polyDegree : 2 * polyDegree;
  const int nAngle = qDeg + 1;
  const auto [u, wu] = gauss_legendre01(qDeg / 2 + 1);
  Cubature c;
  const double twoPi = 2.0 * std::numbers::pi;
  for (std::size_t a = 0; a < u.size(); ++a)
    for (int i = 0; i < nAngle; ++i)
      for (int k = 0; k < nAngle; ++k) {
        const double x1 = twoPi * i / nAngle, x2 = twoPi * k / nAngle;
        const double c1 = std::sqrt(1.0 - u[a]), c2 = std::sqrt(u[a]);
        const std::array<double, 4> q{c1 * std::cos(x1), c1 * std::sin(x1), c2 * std::cos(x2), c2 * std::sin(x2)};
        c.points.push_back(g == Group::SU2 ? su2_from_quaternion(q) : so3_from_quaternion(q));
        c.weights.push_back(wu[a] / (nAngle * nAngle));
      }
  return c;
}

cplx integrate_exact(const std::function<cplx(const MatrixC&)>& f, Group g, int polyDegree) {
  const Cubature c = exact_cubature(g, polyDegree);
  cplx s = 0.0;
  for (std::size_t i = 0; i < c.points.size(); ++i) s += c.weights[i] * f(c.points[i]);
  return s;
}

cplx haar_integral(const TracePolynomial& p, Group g) {
  if (p.dim() != group_dim(g)) throw DimMismatch("haar_integral: dimension");
  return integrate_exact([&](const MatrixC& u) { return p.eval(u); }, g, static_cast<int>(p.max_degree()));
}

}  // namespace nmzkit::haar
