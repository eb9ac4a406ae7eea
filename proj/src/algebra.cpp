#include "nmzkit/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "nmzkit/errors.hpp"

namespace nmzkit::algebra {

namespace {

constexpr double kFactorTol = 1e-9;     // entrywise tolerance when ordering factors
constexpr double kLeadThreshold = 1e-8;  // first significant entry of a unit-norm factor
constexpr double kSnap = 1e-14;

double snap(double v, double eps) { return std::abs(v) < eps ? 0.0 : v; }

cplx snap(cplx c, double eps) { return {snap(c.real(), eps), snap(c.imag(), eps)}; }

int sign_compare(double a, double b) {
  if (a < b - kFactorTol) return -1;
  if (a > b + kFactorTol) return 1;
  return 0;
}

std::string format_matrix(const MatrixC& m) {
  std::ostringstream os;
  os << std::setprecision(4) << '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) os << "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      const cplx v = m(i, j);
      if (v.imag() == 0.0)
        os << v.real();
      else
        os << '(' << v.real() << (v.imag() < 0 ? "" : "+") << v.imag() << "i)";
    }
  }
  os << ']';
  return os.str();
}

}  // namespace

// ---- generators ----

Generator su2_generator(const MatrixC& h) {
  if (h.rows() != 2 || h.cols() != 2) throw DimMismatch("su2_generator: H must be 2x2");
  if (!is_hermitian(h, 1e-12)) throw NotHermitian("su2_generator: H is not Hermitian");
  const double det = h.determinant().real();
  return {-I_unit * h, std::sqrt(std::max(0.0, -det))};
}

MatrixC so3_skew(double x, double y, double z) {
  MatrixC m(3, 3);
  m << 0, -z, y, z, 0, -x, -y, x, 0;
  return m;
}

Generator so3_generator(double x, double y, double z) {
  return {so3_skew(x, y, z), std::sqrt(x * x + y * y + z * z)};
}

// ---- monomials ----

int compare_factor(const MatrixC& a, const MatrixC& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows() ? -1 : 1;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (int c = sign_compare(a.data()[k].real(), b.data()[k].real())) return c;
    if (int c = sign_compare(a.data()[k].imag(), b.data()[k].imag())) return c;
  }
  return 0;
}

int compare(const TraceMonomial& a, const TraceMonomial& b) {
  if (a.dim() != b.dim()) return a.dim() < b.dim() ? -1 : 1;
  if (a.degree() != b.degree()) return a.degree() < b.degree() ? -1 : 1;
  for (std::size_t k = 0; k < a.degree(); ++k)
    if (int c = compare_factor(a.factors()[k], b.factors()[k])) return c;
  return 0;
}

std::pair<TraceMonomial, cplx> TraceMonomial::make(int dim, std::vector<MatrixC> factors) {
  TraceMonomial m(dim);
  cplx scale = 1.0;
  for (auto& f : factors) {
    if (f.rows() != dim || f.cols() != dim) throw DimMismatch("trace factor has wrong dimension");
    const double n = f.norm();
    if (!(n > 1e-300)) return {TraceMonomial(dim), 0.0};
    f /= n;
    Eigen::Index lead = 0;
    while (lead < f.size() && std::abs(f.data()[lead]) <= kLeadThreshold) ++lead;
    const cplx phase = f.data()[lead] / std::abs(f.data()[lead]);
    f /= phase;
    for (Eigen::Index k = 0; k < f.size(); ++k) f.data()[k] = snap(f.data()[k], kSnap);
    scale *= n * phase;
  }
  std::sort(factors.begin(), factors.end(),
            [](const MatrixC& a, const MatrixC& b) { return compare_factor(a, b) < 0; });
  m.factors_ = std::move(factors);
  return {std::move(m), scale};
}

cplx TraceMonomial::eval(const MatrixC& u) const {
  if (u.rows() != dim_ || u.cols() != dim_) throw DimMismatch("eval: group element has wrong dimension");
  cplx v = 1.0;
  for (const auto& f : factors_) v *= f.cwiseProduct(u.transpose()).sum();
  return v;
}

TraceMonomial TraceMonomial::times(const TraceMonomial& other) const {
  if (other.dim_ != dim_) throw DimMismatch("monomial product across dimensions");
  TraceMonomial m(dim_);
  m.factors_ = factors_;
  m.factors_.insert(m.factors_.end(), other.factors_.begin(), other.factors_.end());
  std::sort(m.factors_.begin(), m.factors_.end(),
            [](const MatrixC& a, const MatrixC& b) { return compare_factor(a, b) < 0; });
  return m;
}

std::string TraceMonomial::describe() const {
  if (factors_.empty()) return "1";
  std::string s;
  for (const auto& f : factors_) s += "Tr(" + format_matrix(f) + " U)";
  return s;
}

// ---- polynomials ----

void TracePolynomial::require_dim(int d, const char* what) const {
  if (d != dim_) throw DimMismatch(std::string(what) + ": dimension mismatch");
}

TracePolynomial TracePolynomial::constant(int dim, cplx c) {
  TracePolynomial p(dim);
  p.add_term(TraceMonomial(dim), c);
  return p;
}

TracePolynomial TracePolynomial::trace(const MatrixC& f, cplx c) {
  return monomial(static_cast<int>(f.rows()), c, {f});
}

TracePolynomial TracePolynomial::monomial(int dim, cplx c, std::vector<MatrixC> factors) {
  TracePolynomial p(dim);
  auto [m, s] = TraceMonomial::make(dim, std::move(factors));
  p.add_term(m, c * s);
  return p;
}

std::size_t TracePolynomial::max_degree() const {
  std::size_t d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

void TracePolynomial::add_term(const TraceMonomial& m, cplx c) {
  require_dim(m.dim(), "add_term");
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                             [](const Term& t, const TraceMonomial& key) { return compare(t.first, key) < 0; });
  if (it != terms_.end() && compare(it->first, m) == 0) {
    it->second = snap(it->second + c, kPruneEps);
    if (std::abs(it->second) < kPruneEps) terms_.erase(it);
    return;
  }
  c = snap(c, kPruneEps);
  if (std::abs(c) < kPruneEps) return;
  terms_.insert(it, {m, c});
}

cplx TracePolynomial::eval(const MatrixC& u) const {
  if (u.rows() != dim_ || u.cols() != dim_) throw DimMismatch("eval: group element has wrong dimension");
  cplx v = 0.0;
  for (const auto& [m, c] : terms_) v += c * m.eval(u);
  return v;
}

cplx TracePolynomial::coefficient(const TraceMonomial& m) const {
  for (const auto& [k, c] : terms_)
    if (compare(k, m) == 0) return c;
  return 0.0;
}

TracePolynomial& TracePolynomial::operator+=(const TracePolynomial& o) {
  require_dim(o.dim_, "operator+");
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

TracePolynomial& TracePolynomial::operator-=(const TracePolynomial& o) {
  require_dim(o.dim_, "operator-");
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

TracePolynomial& TracePolynomial::operator*=(cplx s) {
  std::vector<Term> old;
  old.swap(terms_);
  for (const auto& [m, c] : old) add_term(m, c * s);
  return *this;
}

TracePolynomial operator*(const TracePolynomial& a, const TracePolynomial& b) {
  if (a.dim() != b.dim()) throw DimMismatch("operator*: dimension mismatch");
  TracePolynomial out(a.dim());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) out.add_term(ma.times(mb), ca * cb);
  return out;
}

std::string TracePolynomial::describe() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os << std::setprecision(6);
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << '(' << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i)*" << m.describe();
  }
  return os.str();
}

bool structurally_equal(const TracePolynomial& a, const TracePolynomial& b, double tol) {
  if (a.dim() != b.dim()) return false;
  TracePolynomial d = a - b;
  for (const auto& [m, c] : d.terms())
    if (std::abs(c) > tol) return false;
  return true;
}

cplx eval(const TracePolynomial& p, const MatrixC& u) { return p.eval(u); }

TracePolynomial liouvillian_apply(const TracePolynomial& p, const MatrixC& a) {
  if (a.rows() != p.dim() || a.cols() != p.dim()) throw DimMismatch("liouvillian_apply: generator dimension");
  TracePolynomial out(p.dim());
  for (const auto& [m, c] : p.terms()) {
    for (std::size_t j = 0; j < m.degree(); ++j) {
      std::vector<MatrixC> f = m.factors();
      f[j] = (f[j] * a).eval();
      auto [mono, s] = TraceMonomial::make(p.dim(), std::move(f));
      out.add_term(mono, c * s);
    }
  }
  return out;
}

TracePolynomial liouvillian_power(const TracePolynomial& p, const MatrixC& a, int k) {
  TracePolynomial q = p;
  for (int i = 0; i < k; ++i) q = liouvillian_apply(q, a);
  return q;
}

cplx flow_derivative(const TracePolynomial& p, const MatrixC& a, const MatrixC& u, double h, int order) {
  static const std::vector<double> c2{0.5};
  static const std::vector<double> c4{2.0 / 3, -1.0 / 12};
  static const std::vector<double> c6{3.0 / 4, -3.0 / 20, 1.0 / 60};
  static const std::vector<double> c8{4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  const std::vector<double>* c = nullptr;
  switch (order) {
    case 2: c = &c2; break;
    case 4: c = &c4; break;
    case 6: c = &c6; break;
    case 8: c = &c8; break;
    default: throw std::invalid_argument("flow_derivative: order must be 2, 4, 6 or 8");
  }
  cplx d = 0.0;
  for (std::size_t k = 0; k < c->size(); ++k) {
    const double s = static_cast<double>(k + 1) * h;
    d += (*c)[k] * (p.eval(expm(s * a) * u) - p.eval(expm(-s * a) * u));
  }
  return d / h;
}

// ---- bases ----

std::shared_ptr<const BasisRep> BasisRep::build(std::vector<TracePolynomial> elements,
                                                std::vector<std::string> labels, haar::Group group,
                                                std::uint64_t seed, std::size_t nSamples) {
  if (elements.empty()) throw std::invalid_argument("BasisRep: empty basis");
  const int d = elements.front().dim();
  if (d != haar::group_dim(group)) throw DimMismatch("BasisRep: element dimension does not match group");
  for (const auto& e : elements)
    if (e.dim() != d) throw DimMismatch("BasisRep: elements of mixed dimension");
  if (labels.empty())
    for (std::size_t i = 0; i < elements.size(); ++i) labels.push_back("e" + std::to_string(i));
  if (labels.size() != elements.size()) throw std::invalid_argument("BasisRep: label count mismatch");

  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i].is_zero()) throw LinearlyDependent("BasisRep: element " + std::to_string(i) + " is zero");
    for (std::size_t j = 0; j < i; ++j)
      if (structurally_equal(elements[i], elements[j]))
        throw LinearlyDependent("BasisRep: elements " + std::to_string(j) + " and " + std::to_string(i) +
                                " coincide");
  }

  auto b = std::shared_ptr<BasisRep>(new BasisRep());
  b->group_ = group;
  b->labels_ = std::move(labels);

  for (const auto& e : elements)
    for (const auto& [m, c] : e.terms()) {
      auto it = std::lower_bound(b->monomials_.begin(), b->monomials_.end(), m);
      if (it == b->monomials_.end() || !(*it == m)) b->monomials_.insert(it, m);
    }
  const auto nm = static_cast<Eigen::Index>(b->monomials_.size());
  const auto n = static_cast<Eigen::Index>(elements.size());
  b->coeffs_ = MatrixC::Zero(nm, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (const auto& [m, c] : elements[j].terms()) {
      auto it = std::lower_bound(b->monomials_.begin(), b->monomials_.end(), m);
      b->coeffs_(it - b->monomials_.begin(), j) = c;
    }
  b->qr_.compute(b->coeffs_);
  b->qr_.setThreshold(1e-10);
  if (b->qr_.rank() != n) throw LinearlyDependent("BasisRep: elements are linearly dependent");
  b->elements_ = std::move(elements);

  if (nSamples == 0) nSamples = std::max<std::size_t>(32, 8 * b->elements_.size());
  haar::GroupSampler sampler(group, seed);
  b->samples_.resize(static_cast<Eigen::Index>(nSamples), n);
  for (std::size_t k = 0; k < nSamples; ++k) {
    b->points_.push_back(sampler.sample(k));
    b->samples_.row(static_cast<Eigen::Index>(k)) = b->evaluate(b->points_.back()).transpose();
  }
  Eigen::JacobiSVD<MatrixC> svd(b->samples_);
  const auto& s = svd.singularValues();
  b->functionalRank_ = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) >= 1e-8 * s(0)) ++b->functionalRank_;
  b->condition_ = s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : INFINITY;
  return b;
}

VectorC BasisRep::evaluate(const MatrixC& u) const {
  VectorC v(static_cast<Eigen::Index>(size()));
  for (std::size_t j = 0; j < size(); ++j) v(static_cast<Eigen::Index>(j)) = elements_[j].eval(u);
  return v;
}

VectorC BasisRep::coordinates(const TracePolynomial& p, std::size_t elementForError) const {
  if (p.dim() != dim()) throw DimMismatch("coordinates: dimension mismatch");
  VectorC rhs = VectorC::Zero(static_cast<Eigen::Index>(monomials_.size()));
  for (const auto& [m, c] : p.terms()) {
    auto it = std::lower_bound(monomials_.begin(), monomials_.end(), m);
    if (it == monomials_.end() || !(*it == m))
      throw BasisNotClosed(elementForError, "unmatched monomial " + m.describe());
    rhs(it - monomials_.begin()) = c;
  }
  VectorC x = qr_.solve(rhs);
  const double res = (coeffs_ * x - rhs).cwiseAbs().maxCoeff();
  if (res > 1e-9 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
    throw BasisNotClosed(elementForError, "monomial residual " + std::to_string(res));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = snap(x(i), kPruneEps);
  return x;
}

TracePolynomial BasisRep::combine(const VectorC& coords) const {
  if (coords.size() != static_cast<Eigen::Index>(size())) throw DimMismatch("combine: coordinate length");
  TracePolynomial p(dim());
  for (std::size_t j = 0; j < size(); ++j) p += elements_[j] * coords(static_cast<Eigen::Index>(j));
  return p;
}

// ---- operator representations ----

OperatorRep OperatorRep::identity(BasisPtr b) {
  const auto n = static_cast<Eigen::Index>(b->size());
  return {std::move(b), MatrixC::Identity(n, n)};
}

OperatorRep OperatorRep::zero(BasisPtr b) {
  const auto n = static_cast<Eigen::Index>(b->size());
  return {std::move(b), MatrixC::Zero(n, n)};
}

OperatorRep OperatorRep::from_row_convention(BasisPtr b, const MatrixC& rowMatrix) {
  if (rowMatrix.rows() != static_cast<Eigen::Index>(b->size()) || rowMatrix.cols() != rowMatrix.rows())
    throw DimMismatch("from_row_convention: size mismatch");
  return {std::move(b), rowMatrix.transpose()};
}

OperatorRep operator*(const OperatorRep& a, const OperatorRep& b) {
  if (a.basis != b.basis) throw BasisMismatch("operator composition over different bases");
  return {a.basis, a.matrix * b.matrix};
}

OperatorRep matrix_rep_exact(const PolyMap& op, BasisPtr basis) {
  const auto n = static_cast<Eigen::Index>(basis->size());
  MatrixC m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    m.col(j) = basis->coordinates(op(basis->element(static_cast<std::size_t>(j))), static_cast<std::size_t>(j));
  return {std::move(basis), m};
}

CollocationReport matrix_rep_collocation(const PointEvaluator& op, BasisPtr basis,
                                         const haar::GroupSampler& sampler, std::size_t nSamples, double tol,
                                         const std::vector<std::size_t>& codomain) {
  const std::size_t n = basis->size();
  if (nSamples < 4 * n) throw std::invalid_argument("matrix_rep_collocation: need at least 4 samples per element");
  if (sampler.group() != basis->group()) throw DimMismatch("matrix_rep_collocation: sampler group");
  std::vector<std::size_t> cod = codomain;
  if (cod.empty())
    for (std::size_t j = 0; j < n; ++j) cod.push_back(j);
  for (auto c : cod)
    if (c >= n) throw std::out_of_range("matrix_rep_collocation: codomain index");

  const auto N = static_cast<Eigen::Index>(nSamples);
  const auto m = static_cast<Eigen::Index>(cod.size());
  MatrixC s(N, m), y(N, static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < N; ++k) {
    const MatrixC u = sampler.sample(static_cast<std::uint64_t>(k));
    for (Eigen::Index c = 0; c < m; ++c) s(k, c) = basis->element(cod[c]).eval(u);
    for (std::size_t j = 0; j < n; ++j) y(k, static_cast<Eigen::Index>(j)) = op(j, u);
  }
  Eigen::BDCSVD<MatrixC> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(m - 1) >= 1e-8 * sv(0)))
    throw RankDeficient("matrix_rep_collocation: sample matrix loses rank (sigma_min/sigma_max = " +
                        std::to_string(sv(m - 1) / sv(0)) + ")");
  const MatrixC coef = svd.solve(y);
  const MatrixC resid = s * coef - y;
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());

  CollocationReport out{OperatorRep::zero(basis), 0.0};
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
    const double r = resid.col(j).cwiseAbs().maxCoeff() / scale;
    out.max_residual = std::max(out.max_residual, r);
    if (r > tol)
      throw BasisNotClosed(static_cast<std::size_t>(j), "collocation residual " + std::to_string(r));
  }
  for (Eigen::Index c = 0; c < m; ++c) out.rep.matrix.row(static_cast<Eigen::Index>(cod[c])) = coef.row(c);
  return out;
}

}  // namespace nmzkit::algebra
