#include "nanofock/fock.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include <unsupported/Eigen/KroneckerProduct>

#include "nanofock/error.hpp"

namespace nanofock {

FockSpace::FockSpace(std::size_t dim, std::string label) : dim_(dim), label_(std::move(label)) {
  if (dim_ < 2) throw ArgumentError("FockSpace '" + label_ + "': dim must be >= 2");
}

CompositeSpace::CompositeSpace(std::vector<FockSpace> factors) : factors_(std::move(factors)), total_dim_(1) {
  if (factors_.empty()) throw ArgumentError("CompositeSpace needs at least one factor");
  std::set<std::string> labels;
  for (const auto& f : factors_) {
    if (!labels.insert(f.label()).second)
      throw ArgumentError("CompositeSpace: duplicate factor label '" + f.label() + "'");
    total_dim_ *= f.dim();
  }
}

CompositeSpace::CompositeSpace(FockSpace single) : CompositeSpace(std::vector<FockSpace>{std::move(single)}) {}

const FockSpace& CompositeSpace::factor(std::size_t slot) const {
  if (slot >= factors_.size())
    throw ArgumentError("slot " + std::to_string(slot) + " out of range for " +
                        std::to_string(factors_.size()) + "-factor space");
  return factors_[slot];
}

std::size_t CompositeSpace::slot_of(const std::string& label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].label() == label) return i;
  throw ArgumentError("no factor labelled '" + label + "'");
}

std::vector<std::size_t> CompositeSpace::unflatten(std::size_t index) const {
  std::vector<std::size_t> occ(factors_.size());
  for (std::size_t k = factors_.size(); k-- > 0;) {
    occ[k] = index % factors_[k].dim();
    index /= factors_[k].dim();
  }
  return occ;
}

void prune(SparseMatrix& m) {
  m.prune([](long, long, const Complex& v) { return std::abs(v) >= kStructuralZero; });
  m.makeCompressed();
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Eigen::Triplet<Complex, long>> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (long ka = 0; ka < a.outerSize(); ++ka)
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
      for (long kb = 0; kb < b.outerSize(); ++kb)
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
          trips.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                             ia.value() * ib.value());
  out.setFromTriplets(trips.begin(), trips.end());
  prune(out);
  return out;
}

FockOperator::FockOperator(CompositeSpace space, SparseMatrix matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  const auto d = static_cast<long>(space_.total_dim());
  if (matrix_.rows() != d || matrix_.cols() != d)
    throw ArgumentError("FockOperator: matrix is " + std::to_string(matrix_.rows()) + "x" +
                        std::to_string(matrix_.cols()) + ", space has dim " + std::to_string(d));
  prune(matrix_);
}

FockOperator FockOperator::dagger() const {
  return FockOperator(space_, SparseMatrix(matrix_.adjoint()));
}

bool FockOperator::is_hermitian(double tol) const {
  const double scale = std::max(matrix_.norm(), 1.0);
  return SparseMatrix(matrix_ - SparseMatrix(matrix_.adjoint())).norm() <= tol * scale;
}

namespace {
void require_same_space(const FockOperator& a, const FockOperator& b, const char* what) {
  if (!(a.space() == b.space())) throw ArgumentError(std::string(what) + ": operators act on different spaces");
}
}  // namespace

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
  require_same_space(a, b, "operator*");
  return FockOperator(a.space_, SparseMatrix(a.matrix_ * b.matrix_));
}

FockOperator operator+(const FockOperator& a, const FockOperator& b) {
  require_same_space(a, b, "operator+");
  return FockOperator(a.space_, SparseMatrix(a.matrix_ + b.matrix_));
}

FockOperator operator-(const FockOperator& a, const FockOperator& b) {
  require_same_space(a, b, "operator-");
  return FockOperator(a.space_, SparseMatrix(a.matrix_ - b.matrix_));
}

FockOperator operator*(Complex s, const FockOperator& a) {
  return FockOperator(a.space_, SparseMatrix(s * a.matrix_));
}

FockOperator commutator(const FockOperator& a, const FockOperator& b) { return a * b - b * a; }

FockOperator identity(const CompositeSpace& space) {
  SparseMatrix m(static_cast<long>(space.total_dim()), static_cast<long>(space.total_dim()));
  m.setIdentity();
  return FockOperator(space, std::move(m));
}

FockOperator annihilation(const FockSpace& space) {
  const auto d = static_cast<long>(space.dim());
  SparseMatrix m(d, d);
  m.reserve(Eigen::VectorXi::Constant(d, 1));
  for (long n = 1; n < d; ++n) m.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
  m.makeCompressed();
  return FockOperator(space, std::move(m));
}

FockOperator creation(const FockSpace& space) { return annihilation(space).dagger(); }

FockOperator number(const FockSpace& space) { return creation(space) * annihilation(space); }

FockOperator fock_transition(const FockSpace& space, std::size_t n) {
  if (n < 1 || n >= space.dim())
    throw ArgumentError("fock_transition: n=" + std::to_string(n) + " outside [1, " +
                        std::to_string(space.dim() - 1) + "]");
  const auto d = static_cast<long>(space.dim());
  SparseMatrix m(d, d);
  m.insert(static_cast<long>(n) - 1, static_cast<long>(n)) = std::sqrt(static_cast<double>(n));
  m.makeCompressed();
  return FockOperator(space, std::move(m));
}

FockOperator projector(const FockSpace& space, std::size_t n) {
  if (n >= space.dim()) throw ArgumentError("projector: level out of range");
  const auto d = static_cast<long>(space.dim());
  SparseMatrix m(d, d);
  m.insert(static_cast<long>(n), static_cast<long>(n)) = 1.0;
  m.makeCompressed();
  return FockOperator(space, std::move(m));
}

FockOperator lift(const FockOperator& op, const CompositeSpace& composite, std::size_t slot) {
  const FockSpace& target = composite.factor(slot);
  if (op.space().size() != 1 || !(op.space().factor(0) == target))
    throw ArgumentError("lift: operator space does not match factor '" + target.label() + "'");
  std::size_t before = 1, after = 1;
  for (std::size_t k = 0; k < slot; ++k) before *= composite.factor(k).dim();
  for (std::size_t k = slot + 1; k < composite.size(); ++k) after *= composite.factor(k).dim();
  SparseMatrix id_before(static_cast<long>(before), static_cast<long>(before));
  SparseMatrix id_after(static_cast<long>(after), static_cast<long>(after));
  id_before.setIdentity();
  id_after.setIdentity();
  return FockOperator(composite, kron(kron(id_before, op.matrix()), id_after));
}

DensityMatrix::DensityMatrix(CompositeSpace space, DenseMatrix matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  const auto d = static_cast<long>(space_.total_dim());
  if (matrix_.rows() != d || matrix_.cols() != d) throw ArgumentError("DensityMatrix: dimension mismatch");
  const double norm = matrix_.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ArgumentError("DensityMatrix: zero or non-finite matrix");
  if ((matrix_ - matrix_.adjoint()).norm() > 1e-12 * norm) throw ArgumentError("DensityMatrix: not Hermitian");
  const Complex tr = matrix_.trace();
  if (std::abs(tr - 1.0) > 1e-10)
    throw ArgumentError("DensityMatrix: trace " + std::to_string(tr.real()) + " differs from 1");
}

DensityMatrix DensityMatrix::from_populations(const FockSpace& space, std::span<const double> populations) {
  if (populations.size() > space.dim()) throw ArgumentError("from_populations: more populations than levels");
  DenseMatrix m = DenseMatrix::Zero(static_cast<long>(space.dim()), static_cast<long>(space.dim()));
  for (std::size_t n = 0; n < populations.size(); ++n) m(static_cast<long>(n), static_cast<long>(n)) = populations[n];
  return DensityMatrix(space, std::move(m));
}

DensityMatrix DensityMatrix::fock(const FockSpace& space, std::size_t n) {
  if (n >= space.dim()) throw ArgumentError("fock: level out of range");
  DenseMatrix m = DenseMatrix::Zero(static_cast<long>(space.dim()), static_cast<long>(space.dim()));
  m(static_cast<long>(n), static_cast<long>(n)) = 1.0;
  return DensityMatrix(space, std::move(m));
}

DensityMatrix DensityMatrix::thermal(const FockSpace& space, double mean_occupation) {
  if (mean_occupation < 0.0) throw ArgumentError("thermal: negative occupation");
  std::vector<double> p(space.dim());
  const double q = mean_occupation / (mean_occupation + 1.0);
  double w = 1.0, total = 0.0;
  for (auto& x : p) {
    x = w;
    total += w;
    w *= q;
  }
  for (auto& x : p) x /= total;
  return from_populations(space, p);
}

DensityMatrix DensityMatrix::pure(CompositeSpace space, const ComplexVector& psi) {
  const double nrm = psi.norm();
  if (!(nrm > 0.0)) throw ArgumentError("pure: zero state vector");
  const ComplexVector v = psi / nrm;
  return DensityMatrix(std::move(space), v * v.adjoint());
}

std::vector<double> DensityMatrix::populations() const {
  std::vector<double> p(dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = matrix_(static_cast<long>(i), static_cast<long>(i)).real();
  return p;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(matrix_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  std::vector<FockSpace> factors(a.space().factors().begin(), a.space().factors().end());
  factors.insert(factors.end(), b.space().factors().begin(), b.space().factors().end());
  DenseMatrix m = Eigen::kroneckerProduct(a.matrix(), b.matrix());
  return DensityMatrix(CompositeSpace(std::move(factors)), std::move(m));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t keep) {
  const CompositeSpace& space = rho.space();
  const FockSpace& kept = space.factor(keep);
  // index = (outer * d_keep + k) * inner + rest, with inner the product of later dims.
  std::size_t inner = 1;
  for (std::size_t s = keep + 1; s < space.size(); ++s) inner *= space.factor(s).dim();
  const std::size_t dk = kept.dim();
  const std::size_t outer = space.total_dim() / (dk * inner);
  DenseMatrix out = DenseMatrix::Zero(static_cast<long>(dk), static_cast<long>(dk));
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t r = 0; r < inner; ++r)
      for (std::size_t i = 0; i < dk; ++i)
        for (std::size_t j = 0; j < dk; ++j) {
          const auto row = static_cast<long>((o * dk + i) * inner + r);
          const auto col = static_cast<long>((o * dk + j) * inner + r);
          out(static_cast<long>(i), static_cast<long>(j)) += rho.matrix()(row, col);
        }
  // Summation can leave rounding-level antihermitian parts.
  out = 0.5 * (out + out.adjoint()).eval();
  out /= out.trace();
  return DensityMatrix(CompositeSpace(kept), std::move(out));
}

Complex expectation(const DensityMatrix& rho, const FockOperator& op) {
  if (!(rho.space() == op.space())) throw ArgumentError("expectation: state and operator spaces differ");
  // Tr(rho A) = sum_{ij} rho_ji A_ij over the nonzeros of A.
  Complex total = 0.0;
  const SparseMatrix& a = op.matrix();
  for (long k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) total += rho.matrix()(it.col(), it.row()) * it.value();
  return total;
}

void write_coordinate_list(std::ostream& os, const SparseMatrix& m) {
  const auto old_precision = os.precision(17);
  os << "# nanofock coo v1 rows=" << m.rows() << " cols=" << m.cols() << "\n";
  os << "row,col,re,im\n";
  for (long k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      os << it.row() << ',' << it.col() << ',' << it.value().real() << ',' << it.value().imag() << '\n';
  os.precision(old_precision);
}

}  // namespace nanofock
