#pragma once

// Truncated Fock-space operator algebra.
//
// Basis ordering on a composite space is lexicographic with the first factor
// varying slowest: the index of |n_0, n_1, ..., n_k> is
// ((n_0 * d_1 + n_1) * d_2 + n_2) ... which matches kron(A_0, A_1, ..., A_k).

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace nanofock {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, long>;
using DenseMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Entries with magnitude below this are dropped from sparse storage.
inline constexpr double kStructuralZero = 1e-15;

class FockSpace {
 public:
  FockSpace(std::size_t dim, std::string label);

  std::size_t dim() const noexcept { return dim_; }
  const std::string& label() const noexcept { return label_; }

  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  std::size_t dim_;
  std::string label_;
};

class CompositeSpace {
 public:
  CompositeSpace(std::vector<FockSpace> factors);
  CompositeSpace(FockSpace single);  // NOLINT: a single mode is a one-factor composite

  std::span<const FockSpace> factors() const noexcept { return factors_; }
  const FockSpace& factor(std::size_t slot) const;
  std::size_t size() const noexcept { return factors_.size(); }
  std::size_t total_dim() const noexcept { return total_dim_; }
  /// Slot of the factor carrying `label`; throws if absent.
  std::size_t slot_of(const std::string& label) const;
  /// Occupation tuple of a flat basis index.
  std::vector<std::size_t> unflatten(std::size_t index) const;

  friend bool operator==(const CompositeSpace& a, const CompositeSpace& b) {
    return a.factors_ == b.factors_;
  }

 private:
  std::vector<FockSpace> factors_;
  std::size_t total_dim_;
};

/// Sparse complex operator tagged with the space it acts on. Immutable.
class FockOperator {
 public:
  FockOperator(CompositeSpace space, SparseMatrix matrix);

  const CompositeSpace& space() const noexcept { return space_; }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  std::size_t dim() const noexcept { return space_.total_dim(); }

  FockOperator dagger() const;
  DenseMatrix to_dense() const { return DenseMatrix(matrix_); }
  bool is_hermitian(double tol = 1e-12) const;

  friend FockOperator operator*(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator+(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator-(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator*(Complex s, const FockOperator& a);
  friend FockOperator operator*(const FockOperator& a, Complex s) { return s * a; }

 private:
  CompositeSpace space_;
  SparseMatrix matrix_;
};

FockOperator commutator(const FockOperator& a, const FockOperator& b);

FockOperator identity(const CompositeSpace& space);
/// Ladder operator b with <n-1|b|n> = sqrt(n).
FockOperator annihilation(const FockSpace& space);
FockOperator creation(const FockSpace& space);
FockOperator number(const FockSpace& space);
/// Single-transition operator sqrt(n)|n-1><n|, 1 <= n <= dim-1.
FockOperator fock_transition(const FockSpace& space, std::size_t n);
/// Projector |n><n|.
FockOperator projector(const FockSpace& space, std::size_t n);

/// Embeds a single-factor operator into `composite` at `slot`.
FockOperator lift(const FockOperator& op, const CompositeSpace& composite, std::size_t slot);

/// Density matrix, Hermitian with unit trace. Immutable.
class DensityMatrix {
 public:
  /// Validates hermiticity (relative Frobenius 1e-12) and trace (1e-10).
  DensityMatrix(CompositeSpace space, DenseMatrix matrix);

  static DensityMatrix from_populations(const FockSpace& space, std::span<const double> populations);
  static DensityMatrix fock(const FockSpace& space, std::size_t n);
  static DensityMatrix thermal(const FockSpace& space, double mean_occupation);
  /// Pure state from a (not necessarily normalized) state vector.
  static DensityMatrix pure(CompositeSpace space, const ComplexVector& psi);

  const CompositeSpace& space() const noexcept { return space_; }
  const DenseMatrix& matrix() const noexcept { return matrix_; }
  std::size_t dim() const noexcept { return space_.total_dim(); }

  std::vector<double> populations() const;
  double min_eigenvalue() const;

 private:
  CompositeSpace space_;
  DenseMatrix matrix_;
};

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);
DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t keep);
Complex expectation(const DensityMatrix& rho, const FockOperator& op);

/// Kronecker product of sparse matrices, a varying slowest.
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);
/// Drops entries with |x| < kStructuralZero.
void prune(SparseMatrix& m);

/// Writes "row,col,re,im" lines, one per stored nonzero.
void write_coordinate_list(std::ostream& os, const SparseMatrix& m);

}  // namespace nanofock
