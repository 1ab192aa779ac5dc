#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nanofock/error.hpp"
#include "nanofock/fock.hpp"

using namespace nanofock;

namespace {

DenseMatrix random_density(std::size_t d, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  DenseMatrix a(static_cast<long>(d), static_cast<long>(d));
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j) a(i, j) = Complex(n(rng), n(rng));
  DenseMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

double max_abs(const DenseMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("ladder operators have sqrt(n) entries") {
  const FockSpace s(3, "m");
  const DenseMatrix b = annihilation(s).to_dense();
  CHECK(b.cwiseAbs().sum() == doctest::Approx(1.0 + std::sqrt(2.0)));
  CHECK(std::abs(b(0, 1) - 1.0) == 0.0);
  CHECK(std::abs(b(1, 2) - std::sqrt(2.0)) < 1e-15);
  CHECK(annihilation(s).matrix().nonZeros() == 2);
  CHECK(annihilation(FockSpace(2, "q")).matrix().nonZeros() == 1);

  const DenseMatrix num = number(FockSpace(5, "m")).to_dense();
  for (long n = 0; n < 5; ++n) CHECK(num(n, n).real() == doctest::Approx(static_cast<double>(n)));
  CHECK(max_abs(creation(s).to_dense() - annihilation(s).dagger().to_dense()) == 0.0);
}

TEST_CASE("dagger is an involution") {
  const FockSpace s(6, "m");
  const FockOperator a = annihilation(s) + Complex(0.3, 0.7) * number(s);
  CHECK(max_abs(a.dagger().dagger().to_dense() - a.to_dense()) == 0.0);
}

TEST_CASE("commutator of b and b^dag is the identity below the top level") {
  const std::size_t d = 7;
  const FockSpace s(d, "m");
  const DenseMatrix c = commutator(annihilation(s), creation(s)).to_dense();
  for (long i = 0; i < static_cast<long>(d); ++i)
    for (long j = 0; j < static_cast<long>(d); ++j) {
      if (i == j && i == static_cast<long>(d) - 1) {
        CHECK(c(i, j).real() == doctest::Approx(1.0 - static_cast<double>(d)));
        continue;
      }
      CHECK(std::abs(c(i, j) - (i == j ? 1.0 : 0.0)) < 1e-14);
    }
}

TEST_CASE("single transitions sum to the ladder operator") {
  const FockSpace s(4, "m");
  const DenseMatrix t1 = fock_transition(s, 1).to_dense();
  CHECK(std::abs(t1(0, 1) - 1.0) < 1e-15);
  const DenseMatrix t3 = fock_transition(s, 3).to_dense();
  CHECK(std::abs(t3(2, 3) - std::sqrt(3.0)) < 1e-15);
  CHECK(fock_transition(s, 3).matrix().nonZeros() == 1);
  FockOperator sum = fock_transition(s, 1);
  for (std::size_t n = 2; n < 4; ++n) sum = sum + fock_transition(s, n);
  CHECK(max_abs(sum.to_dense() - annihilation(s).to_dense()) < 1e-15);
  CHECK_THROWS_AS(fock_transition(s, 0), ArgumentError);
  CHECK_THROWS_AS(fock_transition(s, 4), ArgumentError);
}

TEST_CASE("composite spaces") {
  CHECK_THROWS_AS(FockSpace(1, "x"), ArgumentError);
  CHECK_THROWS_AS(CompositeSpace({FockSpace(2, "a"), FockSpace(3, "a")}), ArgumentError);
  const CompositeSpace cs({FockSpace(2, "a"), FockSpace(3, "b"), FockSpace(2, "c")});
  CHECK(cs.total_dim() == 12);
  CHECK(cs.slot_of("b") == 1);
  // |1, 2, 0> sits at (1 * 3 + 2) * 2 + 0.
  CHECK(cs.unflatten(10) == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("lift uses lexicographic ordering and commutes across slots") {
  const FockSpace a(2, "a"), b(2, "b");
  const CompositeSpace cs({a, b});
  const DenseMatrix n0 = lift(number(a), cs, 0).to_dense();
  CHECK(n0.diagonal().real().isApprox(Eigen::Vector4d(0, 0, 1, 1)));
  CHECK(n0.isDiagonal());

  const FockSpace c(3, "c");
  const CompositeSpace cs2({a, c});
  const FockOperator x = lift(annihilation(a), cs2, 0);
  const FockOperator y = lift(creation(c) + annihilation(c), cs2, 1);
  CHECK(commutator(x, y).matrix().norm() < 1e-14);
  CHECK(max_abs(lift(identity(CompositeSpace(c)), cs2, 1).to_dense() - identity(cs2).to_dense()) == 0.0);

  const FockOperator p = annihilation(c), q = creation(c) + number(c);
  CHECK(max_abs(lift(p * q, cs2, 1).to_dense() - (lift(p, cs2, 1) * lift(q, cs2, 1)).to_dense()) < 1e-12);
  CHECK_THROWS_AS(lift(annihilation(a), cs2, 2), ArgumentError);
  CHECK_THROWS_AS(lift(annihilation(a), cs2, 1), ArgumentError);
}

TEST_CASE("density matrix invariants") {
  const FockSpace s(3, "m");
  DenseMatrix bad = DenseMatrix::Identity(3, 3);
  CHECK_THROWS_AS(DensityMatrix(CompositeSpace(s), bad), ArgumentError);
  bad /= 3.0;
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix(CompositeSpace(s), bad), ArgumentError);
  const auto th = DensityMatrix::thermal(FockSpace(40, "m"), 1.0);
  const auto p = th.populations();
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(p[3] == doctest::Approx(1.0 / 16.0).epsilon(1e-9));
}

TEST_CASE("partial trace inverts the tensor product") {
  std::mt19937 rng(7);
  const FockSpace a(2, "a"), b(3, "b");
  const DensityMatrix ra(CompositeSpace(a), random_density(2, rng));
  const DensityMatrix rb(CompositeSpace(b), random_density(3, rng));
  const DensityMatrix prod = tensor_product(ra, rb);
  CHECK(max_abs(partial_trace(prod, 0).matrix() - ra.matrix()) < 1e-12);
  CHECK(max_abs(partial_trace(prod, 1).matrix() - rb.matrix()) < 1e-12);

  const DensityMatrix mixed(CompositeSpace({a, b}), DenseMatrix::Identity(6, 6) / 6.0);
  CHECK(max_abs(partial_trace(mixed, 1).matrix() - DenseMatrix::Identity(3, 3) / 3.0) < 1e-15);
  CHECK_THROWS_AS(partial_trace(mixed, 2), ArgumentError);

  // Independent oracle: explicit index sums over the traced factor.
  const DensityMatrix ent(CompositeSpace({a, b}), random_density(6, rng));
  DenseMatrix keep1 = DenseMatrix::Zero(3, 3);
  for (long i = 0; i < 3; ++i)
    for (long j = 0; j < 3; ++j)
      for (long k = 0; k < 2; ++k) keep1(i, j) += ent.matrix()(k * 3 + i, k * 3 + j);
  CHECK(max_abs(partial_trace(ent, 1).matrix() - keep1) < 1e-14);
}

TEST_CASE("expectation values") {
  const FockSpace s(4, "m");
  CHECK(expectation(DensityMatrix::fock(s, 2), number(s)).real() == doctest::Approx(2.0));
  std::mt19937 rng(3);
  const DensityMatrix r(CompositeSpace(s), random_density(4, rng));
  const Complex one = expectation(r, identity(CompositeSpace(s)));
  CHECK(one.real() == doctest::Approx(1.0));
  CHECK(std::abs(one.imag()) < 1e-12);
  CHECK(std::abs(expectation(r, number(s)).imag()) < 1e-12);
  CHECK_THROWS_AS(expectation(r, number(FockSpace(5, "m"))), ArgumentError);
}

TEST_CASE("coordinate list dump") {
  std::ostringstream os;
  write_coordinate_list(os, annihilation(FockSpace(3, "m")).matrix());
  const std::string text = os.str();
  CHECK(text.rfind("# nanofock coo v1", 0) == 0);
  CHECK(text.find("row,col,re,im") != std::string::npos);
  CHECK(text.find("1,2,1.4142135623730951,0") != std::string::npos);
}
