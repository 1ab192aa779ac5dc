#include "nanofock/krylov.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Jacobi>

#include "nanofock/error.hpp"

namespace nanofock {

GmresResult gmres(const SparseMatrix& a, const ComplexVector& b,
                  const std::function<ComplexVector(const ComplexVector&)>& precondition, double tolerance,
                  std::size_t max_iterations, std::size_t restart) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw ArgumentError("gmres: dimension mismatch");
  const long n = a.rows();
  const long m = static_cast<long>(std::max<std::size_t>(1, std::min<std::size_t>(restart, static_cast<std::size_t>(n))));
  auto apply_m = [&](const ComplexVector& v) { return precondition ? precondition(v) : v; };

  GmresResult out;
  out.x = ComplexVector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }

  ComplexVector r = b;
  double beta = bnorm;
  while (out.iterations < max_iterations) {
    DenseMatrix v(n, m + 1);
    DenseMatrix h = DenseMatrix::Zero(m + 1, m);
    ComplexVector g = ComplexVector::Zero(m + 1);
    std::vector<Eigen::JacobiRotation<Complex>> rotations(static_cast<std::size_t>(m));
    v.col(0) = r / beta;
    g(0) = beta;
    long k = 0;
    for (; k < m && out.iterations < max_iterations; ++k) {
      ++out.iterations;
      ComplexVector w = a * apply_m(v.col(k));
      // Modified Gram-Schmidt, applied twice for stability.
      for (int pass = 0; pass < 2; ++pass)
        for (long i = 0; i <= k; ++i) {
          const Complex c = v.col(i).dot(w);
          h(i, k) += c;
          w -= c * v.col(i);
        }
      h(k + 1, k) = w.norm();
      const bool breakdown = std::abs(h(k + 1, k)) <= 1e-300;
      if (!breakdown) v.col(k + 1) = w / h(k + 1, k);
      for (long i = 0; i < k; ++i)
        h.col(k).applyOnTheLeft(i, i + 1, rotations[static_cast<std::size_t>(i)].adjoint());
      Complex rkk;
      rotations[static_cast<std::size_t>(k)].makeGivens(h(k, k), h(k + 1, k), &rkk);
      h(k, k) = rkk;
      h(k + 1, k) = 0.0;
      g.applyOnTheLeft(k, k + 1, rotations[static_cast<std::size_t>(k)].adjoint());
      const double rel = std::abs(g(k + 1)) / bnorm;
      out.residual_history.push_back(rel);
      if (rel <= tolerance || breakdown) {
        ++k;
        break;
      }
    }
    const ComplexVector y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    out.x += apply_m(v.leftCols(k) * y);
    r = b - a * out.x;
    beta = r.norm();
    if (beta / bnorm <= tolerance) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace nanofock
