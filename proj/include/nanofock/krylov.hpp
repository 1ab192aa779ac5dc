#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "nanofock/fock.hpp"

namespace nanofock {

struct GmresResult {
  ComplexVector x;
  std::size_t iterations = 0;
  bool converged = false;
  /// Relative residual ||b - A x|| / ||b|| after each inner step.
  std::vector<double> residual_history;
};

/// Restarted right-preconditioned GMRES(m). `precondition` applies M^{-1}; pass an
/// empty function for no preconditioning.
GmresResult gmres(const SparseMatrix& a, const ComplexVector& b,
                  const std::function<ComplexVector(const ComplexVector&)>& precondition, double tolerance,
                  std::size_t max_iterations, std::size_t restart);

}  // namespace nanofock
