#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "nanofock/error.hpp"
#include "nanofock/krylov.hpp"
#include "nanofock/liouvillian.hpp"

namespace nanofock {

std::string to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::Auto: return "auto";
    case SolverMethod::Dense: return "dense";
    case SolverMethod::SparseDirect: return "sparse-direct";
    case SolverMethod::Iterative: return "iterative";
  }
  return "unknown";
}

SolverMethod parse_solver_method(const std::string& name) {
  if (name == "auto") return SolverMethod::Auto;
  if (name == "dense") return SolverMethod::Dense;
  if (name == "sparse-direct" || name == "sparse") return SolverMethod::SparseDirect;
  if (name == "iterative" || name == "gmres") return SolverMethod::Iterative;
  throw ArgumentError("unknown solver method '" + name + "' (auto, dense, sparse-direct, iterative)");
}

namespace {

// L with its first row replaced by a scaled trace functional. Row 0 is the
// equation for x[0] (rho_00 or P_0), which trace preservation makes redundant.
struct BorderedSystem {
  SparseMatrix matrix;
  ComplexVector rhs;
};

BorderedSystem bordered(const Liouvillian& gen) {
  const SparseMatrix& l = gen.matrix();
  const long n = l.rows();
  const double scale = std::max(gen.norm() / std::sqrt(static_cast<double>(n)), 1e-300);
  const ComplexVector t = gen.trace_functional();
  std::vector<Eigen::Triplet<Complex, long>> trips;
  trips.reserve(static_cast<std::size_t>(l.nonZeros() + n));
  for (long k = 0; k < l.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(l, k); it; ++it)
      if (it.row() != 0) trips.emplace_back(it.row(), it.col(), it.value());
  for (long i = 0; i < n; ++i)
    if (t(i) != 0.0) trips.emplace_back(0, i, scale * t(i));
  BorderedSystem sys;
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  sys.matrix.makeCompressed();
  sys.rhs = ComplexVector::Zero(n);
  sys.rhs(0) = scale;
  return sys;
}

double relative_residual(const Liouvillian& gen, const ComplexVector& x) {
  const double denom = gen.norm() * x.norm();
  return denom > 0.0 ? (gen.matrix() * x).norm() / denom : 0.0;
}

void require_unique(const Liouvillian& gen, const ComplexVector& x, const char* method) {
  const bool finite = x.allFinite();
  const double rel = finite ? relative_residual(gen, x) : std::numeric_limits<double>::infinity();
  if (!finite || rel > 1e-6) {
    std::ostringstream msg;
    msg << method << " steady-state solve: bordered system is singular (relative residual " << rel
        << "); the generator has a degenerate null space";
    throw DegeneracyError(msg.str());
  }
}

ComplexVector solve_dense(const Liouvillian& gen, const SolveOptions& opts, SolverDiagnostics& diag) {
  if (gen.dim() > opts.dense_hard_cap)
    throw ArgumentError("dense steady-state solve refused: generator dimension " + std::to_string(gen.dim()) +
                        " exceeds " + std::to_string(opts.dense_hard_cap));
  const DenseMatrix l(gen.matrix());
  Eigen::BDCSVD<DenseMatrix> svd(l, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const long n = s.size();
  if (n < 2) return ComplexVector::Ones(1);
  diag.smallest_singular_values = std::make_pair(s(n - 1), s(n - 2));
  if (s(n - 2) < 1e-10 * s(0)) {
    std::ostringstream msg;
    msg << "dense steady-state solve: second-smallest singular value " << s(n - 2) << " is below 1e-10 * "
        << s(0) << "; the null space is not unique";
    throw DegeneracyError(msg.str());
  }
  return svd.matrixV().col(n - 1);
}

ComplexVector solve_sparse_direct(const Liouvillian& gen, SolverDiagnostics&) {
  const BorderedSystem sys = bordered(gen);
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<long>> lu;
  lu.analyzePattern(sys.matrix);
  lu.factorize(sys.matrix);
  if (lu.info() != Eigen::Success)
    throw DegeneracyError("sparse-direct steady-state solve: factorization failed (" + lu.lastErrorMessage() +
                          "); the generator has a degenerate null space");
  ComplexVector x = lu.solve(sys.rhs);
  require_unique(gen, x, "sparse-direct");
  return x;
}

ComplexVector solve_iterative(const Liouvillian& gen, const SolveOptions& opts, SolverDiagnostics& diag) {
  const BorderedSystem sys = bordered(gen);
  Eigen::IncompleteLUT<Complex, long> ilu;
  ilu.setDroptol(1e-6);
  ilu.setFillfactor(20);
  ilu.compute(sys.matrix);
  std::function<ComplexVector(const ComplexVector&)> precondition;
  if (ilu.info() == Eigen::Success) precondition = [&ilu](const ComplexVector& v) { return ComplexVector(ilu.solve(v)); };
  auto result = gmres(sys.matrix, sys.rhs, precondition, opts.iterative_tolerance, opts.max_iterations, opts.restart);
  diag.iterations = result.iterations;
  diag.residual_history = result.residual_history;
  if (!result.converged) {
    std::ostringstream msg;
    msg << "iterative steady-state solve did not converge in " << result.iterations << " iterations (last relative "
        << "residual " << (result.residual_history.empty() ? 1.0 : result.residual_history.back()) << ")";
    throw ConvergenceError(msg.str(), result.residual_history);
  }
  require_unique(gen, result.x, "iterative");
  return result.x;
}

// Normalizes, Hermitizes and clips tiny negative eigenvalues.
DensityMatrix finalize_density(const Liouvillian& gen, const ComplexVector& x, SolverDiagnostics& diag) {
  const std::size_t d = gen.hilbert_dim();
  DenseMatrix rho = unvectorize(x, d);
  const Complex tr = rho.trace();
  if (std::abs(tr) == 0.0) throw NumericalError("steady-state vector has zero trace");
  rho /= tr;
  rho = (0.5 * (rho + rho.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho);
  Eigen::VectorXd ev = es.eigenvalues();
  diag.min_eigenvalue = ev.minCoeff();
  if (diag.min_eigenvalue < -1e-8) {
    std::ostringstream msg;
    msg << "steady state has eigenvalue " << diag.min_eigenvalue << " below -1e-8";
    throw NumericalError(msg.str());
  }
  if (diag.min_eigenvalue < 0.0) {
    for (long i = 0; i < ev.size(); ++i)
      if (ev(i) < 0.0) {
        diag.clipped_weight -= ev(i);
        ev(i) = 0.0;
      }
    rho = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    rho /= rho.trace();
    rho = (0.5 * (rho + rho.adjoint())).eval();
  }
  return DensityMatrix(gen.space(), std::move(rho));
}

std::vector<double> finalize_populations(const ComplexVector& x, SolverDiagnostics& diag) {
  std::vector<double> p(static_cast<std::size_t>(x.size()));
  const Complex total = x.sum();
  if (std::abs(total) == 0.0) throw NumericalError("steady-state population vector sums to zero");
  double sum = 0.0;
  for (long i = 0; i < x.size(); ++i) {
    double v = (x(i) / total).real();
    if (v < -1e-10) throw NumericalError("steady-state population below -1e-10");
    if (v < 0.0) {
      diag.clipped_weight -= v;
      v = 0.0;
    }
    p[static_cast<std::size_t>(i)] = v;
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

}  // namespace

SteadyState steady_state_solve(const Liouvillian& gen, const SolveOptions& opts) {
  if (gen.trace_defect() > 1e-10) throw ArgumentError("steady_state_solve: generator is not trace preserving");
  SolverMethod method = opts.method;
  if (method == SolverMethod::Auto)
    method = gen.dim() <= opts.dense_max_dim ? SolverMethod::Dense : SolverMethod::SparseDirect;

  SteadyState out;
  out.kind = gen.kind();
  out.generator_norm = gen.norm();
  out.diagnostics.method = to_string(method);
  ComplexVector x;
  switch (method) {
    case SolverMethod::Dense: x = solve_dense(gen, opts, out.diagnostics); break;
    case SolverMethod::SparseDirect: x = solve_sparse_direct(gen, out.diagnostics); break;
    case SolverMethod::Iterative: x = solve_iterative(gen, opts, out.diagnostics); break;
    case SolverMethod::Auto: break;
  }

  if (gen.kind() == GeneratorKind::ReducedPopulation) {
    out.populations = finalize_populations(x, out.diagnostics);
    ComplexVector pv(static_cast<long>(out.populations.size()));
    for (std::size_t i = 0; i < out.populations.size(); ++i) pv(static_cast<long>(i)) = out.populations[i];
    out.residual = (gen.matrix() * pv).norm();
  } else {
    DensityMatrix rho = finalize_density(gen, x, out.diagnostics);
    out.residual = (gen.matrix() * vectorize(rho.matrix())).norm();
    out.populations = partial_trace(rho, 0).populations();
    out.rho = std::move(rho);
  }
  return out;
}

SteadyState reduced_steady_populations(const SystemConfig& config, std::size_t n_cut) {
  config.validate();
  if (n_cut < 1 || n_cut > config.mech_truncation - 1)
    throw ArgumentError("reduced_steady_populations: n_cut must lie in [1, N_m - 1]");
  const auto& p = config.derived;
  const RateTable rates = transition_rates(p, p.lasers, n_cut);
  std::vector<double> logp(n_cut + 1, 0.0);
  for (std::size_t n = 1; n <= n_cut; ++n) {
    const double up = rates.total_plus(n) + p.gamma_m * p.nbar;
    const double down = rates.total_minus(n) + p.gamma_m * (p.nbar + 1.0);
    if (!(down > 0.0))
      throw TruncationError("no decay channel out of level " + std::to_string(n) +
                            "; the population ratio diverges");
    logp[n] = logp[n - 1] + std::log(up) - std::log(down);
  }
  const double peak = *std::max_element(logp.begin(), logp.end());
  std::vector<double> pops(n_cut + 1);
  double total = 0.0;
  for (std::size_t n = 0; n <= n_cut; ++n) total += pops[n] = std::exp(logp[n] - peak);
  for (auto& v : pops) v /= total;
  const double max_p = *std::max_element(pops.begin(), pops.end());
  if (!(pops[n_cut] < 1e-3 * max_p)) {
    std::ostringstream msg;
    msg << "population tail not converged: P_" << n_cut << " = " << pops[n_cut] << " is not below 1e-3 * max P ("
        << max_p << "); raise the truncation";
    throw TruncationError(msg.str());
  }

  SteadyState out;
  out.kind = GeneratorKind::ReducedPopulation;
  out.populations = std::move(pops);
  out.diagnostics.method = "ratio-recursion";
  const SparseMatrix gen = birth_death_matrix(rates, p.gamma_m, p.nbar, n_cut + 1);
  ComplexVector pv(static_cast<long>(out.populations.size()));
  for (std::size_t i = 0; i < out.populations.size(); ++i) pv(static_cast<long>(i)) = out.populations[i];
  out.residual = (gen * pv).norm();
  out.generator_norm = gen.norm();
  return out;
}

}  // namespace nanofock
