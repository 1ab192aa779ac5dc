#pragma once

// Lindblad generators for the driven optomechanical system and for the
// Fock-resolved reduced dynamics of the mechanical mode.
//
// Density matrices are vectorized by column stacking: vec(rho)[i + j d] = rho(i, j),
// so vec(A X B) = (B^T kron A) vec(X). Hamiltonians are stored divided by hbar (rad/s).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nanofock/device.hpp"
#include "nanofock/fock.hpp"

namespace nanofock {

struct SystemConfig {
  std::size_t mech_truncation = 10;
  /// One entry per drive laser; the j-th cavity mode is driven by the j-th laser.
  std::vector<std::size_t> cavity_truncations;
  DerivedParams derived;
  bool include_reduced_shifts = false;
  /// Memory guard on the estimated number of superoperator nonzeros.
  double max_superoperator_nonzeros = 5e7;

  /// Cavity dimension `cavity_dim` for every laser in `derived`.
  static SystemConfig uniform(DerivedParams derived, std::size_t mech_truncation, std::size_t cavity_dim = 2);

  void validate() const;
  CompositeSpace space() const;
};

enum class GeneratorKind { Full, ReducedPopulation };
std::string to_string(GeneratorKind kind);

/// Linear generator d/dt x = L x. For the full kind x = vec(rho); for the
/// reduced-population kind x is the vector of Fock populations.
class Liouvillian {
 public:
  Liouvillian(CompositeSpace space, SparseMatrix generator, GeneratorKind kind);

  const CompositeSpace& space() const noexcept { return space_; }
  const SparseMatrix& matrix() const noexcept { return generator_; }
  GeneratorKind kind() const noexcept { return kind_; }
  std::size_t hilbert_dim() const noexcept { return space_.total_dim(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(generator_.rows()); }
  double norm() const { return generator_.norm(); }

  /// Row functional giving the trace (full) or the total probability (reduced).
  ComplexVector trace_functional() const;
  /// || t^T L || / ||L||, zero for an exactly trace-preserving generator.
  double trace_defect() const;

  DenseMatrix apply(const DenseMatrix& rho) const;

  /// Reduced kind with shifts enabled: sum_j Delta_m,j^(n) for n = 1..N-1 (index n).
  std::optional<std::vector<double>> level_shifts;

 private:
  CompositeSpace space_;
  SparseMatrix generator_;
  GeneratorKind kind_;
};

ComplexVector vectorize(const DenseMatrix& rho);
DenseMatrix unvectorize(const ComplexVector& v, std::size_t dim);

/// A collapse operator c = sqrt(rate) * op entering as c rho c^dag - {c^dag c, rho}/2.
struct Dissipator {
  double rate = 0.0;
  FockOperator op;
};

/// Generic Lindblad generator -i[H, .] + sum_k D[c_k].
Liouvillian lindblad(const FockOperator& hamiltonian, std::span<const Dissipator> dissipators,
                     double max_nonzeros = 5e7);

/// H / hbar = sum_j [-Delta_j a_j^dag a_j + (g_j^* a_j / 2 + h.c.)(b^dag + b)] + omega_m' b^dag b + (lambda/2) b^dag b^dag b b.
FockOperator build_full_hamiltonian(const SystemConfig& config);
/// Hamiltonian plus cavity decay kappa per mode and the thermal mechanical bath.
Liouvillian build_full_liouvillian(const SystemConfig& config);

/// Cavity-induced rates between neighbouring Fock states, per laser.
struct RateTable {
  /// delta[n] = delta_n for n = 1..max_level; entry 0 unused.
  std::vector<double> delta;
  /// plus[n][j] = A_{+,j}^n, minus[n][j] = A_{-,j}^n; row 0 unused.
  std::vector<std::vector<double>> plus;
  std::vector<std::vector<double>> minus;

  std::size_t max_level() const noexcept { return delta.empty() ? 0 : delta.size() - 1; }
  std::size_t lasers() const noexcept { return plus.empty() ? 0 : plus.front().size(); }
  /// Sums over lasers; zero outside 1..max_level.
  double total_plus(std::size_t n) const;
  double total_minus(std::size_t n) const;
};

/// A_+- = |g|^2 kappa / (4 (Delta -+ delta)^2 + kappa^2).
double transition_rate(double g_abs, double kappa, double detuning, double delta, int sign);

RateTable transition_rates(const DerivedParams& derived, std::span<const LaserParams> lasers, std::size_t max_level);
/// Drive-laser table for n = 1..N_m-1.
RateTable transition_rates(const SystemConfig& config);

/// Light shifts Delta_m^(n) summed over lasers (extension, coherence dynamics only).
std::vector<double> reduced_frequency_shifts(const SystemConfig& config);

/// Birth-death rate matrix on P_0..P_{dim-1}: up n-1 -> n at n (A_+^n + gamma nbar),
/// down n -> n-1 at n (A_-^n + gamma (nbar + 1)). Columns sum to zero.
SparseMatrix birth_death_matrix(const RateTable& rates, double gamma_m, double nbar, std::size_t dim);

/// Tridiagonal birth-death generator on the populations P_0..P_{N_m-1}.
Liouvillian build_reduced_generator(const SystemConfig& config);

enum class SolverMethod { Auto, Dense, SparseDirect, Iterative };
std::string to_string(SolverMethod m);
SolverMethod parse_solver_method(const std::string& name);

struct SolveOptions {
  SolverMethod method = SolverMethod::Auto;
  /// Auto picks Dense at or below this generator dimension, SparseDirect above.
  std::size_t dense_max_dim = 256;
  /// Hard cap for an explicitly requested dense solve.
  std::size_t dense_hard_cap = 4096;
  double iterative_tolerance = 1e-13;
  std::size_t max_iterations = 3000;
  std::size_t restart = 80;
};

struct SolverDiagnostics {
  std::string method;
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  /// Total weight of clipped negative eigenvalues.
  double clipped_weight = 0.0;
  double min_eigenvalue = 0.0;
  /// Dense only: the two smallest singular values.
  std::optional<std::pair<double, double>> smallest_singular_values;
};

struct SteadyState {
  GeneratorKind kind = GeneratorKind::Full;
  std::optional<DensityMatrix> rho;
  /// Mechanical (slot 0) Fock populations.
  std::vector<double> populations;
  /// ||L x|| for the normalized solution.
  double residual = 0.0;
  double generator_norm = 0.0;
  SolverDiagnostics diagnostics;
};

SteadyState steady_state_solve(const Liouvillian& generator, const SolveOptions& options = {});

/// Closed-form ratio recursion for P_0..P_{n_cut}, evaluated in log space.
SteadyState reduced_steady_populations(const SystemConfig& config, std::size_t n_cut);

struct EvolveOptions {
  double relative_tolerance = 1e-8;
  double absolute_tolerance = 1e-11;
  /// Snapshots stored at equally spaced times, including t = 0 and t_final.
  std::size_t samples = 21;
  std::size_t max_steps = 20'000'000;
  double max_trace_drift = 1e-8;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  double max_trace_drift = 0.0;
};

/// Adaptive Dormand-Prince 5(4) integration of d vec(rho)/dt = L vec(rho).
Trajectory time_evolve(const Liouvillian& generator, const DensityMatrix& rho0, double t_final,
                       const EvolveOptions& options = {});

}  // namespace nanofock
