#include "nanofock/liouvillian.hpp"

#include <cmath>
#include <sstream>

#include "nanofock/error.hpp"

namespace nanofock {

SystemConfig SystemConfig::uniform(DerivedParams derived, std::size_t mech_truncation, std::size_t cavity_dim) {
  SystemConfig c;
  c.mech_truncation = mech_truncation;
  c.cavity_truncations.assign(derived.lasers.size(), cavity_dim);
  c.derived = std::move(derived);
  return c;
}

void SystemConfig::validate() const {
  if (mech_truncation < 3) throw ArgumentError("mechanical truncation must be >= 3");
  if (cavity_truncations.size() != derived.lasers.size())
    throw ArgumentError("need one cavity truncation per drive laser (" + std::to_string(derived.lasers.size()) +
                        "), got " + std::to_string(cavity_truncations.size()));
  for (auto d : cavity_truncations)
    if (d < 2) throw ArgumentError("cavity truncation must be >= 2");
}

CompositeSpace SystemConfig::space() const {
  std::vector<FockSpace> factors{FockSpace(mech_truncation, "mech")};
  for (std::size_t j = 0; j < cavity_truncations.size(); ++j)
    factors.emplace_back(cavity_truncations[j], "cav" + std::to_string(j + 1));
  return CompositeSpace(std::move(factors));
}

std::string to_string(GeneratorKind kind) {
  return kind == GeneratorKind::Full ? "full" : "reduced-population";
}

Liouvillian::Liouvillian(CompositeSpace space, SparseMatrix generator, GeneratorKind kind)
    : space_(std::move(space)), generator_(std::move(generator)), kind_(kind) {
  const std::size_t d = space_.total_dim();
  const std::size_t expected = kind_ == GeneratorKind::Full ? d * d : d;
  if (generator_.rows() != static_cast<long>(expected) || generator_.cols() != static_cast<long>(expected))
    throw ArgumentError("Liouvillian: generator dimension does not match its space");
  prune(generator_);
}

ComplexVector Liouvillian::trace_functional() const {
  const std::size_t d = hilbert_dim();
  if (kind_ == GeneratorKind::ReducedPopulation) return ComplexVector::Ones(static_cast<long>(d));
  ComplexVector t = ComplexVector::Zero(static_cast<long>(d * d));
  for (std::size_t i = 0; i < d; ++i) t(static_cast<long>(i + i * d)) = 1.0;
  return t;
}

double Liouvillian::trace_defect() const {
  const double n = norm();
  if (n == 0.0) return 0.0;
  const ComplexVector left = generator_.transpose() * trace_functional();
  return left.norm() / n;
}

DenseMatrix Liouvillian::apply(const DenseMatrix& rho) const {
  if (kind_ != GeneratorKind::Full) throw ArgumentError("apply(rho) needs a full generator");
  return unvectorize(generator_ * vectorize(rho), hilbert_dim());
}

ComplexVector vectorize(const DenseMatrix& rho) {
  return Eigen::Map<const ComplexVector>(rho.data(), rho.size());
}

DenseMatrix unvectorize(const ComplexVector& v, std::size_t dim) {
  if (static_cast<std::size_t>(v.size()) != dim * dim) throw ArgumentError("unvectorize: size mismatch");
  return Eigen::Map<const DenseMatrix>(v.data(), static_cast<long>(dim), static_cast<long>(dim));
}

namespace {
SparseMatrix sparse_identity(std::size_t d) {
  SparseMatrix id(static_cast<long>(d), static_cast<long>(d));
  id.setIdentity();
  return id;
}

double nonzero_estimate(const FockOperator& h, std::span<const Dissipator> dissipators) {
  const double d = static_cast<double>(h.dim());
  double total = 2.0 * d * static_cast<double>(h.matrix().nonZeros());
  for (const auto& c : dissipators) {
    const double nnz = static_cast<double>(c.op.matrix().nonZeros());
    const double nnz_cc = static_cast<double>(SparseMatrix(c.op.matrix().adjoint() * c.op.matrix()).nonZeros());
    total += nnz * nnz + 2.0 * d * nnz_cc;
  }
  return total;
}
}  // namespace

Liouvillian lindblad(const FockOperator& hamiltonian, std::span<const Dissipator> dissipators, double max_nonzeros) {
  const std::size_t d = hamiltonian.dim();
  const double estimate = nonzero_estimate(hamiltonian, dissipators);
  if (estimate > max_nonzeros) {
    std::ostringstream msg;
    msg << "generator would hold about " << estimate << " nonzeros, above the cap of " << max_nonzeros;
    throw MemoryGuardError(msg.str(), estimate);
  }
  const SparseMatrix id = sparse_identity(d);
  const SparseMatrix& h = hamiltonian.matrix();
  const Complex minus_i(0.0, -1.0);
  SparseMatrix gen = minus_i * (kron(id, h) - kron(SparseMatrix(h.transpose()), id));
  for (const auto& c : dissipators) {
    if (!(c.op.space() == hamiltonian.space())) throw ArgumentError("lindblad: dissipator acts on another space");
    if (c.rate < 0.0) throw ArgumentError("lindblad: negative dissipation rate");
    if (c.rate == 0.0) continue;
    const SparseMatrix& a = c.op.matrix();
    const SparseMatrix ada = a.adjoint() * a;
    gen += c.rate * (kron(SparseMatrix(a.conjugate()), a) - 0.5 * kron(id, ada) -
                     0.5 * kron(SparseMatrix(ada.transpose()), id));
  }
  return Liouvillian(hamiltonian.space(), std::move(gen), GeneratorKind::Full);
}

FockOperator build_full_hamiltonian(const SystemConfig& config) {
  config.validate();
  const auto& p = config.derived;
  const CompositeSpace space = config.space();
  const FockSpace& mech = space.factor(0);
  const FockOperator b = lift(annihilation(mech), space, 0);
  const FockOperator bd = b.dagger();
  FockOperator h = p.omega_m_shifted * (bd * b) + (0.5 * p.lambda) * (bd * bd * b * b);
  const FockOperator x = b + bd;
  for (std::size_t j = 0; j < p.lasers.size(); ++j) {
    const FockOperator a = lift(annihilation(space.factor(j + 1)), space, j + 1);
    const FockOperator ad = a.dagger();
    const Complex g = p.lasers[j].g;
    h = h - p.lasers[j].detuning * (ad * a) + (0.5 * std::conj(g) * a + 0.5 * g * ad) * x;
  }
  if (!h.is_hermitian(1e-12)) throw NumericalError("full Hamiltonian is not Hermitian");
  return h;
}

Liouvillian build_full_liouvillian(const SystemConfig& config) {
  const FockOperator h = build_full_hamiltonian(config);
  const auto& p = config.derived;
  const CompositeSpace& space = h.space();
  const FockOperator b = lift(annihilation(space.factor(0)), space, 0);
  std::vector<Dissipator> dissipators;
  for (std::size_t j = 0; j < p.lasers.size(); ++j)
    dissipators.push_back({p.kappa, lift(annihilation(space.factor(j + 1)), space, j + 1)});
  dissipators.push_back({p.gamma_m * (p.nbar + 1.0), b});
  dissipators.push_back({p.gamma_m * p.nbar, b.dagger()});
  return lindblad(h, dissipators, config.max_superoperator_nonzeros);
}

double RateTable::total_plus(std::size_t n) const {
  if (n < 1 || n > max_level()) return 0.0;
  double s = 0.0;
  for (double a : plus[n]) s += a;
  return s;
}

double RateTable::total_minus(std::size_t n) const {
  if (n < 1 || n > max_level()) return 0.0;
  double s = 0.0;
  for (double a : minus[n]) s += a;
  return s;
}

double transition_rate(double g_abs, double kappa, double detuning, double delta, int sign) {
  const double x = detuning - sign * delta;
  return g_abs * g_abs * kappa / (4.0 * x * x + kappa * kappa);
}

RateTable transition_rates(const DerivedParams& derived, std::span<const LaserParams> lasers, std::size_t max_level) {
  RateTable t;
  t.delta.assign(max_level + 1, 0.0);
  t.plus.assign(max_level + 1, std::vector<double>(lasers.size(), 0.0));
  t.minus = t.plus;
  for (std::size_t n = 1; n <= max_level; ++n) {
    t.delta[n] = derived.transition_frequency(n);
    for (std::size_t j = 0; j < lasers.size(); ++j) {
      const double g = std::abs(lasers[j].g);
      t.plus[n][j] = transition_rate(g, derived.kappa, lasers[j].detuning, t.delta[n], +1);
      t.minus[n][j] = transition_rate(g, derived.kappa, lasers[j].detuning, t.delta[n], -1);
    }
  }
  return t;
}

RateTable transition_rates(const SystemConfig& config) {
  config.validate();
  return transition_rates(config.derived, config.derived.lasers, config.mech_truncation - 1);
}

std::vector<double> reduced_frequency_shifts(const SystemConfig& config) {
  config.validate();
  const auto& p = config.derived;
  std::vector<double> shifts(config.mech_truncation, 0.0);
  // Dispersive partner of each Lorentzian rate: |g|^2 x / (4 x^2 + kappa^2), x = Delta -+ delta_n.
  for (std::size_t n = 1; n < config.mech_truncation; ++n) {
    const double delta = p.transition_frequency(n);
    for (const auto& l : p.lasers) {
      const double g2 = std::norm(l.g);
      const double xp = l.detuning - delta;
      const double xm = l.detuning + delta;
      shifts[n] += g2 * (xp / (4.0 * xp * xp + p.kappa * p.kappa) - xm / (4.0 * xm * xm + p.kappa * p.kappa));
    }
  }
  return shifts;
}

SparseMatrix birth_death_matrix(const RateTable& rates, double gamma_m, double nbar, std::size_t dim) {
  if (dim < 2 || rates.max_level() + 1 < dim) throw ArgumentError("birth_death_matrix: rate table too short");
  const auto d = static_cast<long>(dim);
  std::vector<Eigen::Triplet<Complex, long>> trips;
  std::vector<double> diag(dim, 0.0);
  for (long n = 1; n < d; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const double up = static_cast<double>(n) * (rates.total_plus(un) + gamma_m * nbar);
    const double down = static_cast<double>(n) * (rates.total_minus(un) + gamma_m * (nbar + 1.0));
    trips.emplace_back(n, n - 1, up);
    trips.emplace_back(n - 1, n, down);
    diag[un - 1] -= up;
    diag[un] -= down;
  }
  for (long n = 0; n < d; ++n) trips.emplace_back(n, n, diag[static_cast<std::size_t>(n)]);
  SparseMatrix gen(d, d);
  gen.setFromTriplets(trips.begin(), trips.end());
  return gen;
}

Liouvillian build_reduced_generator(const SystemConfig& config) {
  const RateTable rates = transition_rates(config);
  const auto& p = config.derived;
  Liouvillian out(CompositeSpace(FockSpace(config.mech_truncation, "mech")),
                  birth_death_matrix(rates, p.gamma_m, p.nbar, config.mech_truncation),
                  GeneratorKind::ReducedPopulation);
  if (config.include_reduced_shifts) out.level_shifts = reduced_frequency_shifts(config);
  return out;
}

}  // namespace nanofock
