#pragma once

// Generalized commensurate Aubry-Andre-Harper chain: on-site potentials,
// modulated hoppings, q x q Bloch blocks and open-chain Hamiltonians.

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace aah {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Exact modulation frequency p/q, reduced to lowest terms on construction.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t p, std::int64_t q);

  std::int64_t p() const noexcept { return p_; }
  std::int64_t q() const noexcept { return q_; }
  double value() const noexcept { return static_cast<double>(p_) / static_cast<double>(q_); }

  /// 2*pi*(p*j mod q)/q, reduced before conversion to floating point.
  double phase(std::int64_t j) const noexcept;

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t p_ = 1;
  std::int64_t q_ = 3;
};

struct ModulationParams {
  double J = 1.0;
  double nu_d = 0.0;
  double nu_od = 0.0;
  Rational beta{1, 3};
  double delta_phi = 0.0;

  int q() const noexcept { return static_cast<int>(beta.q()); }
};

/// A point of the zone (-pi/q, pi/q] x (0, 2pi].
struct BlochMomentum {
  double kx = 0.0;
  double ky = 0.0;

  /// Folds both components into the zone for cell length q.
  BlochMomentum reduced(int q) const;
};

struct OpenChainSpec {
  int num_sites = 2;
  double ky = 0.0;
};

/// V_j = nu_d cos(2 pi beta j + ky)
double onsite_potential(std::int64_t j, const ModulationParams& params, double ky);

/// J_{j,j+1} = -J + nu_od cos(2 pi beta j + ky + delta_phi)
double hopping(std::int64_t j, const ModulationParams& params, double ky);

/// q x q block with sites j = 1..q; every bond (including the wrap bond from
/// site q back to site 1) carries e^{i kx}.
ComplexMatrix bloch_hamiltonian(const ModulationParams& params, const BlochMomentum& k);

/// Unitary G with H(kx + 2pi/q, ky) = G H(kx, ky) G^dagger in the gauge used by
/// bloch_hamiltonian; G = diag(e^{-2 pi i j / q}), j = 1..q.
ComplexVector zone_boundary_gauge(int q);

/// Hard-wall chain of N sites, j = 1..N. Real symmetric tridiagonal.
ComplexMatrix open_hamiltonian(const ModulationParams& params, const OpenChainSpec& spec);

/// The same chain as open_hamiltonian in tridiagonal form: diagonal (size N)
/// and off-diagonal (size N-1).
struct Tridiagonal {
  Eigen::VectorXd diagonal;
  Eigen::VectorXd off_diagonal;
};
Tridiagonal open_tridiagonal(const ModulationParams& params, const OpenChainSpec& spec);

/// max |H - H^dagger| over all entries.
double hermiticity_error(const ComplexMatrix& h);

/// Validates parameter invariants shared by all entry points.
void validate(const ModulationParams& params);

}  // namespace aah
