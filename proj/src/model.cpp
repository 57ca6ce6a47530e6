#include "aah/model.hpp"

#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <string>

#include "aah/error.hpp"

namespace aah {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}
}  // namespace

Rational::Rational(std::int64_t p, std::int64_t q) {
  if (q < 1) fail(ErrorKind::InvalidArgument, "beta denominator must be >= 1, got " + std::to_string(q));
  if (p < 0) fail(ErrorKind::InvalidArgument, "beta numerator must be >= 0, got " + std::to_string(p));
  const std::int64_t g = std::gcd(p, q);
  p_ = g == 0 ? 0 : p / g;
  q_ = g == 0 ? 1 : q / g;
  if (p == 0) q_ = 1;
}

double Rational::phase(std::int64_t j) const noexcept {
  // p*j can overflow only for |j| > 2^62/p, far beyond any chain we build.
  return kTwoPi * static_cast<double>(positive_mod(p_ * j, q_)) / static_cast<double>(q_);
}

BlochMomentum BlochMomentum::reduced(int q) const {
  const double width = kTwoPi / q;
  const double half = width / 2.0;
  // (-half, half]
  double x = kx - width * std::ceil((kx - half) / width);
  double y = ky - kTwoPi * std::ceil(ky / kTwoPi - 1.0);
  if (y <= 0.0) y += kTwoPi;
  return {x, y};
}

double onsite_potential(std::int64_t j, const ModulationParams& params, double ky) {
  return params.nu_d * std::cos(params.beta.phase(j) + ky);
}

double hopping(std::int64_t j, const ModulationParams& params, double ky) {
  return -params.J + params.nu_od * std::cos(params.beta.phase(j) + ky + params.delta_phi);
}

ComplexMatrix bloch_hamiltonian(const ModulationParams& params, const BlochMomentum& k) {
  const int q = params.q();
  ComplexMatrix h = ComplexMatrix::Zero(q, q);
  const Complex bond_phase = std::polar(1.0, k.kx);
  for (int j = 1; j <= q; ++j) {
    const int a = j - 1;
    const int b = j % q;
    h(a, a) += onsite_potential(j, params, k.ky);
    const Complex t = hopping(j, params, k.ky) * bond_phase;
    h(a, b) += t;
    h(b, a) += std::conj(t);
  }
  return h;
}

ComplexVector zone_boundary_gauge(int q) {
  ComplexVector g(q);
  for (int j = 1; j <= q; ++j) g(j - 1) = std::polar(1.0, -kTwoPi * j / q);
  return g;
}

Tridiagonal open_tridiagonal(const ModulationParams& params, const OpenChainSpec& spec) {
  if (spec.num_sites < 2)
    fail(ErrorKind::InvalidArgument, "open chain needs N >= 2, got " + std::to_string(spec.num_sites));
  const int n = spec.num_sites;
  Tridiagonal t{Eigen::VectorXd(n), Eigen::VectorXd(n - 1)};
  for (int j = 1; j <= n; ++j) {
    t.diagonal(j - 1) = onsite_potential(j, params, spec.ky);
    if (j < n) t.off_diagonal(j - 1) = hopping(j, params, spec.ky);
  }
  return t;
}

ComplexMatrix open_hamiltonian(const ModulationParams& params, const OpenChainSpec& spec) {
  const Tridiagonal t = open_tridiagonal(params, spec);
  const int n = spec.num_sites;
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    h(a, a) = t.diagonal(a);
    if (a + 1 < n) {
      h(a, a + 1) = t.off_diagonal(a);
      h(a + 1, a) = t.off_diagonal(a);
    }
  }
  return h;
}

double hermiticity_error(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

void validate(const ModulationParams& params) {
  if (!std::isfinite(params.J) || !std::isfinite(params.nu_d) || !std::isfinite(params.nu_od) ||
      !std::isfinite(params.delta_phi))
    fail(ErrorKind::InvalidArgument, "modulation parameters must be finite");
}

}  // namespace aah
