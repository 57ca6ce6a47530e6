#pragma once

// Effective tight-binding parameters (J, nu_od, nu_d, delta_phi) of the
// index-modulated waveguide array, from Wannier functions of its lowest
// bands, plus the continuum band gap used for the adiabaticity estimate.

#include <vector>

#include "aah/beam.hpp"

namespace aah::tb {

using beam::OpticalConstants;
using beam::WaveguideArrayDesign;

/// Lowest bound mode of one isolated guide.
struct LocalizedMode {
  double x_start = 0.0;  // position of profile[0]
  double dx = 0.05;
  std::vector<double> profile;  // unit L2 norm, positive peak
  double propagation_constant = 0.0;  // eigenvalue of -(1/2k0) d2/dx2 + V, 1/um
  double center = 0.0;

  double x(std::size_t i) const { return x_start + dx * static_cast<double>(i); }
  /// Linear interpolation, zero outside the window.
  double at(double x) const;
};

struct ModeOptions {
  double dx = 0.05;
  double window_spacings = 4.0;  // window width in units of ws
};

/// Bound mode of guide j of an index-modulated design with its depth frozen
/// at propagation distance z. Throws NoBoundMode if the lowest level is not
/// below the asymptotic potential (zero).
LocalizedMode localized_mode(const OpticalConstants& constants, const WaveguideArrayDesign& design, double z,
                             int j, const ModeOptions& options = {});

/// Lowest `count` eigenpairs of the 3-point finite-difference operator
/// -(1/2k0) d2/dx2 + V on a uniform grid, either with hard walls or on a
/// ring whose wrap-around bond carries the Bloch factor e^{i bloch_phase}.
struct TridiagonalStates {
  std::vector<double> values;
  ComplexMatrix vectors;  // columns normalized to sum |v|^2 = 1
};

struct FiniteDifferenceOperator {
  std::vector<double> potential;
  double dx = 0.05;
  double k0 = 1.0;
  bool periodic = false;
  double bloch_phase = 0.0;

  ComplexMatrix dense() const;
};

TridiagonalStates lowest_states(const FiniteDifferenceOperator& op, int count);

struct ExtractionOptions {
  double dx = 0.05;
  double window_spacings = 4.0;
  int k_points = 8;
};

struct ExtractedParams {
  double J = 0.0;          // base hopping of the unmodulated array
  double J_mean = 0.0;     // mean hopping strength of the modulated array
  double nu_od = 0.0;
  double nu_d = 0.0;
  double delta_phi = 0.0;  // phase of the hopping modulation relative to the on-site one
  std::vector<double> onsite;    // epsilon_j - mean, j = 1..q
  std::vector<double> hoppings;  // hopping strengths t_j = -<w_j|H|w_{j+1}>, j = 1..q
  std::vector<double> trial_overlaps;  // int Phi_j Phi_{j+1} of the isolated-guide modes
  double wannier_orthogonality_deficit = 0.0;
  double fit_residual = 0.0;  // out-of-phase part of the on-site harmonic
};

/// Tight-binding reduction at pump phase ky = 0 for an index-modulated
/// design. The lowest q Bloch bands of one supercell are projected onto the
/// isolated-guide modes and Loewdin-orthonormalized into Wannier functions;
/// on-site energies and neighbour hoppings are matrix elements of the full
/// continuous operator between them. The on-site set is fitted to
/// nu_d cos(2 pi beta j) and the hopping strengths to
/// J_mean + nu_od cos(2 pi beta j + delta_phi). Throws FitDegenerate for
/// q < 3 or a singular projection.
ExtractedParams extract_parameters(const OpticalConstants& constants, const WaveguideArrayDesign& design,
                                   const ExtractionOptions& options = {});

/// Offset, signed amplitude along cos(phase_j + ref) and in-quadrature
/// residual of samples v_j, j = 1..q; the exact three-point inversion when
/// q = 3.
struct CosineFit {
  double offset = 0.0;
  double amplitude = 0.0;  // |harmonic|
  double phase = 0.0;      // arg of harmonic
};
CosineFit fit_cosine(const std::vector<double>& values, const Rational& beta);

/// min over (k, ky) of E_2 - E_1 for the continuous supercell operator at
/// pump phase ky (dx in um); the adiabaticity scale of the pump.
double continuum_gap(const OpticalConstants& constants, const WaveguideArrayDesign& design, int k_points = 8,
                     int phase_points = 24, double dx = 0.1);

}  // namespace aah::tb
