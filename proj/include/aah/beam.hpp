#pragma once

// Paraxial beam propagation through longitudinally modulated waveguide
// arrays (symmetric split-step spectral integration) and Chern-number
// readout from the pumped mean transverse shift.
//
// Units: lengths in micrometres, propagation constants in 1/um.

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "aah/model.hpp"

namespace aah::beam {

struct OpticalConstants {
  double n0 = 1.45;
  double lambda_um = 0.63;
  double gamma = 0.0;

  double k0() const;  // 2 pi n0 / lambda
};

/// Guide j sits at j*ws with index factor 1 + alpha cos(2 pi beta j + ky(z)).
struct IndexModulated {
  double alpha = 0.5;
  Rational beta{1, 3};
  double ws_um = 10.0;
  double wx_um = 3.0;
};

/// Guide j sits at j*ws + wm cos(2 pi beta j + ky(z) + phi0), unit depth.
struct SpacingModulated {
  Rational beta{1, 3};
  double ws_um = 20.0;
  double wx_um = 3.0;
  double wm_um = 18.0;
  double phi0 = 0.0;
};

struct WaveguideArrayDesign {
  std::variant<IndexModulated, SpacingModulated> variant;
  int num_guides = 21;
  double Z_um = 1e5;
  /// Optional pump-phase schedule ky(z); must be monotone with ky(0) = 0 and
  /// ky(Z) = 2 pi. Empty means ky = Omega z.
  std::function<double(double)> phase_schedule;

  double omega() const;  // 2 pi / Z
  double pump_phase(double z) const;

  const Rational& beta() const;
  double spacing() const;
  double width() const;
  bool index_modulated() const { return std::holds_alternative<IndexModulated>(variant); }

  /// Guides are labelled j = first_guide() .. first_guide() + num_guides - 1,
  /// centred on j = 0.
  int first_guide() const { return -(num_guides / 2); }
  int last_guide() const { return first_guide() + num_guides - 1; }
  double guide_center(int j, double z) const;
  double index_factor(int j, double z) const;

  /// Largest value R can reach anywhere along the array.
  double max_profile() const;

  /// Non-fatal design problems (spacing below 2 wx, crossing guides).
  std::vector<std::string> warnings() const;
};

/// R(x, z): sum over guides of factor_j(z) exp(-((x - x_j(z)) / wx)^6).
double refractive_profile(const WaveguideArrayDesign& design, double x, double z);

struct SimulationGrid {
  double x_min = 0.0;
  double dx = 0.15625;
  int nx = 2048;
  double dz = 1.0;
  std::vector<double> z_slices;  // recorded z values, ascending, within [0, Z]
  /// Width of the graded absorbing layer at each end of the periodic domain.
  double absorber_um = 0.0;

  double x(int i) const { return x_min + dx * i; }
  double x_max() const { return x_min + dx * nx; }
};

/// Power-of-two grid centred on the array, at least (num_guides + 2 * pad)
/// spacings wide, recording `slices` + 1 evenly spaced z values over [0, Z].
/// Everything farther than one spacing beyond the outermost guide excursion
/// becomes absorbing layer.
SimulationGrid make_grid(const WaveguideArrayDesign& design, double dx = 0.15625, double dz = 1.0,
                         int pad_guides = 3, int slices = 200);

using Field = std::vector<Complex>;

/// A exp(-(x - center)^2 / W^2), scaled to unit L2 norm.
Field gaussian_input(double center, double W, const SimulationGrid& grid);

double l2_norm_squared(const Field& field, const SimulationGrid& grid);

struct FieldTrajectory {
  std::vector<double> z;
  std::vector<Field> fields;
  std::vector<double> norms;
  // Norm bookkeeping counts power removed by the absorbing layer as
  // accounted for, so the drifts below measure only the integrator.
  double max_step_drift = 0.0;   // max |N_s + absorbed_s - N_{s-1}| / N(0)
  double total_drift = 0.0;      // |N(Z) + absorbed - N(0)| / N(0)
  double absorbed = 0.0;         // power removed by the absorbing layer
  double max_leakage = 0.0;      // largest boundary-zone intensity fraction seen
};

struct PropagationOptions {
  /// Width of each boundary zone monitored for leakage, in guide spacings.
  double leakage_zone_spacings = 2.0;
  double leakage_limit = 1e-4;
  /// Peak absorption rate (1/um) at the domain edge; 0 disables the layer.
  double absorber_strength = 0.01;
};

/// Integrates i dpsi/dz = -(1/2k0) d2psi/dx2 - (k0 gamma R / n0) psi from z = 0
/// to the last recorded slice with symmetric splitting. Throws
/// GridUnderresolved when dz max|potential| >= 0.1 or dx > wx/8, and
/// LeakageExceeded when the boundary zones collect more than the limit.
FieldTrajectory split_step_propagate(const Field& input, const WaveguideArrayDesign& design,
                                     const OpticalConstants& constants, const SimulationGrid& grid,
                                     const PropagationOptions& options = {});

/// Imaginary-distance relaxation with the profile frozen at z = 0: the same
/// split-step scheme with real decay factors, renormalized every step.
/// Converges to the lowest guided mode of a z-independent design.
Field relax_bound_mode(const Field& guess, const WaveguideArrayDesign& design, const OpticalConstants& constants,
                       const SimulationGrid& grid, int steps);

/// <x> = int x |psi|^2 / int |psi|^2.
double mean_position(const Field& field, const SimulationGrid& grid);

/// (<x>(Z) - <x>(0)) / (q ws); the trajectory must start at 0 and end at Z.
double pump_chern(const FieldTrajectory& trajectory, const SimulationGrid& grid, int q, double ws,
                  double Z_um);

/// exp(-G1^2 Z), the Landau-Zener leakage estimate.
double lz_ratio(double G1, double Z_um);

/// Guide the beam is launched into: for index modulation the deepest guide
/// at z = 0, for spacing modulation the guide whose nearer neighbour is
/// farthest away; ties go to the guide nearest the array centre.
int input_guide(const WaveguideArrayDesign& design);

/// Intensity fraction within +-ws/2 of each guide centre at z, in guide order.
std::vector<double> guide_fractions(const Field& field, const SimulationGrid& grid,
                                    const WaveguideArrayDesign& design, double z);

/// Intensity fraction within +-ws/2 of the guide nearest the intensity peak.
double peak_guide_fraction(const Field& field, const SimulationGrid& grid, const WaveguideArrayDesign& design,
                           double z);

struct PumpSetup {
  std::string name;
  OpticalConstants constants;
  WaveguideArrayDesign design;
  double input_width_um = 4.0;
  double dx = 0.15625;
  double dz = 1.0;
  int pad_guides = 3;
  int slices = 200;
  PropagationOptions propagation;
};

struct PumpResult {
  SimulationGrid grid;
  FieldTrajectory trajectory;
  int input_guide = 0;
  double mean_start = 0.0;
  double mean_end = 0.0;
  double chern_estimate = 0.0;
  double min_peak_fraction = 1.0;
};

PumpResult run_pump(const PumpSetup& setup);

/// The three pumping runs: index modulation at gamma 9e-4 / Z = 30 cm and
/// 5e-4 / 10 cm, spacing modulation at 5e-4 / 15 cm.
PumpSetup preset_index_deep();
PumpSetup preset_index_shallow();
PumpSetup preset_spacing();

}  // namespace aah::beam
