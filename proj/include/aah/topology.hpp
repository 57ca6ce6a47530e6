#pragma once

// Lattice (link-variable) Chern numbers and (nu_od, nu_d) phase diagrams.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aah/spectral.hpp"

namespace aah {

/// One band's Chern number, or "undefined" together with the smallest
/// pointwise spacing to a neighbouring band that caused it.
struct ChernEntry {
  std::optional<int> value;
  double min_gap = 0.0;

  bool defined() const noexcept { return value.has_value(); }
  friend bool operator==(const ChernEntry& a, const ChernEntry& b) { return a.value == b.value; }
};

struct ChernVector {
  std::vector<ChernEntry> bands;
  std::string error;  // set when the whole computation failed (phase-diagram cells only)

  bool all_defined() const;
  /// Integer values; requires all_defined().
  std::vector<int> values() const;
  std::string to_string() const;
};

/// Per-plaquette Berry flux in (-pi, pi], row-major (ix, iy).
struct PlaquetteField {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;

  double at(int ix, int iy) const { return values[static_cast<std::size_t>(ix) * ny + iy]; }
  double total() const;
};

struct ChernOptions {
  int nx = 48;
  int ny = 48;
  /// Absolute spacing below which a band is declared undefined; a negative
  /// value means 1e-6 * |J|.
  double gap_tol = -1.0;
};

ChernVector chern_numbers(const ModulationParams& params, const ChernOptions& options = {});

/// Chern numbers from an already solved grid (used by sweeps and gauge tests).
ChernVector chern_numbers(const BandGrid& grid, double gap_tol);

/// Field of one band (0-based) on the periodic mesh.
PlaquetteField plaquette_field(const BandGrid& grid, int band);
PlaquetteField plaquette_field(const ModulationParams& params, int band, int nx, int ny);

struct PhaseDiagram {
  Rational beta;
  std::vector<double> nu_od_axis;  // in units of J
  std::vector<double> nu_d_axis;   // in units of J
  std::vector<ChernVector> cells;  // index = i_od * nu_d_axis.size() + i_d

  const ChernVector& cell(std::size_t i_od, std::size_t i_d) const {
    return cells[i_od * nu_d_axis.size() + i_d];
  }
};

/// Cell index -> Chern vector, used for resumable sweeps: entries present in
/// `cached` are copied instead of recomputed, and `on_cell` is invoked (from
/// worker threads, serialized internally) for every newly computed cell.
struct PhaseDiagramHooks {
  const std::vector<std::optional<ChernVector>>* cached = nullptr;
  std::function<void(std::size_t, const ChernVector&)> on_cell;
};

PhaseDiagram phase_diagram(const Rational& beta, const std::vector<double>& nu_od_samples,
                           const std::vector<double>& nu_d_samples, const ChernOptions& options = {},
                           const PhaseDiagramHooks& hooks = {});

/// Evenly spaced samples [lo, hi] inclusive.
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace aah
