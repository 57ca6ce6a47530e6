#pragma once

// Open-chain spectral flow in ky, edge-state classification, winding numbers
// and the bulk-edge correspondence check.

#include <span>
#include <utility>
#include <vector>

#include "aah/topology.hpp"

namespace aah {

enum class EdgeLabel { Bulk, LeftEdge, RightEdge };

const char* to_string(EdgeLabel label);

/// (sum_{j<=m} |v_j|^2, sum_{j>N-m} |v_j|^2) for a normalized state.
std::pair<double, double> edge_weight(std::span<const double> state, int m);

struct EdgeOptions {
  int edge_width = 5;
  double threshold = 0.5;
};

struct SpectralFlow {
  int num_sites = 0;
  std::vector<double> ky;
  std::vector<std::vector<double>> levels;     // [ky][level], ascending
  std::vector<std::vector<EdgeLabel>> labels;  // [ky][level]
};

/// Spectrum of the N-site open chain at n_ky phases ky_s = 2 pi s / n_ky.
SpectralFlow spectral_flow(const ModulationParams& params, int num_sites, int n_ky,
                           const EdgeOptions& options = {});

struct GapWinding {
  double fiducial = 0.0;
  int winding = 0;         // I_n
  int left_count = 0;      // signed LeftEdge crossings
  int right_count = 0;     // signed RightEdge crossings
  int edge_branches = 0;   // unsigned edge-labelled crossings
};

struct WindingVector {
  std::vector<GapWinding> gaps;  // I_1..I_{q-1}

  std::vector<int> windings() const;
};

/// Signed crossings of each fiducial energy as ky runs through one period;
/// the sign is that of dE/dky at the crossing. I_n is the RightEdge count,
/// and the LeftEdge count must be its negative. Throws
/// FiducialInGapViolation if a Bulk-labelled level crosses a fiducial.
WindingVector winding_numbers(const SpectralFlow& flow, const std::vector<double>& fiducials);

/// Midpoints between max E_n and min E_{n+1} on the periodic band grid.
/// Throws FiducialInGapViolation if a gap is closed.
std::vector<double> gap_centers(const ModulationParams& params, int nx = 48, int ny = 48);

struct BulkEdgeReport {
  ChernVector cherns;
  WindingVector windings;
  std::vector<int> chern_from_windings;  // C_n = I_n - I_{n-1}, I_0 = I_q = 0
  bool consistent = false;
};

struct BulkEdgeOptions {
  int num_sites = 89;
  int n_ky = 400;
  ChernOptions chern{};
  EdgeOptions edge{};
};

BulkEdgeReport bulk_edge_check(const ModulationParams& params, const BulkEdgeOptions& options = {});

/// C_n = I_n - I_{n-1} with I_0 = I_q = 0.
std::vector<int> cherns_from_windings(const std::vector<int>& windings);

}  // namespace aah
