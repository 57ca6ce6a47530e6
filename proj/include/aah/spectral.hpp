#pragma once

// Dense Hermitian eigendecomposition, band structures over the zone and the
// band gaps derived from them.

#include <cstddef>
#include <vector>

#include "aah/model.hpp"

namespace aah {

struct EigenDecomposition {
  Eigen::VectorXd values;  // ascending
  ComplexMatrix vectors;   // column n pairs with values(n)
};

/// Throws NonHermitianInput when max |H - H^dagger| exceeds 1e-12.
EigenDecomposition eigh(const ComplexMatrix& h);

struct RealEigenDecomposition {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

RealEigenDecomposition eigh_tridiagonal(const Tridiagonal& t);

/// Uniform nx x ny mesh of the zone; lower edges excluded, upper edges kept:
/// kx_i = -pi/q + (i+1) 2pi/(q nx), ky_j = (j+1) 2pi/ny.
struct ZoneMesh {
  int q = 1;
  int nx = 0;
  int ny = 0;

  double kx(int ix) const;
  double ky(int iy) const;
};

class BandGrid {
 public:
  BandGrid(ZoneMesh mesh);

  const ZoneMesh& mesh() const noexcept { return mesh_; }
  int bands() const noexcept { return mesh_.q; }
  int nx() const noexcept { return mesh_.nx; }
  int ny() const noexcept { return mesh_.ny; }

  double energy(int band, int ix, int iy) const { return energies_[index(band, ix, iy)]; }
  double& energy(int band, int ix, int iy) { return energies_[index(band, ix, iy)]; }

  /// Eigenvector of `band` at mesh point (ix, iy).
  Eigen::Ref<const ComplexVector> state(int band, int ix, int iy) const;
  Eigen::Ref<ComplexVector> state(int band, int ix, int iy);

 private:
  std::size_t index(int band, int ix, int iy) const {
    return (static_cast<std::size_t>(band) * mesh_.nx + ix) * mesh_.ny + iy;
  }
  std::size_t point(int ix, int iy) const { return static_cast<std::size_t>(ix) * mesh_.ny + iy; }

  ZoneMesh mesh_;
  std::vector<double> energies_;
  std::vector<ComplexMatrix> states_;  // per mesh point, columns are bands
};

/// Solves the Bloch block at every mesh point; nx, ny >= 2.
BandGrid band_grid(const ModulationParams& params, int nx, int ny);

/// G_n = min over the mesh of E_{n+1} - E_n, n is 1-based in [1, q-1].
double band_gap(const BandGrid& grid, int n);

/// All gaps G_1..G_{q-1}.
std::vector<double> band_gaps(const BandGrid& grid);

struct GapRow {
  double nu_od_over_J = 0.0;
  std::vector<double> gaps;  // G_1..G_{q-1}
};

/// Gaps as a function of nu_od/J; every other field is taken from `tmpl`.
std::vector<GapRow> gap_scan(const ModulationParams& tmpl, const std::vector<double>& ratios, int nx,
                             int ny);

/// Ratio where max_n G_n is smallest, i.e. where all gaps are closest to
/// closing together.
std::size_t simultaneous_closure(const std::vector<GapRow>& table);

/// Ratio index where gap n (1-based) reaches its minimum over the scan.
std::size_t gap_minimum(const std::vector<GapRow>& table, int n);

}  // namespace aah
