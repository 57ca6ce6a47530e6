#include "aah/spectral.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <string>

#include "aah/error.hpp"
#include "aah/parallel.hpp"

namespace aah {

namespace {
constexpr double kHermiticityTol = 1e-12;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

EigenDecomposition eigh(const ComplexMatrix& h) {
  if (h.rows() != h.cols() || h.rows() == 0)
    fail(ErrorKind::NonHermitianInput, "matrix must be square and non-empty");
  const double err = hermiticity_error(h);
  if (!(err <= kHermiticityTol))
    fail(ErrorKind::NonHermitianInput, "max |H - H^dagger| = " + std::to_string(err));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) fail(ErrorKind::NonHermitianInput, "eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

RealEigenDecomposition eigh_tridiagonal(const Tridiagonal& t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(t.diagonal, t.off_diagonal, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) fail(ErrorKind::NonHermitianInput, "tridiagonal QL did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double ZoneMesh::kx(int ix) const {
  const double width = kTwoPi / q;
  return -width / 2.0 + width * (ix + 1) / nx;
}

double ZoneMesh::ky(int iy) const { return kTwoPi * (iy + 1) / ny; }

BandGrid::BandGrid(ZoneMesh mesh)
    : mesh_(mesh),
      energies_(static_cast<std::size_t>(mesh.q) * mesh.nx * mesh.ny, 0.0),
      states_(static_cast<std::size_t>(mesh.nx) * mesh.ny, ComplexMatrix::Zero(mesh.q, mesh.q)) {}

Eigen::Ref<const ComplexVector> BandGrid::state(int band, int ix, int iy) const {
  return states_[point(ix, iy)].col(band);
}

Eigen::Ref<ComplexVector> BandGrid::state(int band, int ix, int iy) {
  return states_[point(ix, iy)].col(band);
}

BandGrid band_grid(const ModulationParams& params, int nx, int ny) {
  validate(params);
  if (nx < 2 || ny < 2)
    fail(ErrorKind::InvalidArgument, "band mesh needs nx, ny >= 2");
  BandGrid grid({params.q(), nx, ny});
  const ZoneMesh& mesh = grid.mesh();
  parallel_for(static_cast<std::size_t>(nx) * ny, [&](std::size_t p) {
    const int ix = static_cast<int>(p / ny);
    const int iy = static_cast<int>(p % ny);
    const EigenDecomposition eig = eigh(bloch_hamiltonian(params, {mesh.kx(ix), mesh.ky(iy)}));
    for (int n = 0; n < mesh.q; ++n) {
      grid.energy(n, ix, iy) = eig.values(n);
      grid.state(n, ix, iy) = eig.vectors.col(n);
    }
  });
  return grid;
}

double band_gap(const BandGrid& grid, int n) {
  if (n < 1 || n > grid.bands() - 1)
    fail(ErrorKind::BandIndexOutOfRange,
         "gap index " + std::to_string(n) + " outside [1, " + std::to_string(grid.bands() - 1) + "]");
  double g = std::numeric_limits<double>::infinity();
  for (int ix = 0; ix < grid.nx(); ++ix)
    for (int iy = 0; iy < grid.ny(); ++iy)
      g = std::min(g, grid.energy(n, ix, iy) - grid.energy(n - 1, ix, iy));
  return g;
}

std::vector<double> band_gaps(const BandGrid& grid) {
  std::vector<double> gaps;
  for (int n = 1; n < grid.bands(); ++n) gaps.push_back(band_gap(grid, n));
  return gaps;
}

std::vector<GapRow> gap_scan(const ModulationParams& tmpl, const std::vector<double>& ratios, int nx,
                             int ny) {
  for (double r : ratios)
    if (!std::isfinite(r)) fail(ErrorKind::InvalidArgument, "gap scan ratios must be finite");
  std::vector<GapRow> rows(ratios.size());
  // Parallelism lives inside band_grid; rows are filled in order.
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    ModulationParams p = tmpl;
    p.nu_od = ratios[i] * tmpl.J;
    rows[i] = {ratios[i], band_gaps(band_grid(p, nx, ny))};
  }
  return rows;
}

std::size_t simultaneous_closure(const std::vector<GapRow>& table) {
  if (table.empty()) fail(ErrorKind::InvalidArgument, "empty gap table");
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double worst = *std::max_element(table[i].gaps.begin(), table[i].gaps.end());
    if (worst < best_value) {
      best_value = worst;
      best = i;
    }
  }
  return best;
}

std::size_t gap_minimum(const std::vector<GapRow>& table, int n) {
  if (table.empty()) fail(ErrorKind::InvalidArgument, "empty gap table");
  if (n < 1 || static_cast<std::size_t>(n) > table.front().gaps.size())
    fail(ErrorKind::BandIndexOutOfRange, "gap index " + std::to_string(n));
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.size(); ++i)
    if (table[i].gaps[n - 1] < table[best].gaps[n - 1]) best = i;
  return best;
}

}  // namespace aah
