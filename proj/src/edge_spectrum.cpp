#include "aah/edge_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "aah/error.hpp"
#include "aah/parallel.hpp"

namespace aah {

const char* to_string(EdgeLabel label) {
  switch (label) {
    case EdgeLabel::Bulk: return "bulk";
    case EdgeLabel::LeftEdge: return "left";
    case EdgeLabel::RightEdge: return "right";
  }
  return "bulk";
}

std::pair<double, double> edge_weight(std::span<const double> state, int m) {
  const int n = static_cast<int>(state.size());
  if (m < 1 || 4 * m > n)
    fail(ErrorKind::InvalidArgument, "edge width m must satisfy 1 <= m <= N/4");
  double left = 0.0, right = 0.0;
  for (int j = 0; j < m; ++j) {
    left += state[j] * state[j];
    right += state[n - 1 - j] * state[n - 1 - j];
  }
  return {std::clamp(left, 0.0, 1.0), std::clamp(right, 0.0, 1.0)};
}

SpectralFlow spectral_flow(const ModulationParams& params, int num_sites, int n_ky,
                           const EdgeOptions& options) {
  validate(params);
  if (num_sites < 2 * params.q())
    fail(ErrorKind::InvalidArgument, "spectral flow needs N >= 2q");
  if (n_ky < 50) fail(ErrorKind::InvalidArgument, "spectral flow needs n_ky >= 50");
  SpectralFlow flow;
  flow.num_sites = num_sites;
  flow.ky.resize(n_ky);
  flow.levels.resize(n_ky);
  flow.labels.resize(n_ky);
  parallel_for(static_cast<std::size_t>(n_ky), [&](std::size_t s) {
    const double ky = 2.0 * std::numbers::pi * static_cast<double>(s) / n_ky;
    const RealEigenDecomposition eig = eigh_tridiagonal(open_tridiagonal(params, {num_sites, ky}));
    flow.ky[s] = ky;
    flow.levels[s].assign(eig.values.data(), eig.values.data() + num_sites);
    flow.labels[s].resize(num_sites);
    for (int n = 0; n < num_sites; ++n) {
      const Eigen::VectorXd v = eig.vectors.col(n);
      const auto [left, right] = edge_weight({v.data(), static_cast<std::size_t>(v.size())}, options.edge_width);
      EdgeLabel label = EdgeLabel::Bulk;
      if (left > options.threshold && left >= right)
        label = EdgeLabel::LeftEdge;
      else if (right > options.threshold)
        label = EdgeLabel::RightEdge;
      flow.labels[s][n] = label;
    }
  });
  return flow;
}

std::vector<int> WindingVector::windings() const {
  std::vector<int> out;
  for (const auto& g : gaps) out.push_back(g.winding);
  return out;
}

WindingVector winding_numbers(const SpectralFlow& flow, const std::vector<double>& fiducials) {
  const std::size_t n_ky = flow.ky.size();
  WindingVector out;
  for (std::size_t gi = 0; gi < fiducials.size(); ++gi) {
    const double e0 = fiducials[gi];
    GapWinding g{e0};
    for (std::size_t s = 0; s < n_ky; ++s) {
      const std::size_t s2 = (s + 1) % n_ky;
      for (int n = 0; n < flow.num_sites; ++n) {
        const double a = flow.levels[s][n] - e0;
        const double b = flow.levels[s2][n] - e0;
        // Half-open test: a level exactly at e0 is attributed to the
        // interval that starts there.
        const bool crosses = (a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0);
        if (!crosses) continue;
        const int sign = b > a ? 1 : -1;
        // Label of the endpoint closer to the fiducial energy.
        const EdgeLabel label = std::abs(a) <= std::abs(b) ? flow.labels[s][n] : flow.labels[s2][n];
        if (label == EdgeLabel::Bulk) {
          std::ostringstream os;
          os << "bulk level " << n << " crosses fiducial energy " << e0 << " of gap " << gi + 1
             << " near ky = " << flow.ky[s];
          fail(ErrorKind::FiducialInGapViolation, os.str());
        }
        ++g.edge_branches;
        if (label == EdgeLabel::LeftEdge)
          g.left_count += sign;
        else
          g.right_count += sign;
      }
    }
    g.winding = g.right_count;
    out.gaps.push_back(g);
  }
  return out;
}

std::vector<double> gap_centers(const ModulationParams& params, int nx, int ny) {
  const BandGrid grid = band_grid(params, nx, ny);
  std::vector<double> centers;
  for (int n = 0; n + 1 < grid.bands(); ++n) {
    double top = -std::numeric_limits<double>::infinity();
    double bottom = std::numeric_limits<double>::infinity();
    for (int ix = 0; ix < grid.nx(); ++ix)
      for (int iy = 0; iy < grid.ny(); ++iy) {
        top = std::max(top, grid.energy(n, ix, iy));
        bottom = std::min(bottom, grid.energy(n + 1, ix, iy));
      }
    if (!(bottom > top))
      fail(ErrorKind::FiducialInGapViolation, "bulk gap " + std::to_string(n + 1) + " is closed");
    centers.push_back(0.5 * (top + bottom));
  }
  return centers;
}

std::vector<int> cherns_from_windings(const std::vector<int>& windings) {
  std::vector<int> c;
  int previous = 0;
  for (int w : windings) {
    c.push_back(w - previous);
    previous = w;
  }
  c.push_back(0 - previous);
  return c;
}

BulkEdgeReport bulk_edge_check(const ModulationParams& params, const BulkEdgeOptions& options) {
  BulkEdgeReport report;
  report.cherns = chern_numbers(params, options.chern);
  const SpectralFlow flow = spectral_flow(params, options.num_sites, options.n_ky, options.edge);
  report.windings = winding_numbers(flow, gap_centers(params, options.chern.nx, options.chern.ny));
  report.chern_from_windings = cherns_from_windings(report.windings.windings());
  bool antisymmetric = true;
  for (const auto& g : report.windings.gaps) antisymmetric = antisymmetric && g.left_count == -g.right_count;
  report.consistent = antisymmetric && report.cherns.all_defined() &&
                      report.cherns.values() == report.chern_from_windings;
  return report;
}

}  // namespace aah
