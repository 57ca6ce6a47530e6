#include "aah/topology.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "aah/error.hpp"
#include "aah/parallel.hpp"

namespace aah {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kLinkFloor = 1e-8;
constexpr double kIntegerTol = 0.01;

/// Normalized overlap <a|b>/|<a|b>|; nullopt when the overlap vanishes.
std::optional<Complex> link(const ComplexVector& a, const ComplexVector& b) {
  const Complex z = a.dot(b);  // Eigen's dot conjugates the first argument
  const double r = std::abs(z);
  if (r < kLinkFloor) return std::nullopt;
  return z / r;
}

/// States of one band on the mesh extended by one column in kx (mapped
/// through the zone-boundary gauge) so links wrap consistently.
struct BandStates {
  int nx, ny;
  std::vector<ComplexVector> v;

  const ComplexVector& at(int ix, int iy) const {
    return v[static_cast<std::size_t>(ix) * ny + (iy % ny)];
  }
};

BandStates collect(const BandGrid& grid, int band) {
  const int nx = grid.nx(), ny = grid.ny();
  BandStates s{nx, ny, std::vector<ComplexVector>(static_cast<std::size_t>(nx + 1) * ny)};
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy) s.v[static_cast<std::size_t>(ix) * ny + iy] = grid.state(band, ix, iy);
  const ComplexVector g = zone_boundary_gauge(grid.bands());
  for (int iy = 0; iy < ny; ++iy)
    s.v[static_cast<std::size_t>(nx) * ny + iy] = g.cwiseProduct(s.v[iy]);
  return s;
}

struct FieldResult {
  PlaquetteField field;
  bool links_ok = true;
};

FieldResult compute_field(const BandGrid& grid, int band) {
  const BandStates s = collect(grid, band);
  FieldResult r{{grid.nx(), grid.ny(), std::vector<double>(static_cast<std::size_t>(grid.nx()) * grid.ny())}};
  for (int ix = 0; ix < grid.nx(); ++ix) {
    for (int iy = 0; iy < grid.ny(); ++iy) {
      const auto u1 = link(s.at(ix, iy), s.at(ix + 1, iy));
      const auto u2 = link(s.at(ix + 1, iy), s.at(ix + 1, iy + 1));
      const auto u3 = link(s.at(ix, iy + 1), s.at(ix + 1, iy + 1));
      const auto u4 = link(s.at(ix, iy), s.at(ix, iy + 1));
      double f = 0.0;
      if (u1 && u2 && u3 && u4) {
        // U1(k) U2(k+x) U1(k+y)^-1 U2(k)^-1
        f = std::arg(*u1 * *u2 * std::conj(*u3) * std::conj(*u4));
      } else {
        r.links_ok = false;
      }
      r.field.values[static_cast<std::size_t>(ix) * grid.ny() + iy] = f;
    }
  }
  return r;
}

double min_neighbour_spacing(const BandGrid& grid, int band) {
  double g = std::numeric_limits<double>::infinity();
  for (int ix = 0; ix < grid.nx(); ++ix)
    for (int iy = 0; iy < grid.ny(); ++iy) {
      const double e = grid.energy(band, ix, iy);
      if (band > 0) g = std::min(g, e - grid.energy(band - 1, ix, iy));
      if (band + 1 < grid.bands()) g = std::min(g, grid.energy(band + 1, ix, iy) - e);
    }
  return g;
}
}  // namespace

bool ChernVector::all_defined() const {
  if (bands.empty()) return false;
  for (const auto& b : bands)
    if (!b.defined()) return false;
  return true;
}

std::vector<int> ChernVector::values() const {
  std::vector<int> out;
  for (const auto& b : bands) out.push_back(b.value.value());
  return out;
}

std::string ChernVector::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (i) os << ", ";
    if (bands[i].defined())
      os << *bands[i].value;
    else
      os << "undef";
  }
  os << ')';
  return os.str();
}

double PlaquetteField::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

PlaquetteField plaquette_field(const BandGrid& grid, int band) {
  if (band < 0 || band >= grid.bands())
    fail(ErrorKind::BandIndexOutOfRange, "band " + std::to_string(band));
  FieldResult r = compute_field(grid, band);
  if (!r.links_ok) fail(ErrorKind::MeshTooCoarse, "vanishing link variable in band " + std::to_string(band));
  return std::move(r.field);
}

PlaquetteField plaquette_field(const ModulationParams& params, int band, int nx, int ny) {
  return plaquette_field(band_grid(params, nx, ny), band);
}

ChernVector chern_numbers(const BandGrid& grid, double gap_tol) {
  ChernVector out;
  for (int n = 0; n < grid.bands(); ++n) {
    ChernEntry entry;
    entry.min_gap = grid.bands() > 1 ? min_neighbour_spacing(grid, n) : std::numeric_limits<double>::infinity();
    if (entry.min_gap < gap_tol) {
      out.bands.push_back(entry);
      continue;
    }
    const FieldResult r = compute_field(grid, n);
    if (!r.links_ok) {
      out.bands.push_back(entry);
      continue;
    }
    for (double f : r.field.values)
      if (!(std::abs(f) < kPi))
        fail(ErrorKind::MeshTooCoarse, "plaquette flux reaches pi in band " + std::to_string(n + 1));
    const double c = r.field.total() / (2.0 * kPi);
    const double rounded = std::round(c);
    if (std::abs(c - rounded) > kIntegerTol)
      fail(ErrorKind::MeshTooCoarse, "band " + std::to_string(n + 1) + " flux sum " + std::to_string(c) +
                                         " is not within 0.01 of an integer");
    entry.value = static_cast<int>(rounded);
    out.bands.push_back(entry);
  }
  return out;
}

ChernVector chern_numbers(const ModulationParams& params, const ChernOptions& options) {
  if (params.q() % 2 == 0)
    fail(ErrorKind::EvenDenominator, "Chern numbers need odd q, got q = " + std::to_string(params.q()));
  if (options.nx < 4 || options.ny < 4) fail(ErrorKind::InvalidArgument, "Chern mesh needs nx, ny >= 4");
  const double tol = options.gap_tol < 0.0 ? 1e-6 * std::abs(params.J) : options.gap_tol;
  return chern_numbers(band_grid(params, options.nx, options.ny), tol);
}

PhaseDiagram phase_diagram(const Rational& beta, const std::vector<double>& nu_od_samples,
                           const std::vector<double>& nu_d_samples, const ChernOptions& options,
                           const PhaseDiagramHooks& hooks) {
  if (nu_od_samples.empty() || nu_d_samples.empty())
    fail(ErrorKind::InvalidArgument, "phase diagram needs nonempty sample lists");
  auto increasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1])) return false;
    return true;
  };
  if (!increasing(nu_od_samples) || !increasing(nu_d_samples))
    fail(ErrorKind::InvalidArgument, "phase diagram axes must be strictly increasing");
  if (beta.q() % 2 == 0)
    fail(ErrorKind::EvenDenominator, "Chern numbers need odd q, got q = " + std::to_string(beta.q()));

  PhaseDiagram pd{beta, nu_od_samples, nu_d_samples, {}};
  const std::size_t cells = nu_od_samples.size() * nu_d_samples.size();
  pd.cells.resize(cells);
  std::mutex hook_mutex;
  parallel_for(cells, [&](std::size_t c) {
    if (hooks.cached && c < hooks.cached->size() && (*hooks.cached)[c]) {
      pd.cells[c] = *(*hooks.cached)[c];
      return;
    }
    ModulationParams p;
    p.J = 1.0;
    p.beta = beta;
    p.nu_od = nu_od_samples[c / nu_d_samples.size()];
    p.nu_d = nu_d_samples[c % nu_d_samples.size()];
    ChernVector v;
    try {
      v = chern_numbers(p, options);
    } catch (const Error& e) {
      v.bands.assign(static_cast<std::size_t>(beta.q()), ChernEntry{std::nullopt, std::nan("")});
      v.error = e.what();
    }
    pd.cells[c] = v;
    if (hooks.on_cell) {
      std::lock_guard lock(hook_mutex);
      hooks.on_cell(c, v);
    }
  });
  return pd;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) fail(ErrorKind::InvalidArgument, "linspace needs count >= 1");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return v;
}

}  // namespace aah
