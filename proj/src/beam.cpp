#include "aah/beam.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "aah/error.hpp"

namespace aah::beam {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
// exp(-u^6) < 1e-27 beyond u = 2; guides are evaluated on that footprint only.
constexpr double kFootprint = 2.0;

double super_gaussian(double d, double wx) {
  const double u = d / wx;
  const double u2 = u * u;
  return std::exp(-u2 * u2 * u2);
}

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place complex FFT pair over an aligned buffer. Plans are built with
/// FFTW_ESTIMATE so the chosen algorithm, and therefore every bit of the
/// output, is reproducible between runs.
class FftBuffer {
 public:
  explicit FftBuffer(int n) : n_(n) {
    data_ = reinterpret_cast<Complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    auto* raw = reinterpret_cast<fftw_complex*>(data_);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_1d(n, raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(n, raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftBuffer() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(data_);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  Complex* data() { return data_; }
  int size() const { return n_; }
  void forward() { fftw_execute(forward_); }
  void backward() { fftw_execute(backward_); }

 private:
  int n_;
  Complex* data_ = nullptr;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

/// Grid indices [begin, end) covered by a guide centred at c.
struct Footprint {
  int begin = 0;
  int end = 0;
};

Footprint footprint(const SimulationGrid& grid, double c, double wx) {
  const double lo = c - kFootprint * wx;
  const double hi = c + kFootprint * wx;
  Footprint f;
  f.begin = std::clamp(static_cast<int>(std::ceil((lo - grid.x_min) / grid.dx)), 0, grid.nx);
  f.end = std::clamp(static_cast<int>(std::floor((hi - grid.x_min) / grid.dx)) + 1, 0, grid.nx);
  return f;
}

/// Fills R(x, z) on the grid. Index-modulated shapes are fixed, so they are
/// tabulated once and only rescaled per step.
class ProfileSampler {
 public:
  ProfileSampler(const WaveguideArrayDesign& design, const SimulationGrid& grid)
      : design_(design), grid_(grid), values_(static_cast<std::size_t>(grid.nx), 0.0) {
    if (design.index_modulated()) {
      for (int j = design.first_guide(); j <= design.last_guide(); ++j) {
        const double c = design.guide_center(j, 0.0);
        const Footprint f = footprint(grid, c, design.width());
        std::vector<double> shape;
        for (int i = f.begin; i < f.end; ++i) shape.push_back(super_gaussian(grid.x(i) - c, design.width()));
        shapes_.push_back({f, std::move(shape)});
      }
    }
  }

  /// Returns R on the grid; untouched entries are zero.
  const std::vector<double>& sample(double z) {
    std::fill(values_.begin(), values_.end(), 0.0);
    lo_ = grid_.nx;
    hi_ = 0;
    int k = 0;
    for (int j = design_.first_guide(); j <= design_.last_guide(); ++j, ++k) {
      if (design_.index_modulated()) {
        const auto& [f, shape] = shapes_[k];
        const double a = design_.index_factor(j, z);
        for (int i = f.begin; i < f.end; ++i) values_[i] += a * shape[i - f.begin];
        lo_ = std::min(lo_, f.begin);
        hi_ = std::max(hi_, f.end);
      } else {
        const double c = design_.guide_center(j, z);
        const Footprint f = footprint(grid_, c, design_.width());
        for (int i = f.begin; i < f.end; ++i) values_[i] += super_gaussian(grid_.x(i) - c, design_.width());
        lo_ = std::min(lo_, f.begin);
        hi_ = std::max(hi_, f.end);
      }
    }
    return values_;
  }

  int touched_begin() const { return lo_; }
  int touched_end() const { return hi_; }

 private:
  const WaveguideArrayDesign& design_;
  const SimulationGrid& grid_;
  std::vector<double> values_;
  std::vector<std::pair<Footprint, std::vector<double>>> shapes_;
  int lo_ = 0;
  int hi_ = 0;
};

double norm_squared(const Complex* data, int n, double dx) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::norm(data[i]);
  return s * dx;
}

double boundary_fraction(const Complex* data, const SimulationGrid& grid, double zone) {
  const int cells = std::min(grid.nx / 2, static_cast<int>(std::ceil(zone / grid.dx)));
  double edge = 0.0, total = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    const double w = std::norm(data[i]);
    total += w;
    if (i < cells || i >= grid.nx - cells) edge += w;
  }
  return total > 0.0 ? edge / total : 0.0;
}
}  // namespace

double OpticalConstants::k0() const { return kTwoPi * n0 / lambda_um; }

double WaveguideArrayDesign::omega() const { return kTwoPi / Z_um; }

double WaveguideArrayDesign::pump_phase(double z) const {
  return phase_schedule ? phase_schedule(z) : omega() * z;
}

const Rational& WaveguideArrayDesign::beta() const {
  return std::visit([](const auto& v) -> const Rational& { return v.beta; }, variant);
}

double WaveguideArrayDesign::spacing() const {
  return std::visit([](const auto& v) { return v.ws_um; }, variant);
}

double WaveguideArrayDesign::width() const {
  return std::visit([](const auto& v) { return v.wx_um; }, variant);
}

double WaveguideArrayDesign::guide_center(int j, double z) const {
  if (const auto* s = std::get_if<SpacingModulated>(&variant))
    return j * s->ws_um + s->wm_um * std::cos(s->beta.phase(j) + pump_phase(z) + s->phi0);
  return j * spacing();
}

double WaveguideArrayDesign::index_factor(int j, double z) const {
  if (const auto* m = std::get_if<IndexModulated>(&variant))
    return 1.0 + m->alpha * std::cos(m->beta.phase(j) + pump_phase(z));
  return 1.0;
}

double WaveguideArrayDesign::max_profile() const {
  if (const auto* m = std::get_if<IndexModulated>(&variant)) return 1.0 + std::abs(m->alpha);
  const auto& s = std::get<SpacingModulated>(variant);
  // Crossing guides can stack; three is the most that fit inside one
  // footprint for any spacing used here, so bound generously.
  return s.wm_um < 0.5 * s.ws_um - s.wx_um ? 1.0 : 3.0;
}

std::vector<std::string> WaveguideArrayDesign::warnings() const {
  std::vector<std::string> w;
  if (spacing() <= 2.0 * width()) w.push_back("guide spacing ws is not larger than 2 wx; guides overlap");
  if (const auto* s = std::get_if<SpacingModulated>(&variant)) {
    if (s->wm_um >= 0.5 * s->ws_um - s->wx_um)
      w.push_back("spacing amplitude wm >= ws/2 - wx; neighbouring guides cross during the pump cycle");
  }
  return w;
}

double refractive_profile(const WaveguideArrayDesign& design, double x, double z) {
  double r = 0.0;
  for (int j = design.first_guide(); j <= design.last_guide(); ++j)
    r += design.index_factor(j, z) * super_gaussian(x - design.guide_center(j, z), design.width());
  return r;
}

SimulationGrid make_grid(const WaveguideArrayDesign& design, double dx, double dz, int pad_guides,
                         int slices) {
  if (!(dx > 0.0) || !(dz > 0.0)) fail(ErrorKind::InvalidArgument, "dx and dz must be positive");
  if (slices < 1) fail(ErrorKind::InvalidArgument, "need at least one recorded slice");
  const double ws = design.spacing();
  double wander = 0.0;
  if (const auto* s = std::get_if<SpacingModulated>(&design.variant)) wander = std::abs(s->wm_um);
  const double span = (design.num_guides + 2.0 * pad_guides) * ws + 2.0 * wander;
  int nx = 1;
  while (nx * dx < span) nx *= 2;
  const double center = 0.5 * (design.first_guide() + design.last_guide()) * ws;
  SimulationGrid g;
  g.dx = dx;
  g.nx = nx;
  g.x_min = center - 0.5 * nx * dx;
  g.dz = dz;
  const double reach = 0.5 * (design.last_guide() - design.first_guide()) * ws + wander + ws;
  g.absorber_um = std::max(0.0, 0.5 * nx * dx - reach);
  for (int s = 0; s <= slices; ++s) g.z_slices.push_back(design.Z_um * s / slices);
  return g;
}

Field gaussian_input(double center, double W, const SimulationGrid& grid) {
  if (!(W > 0.0)) fail(ErrorKind::InvalidArgument, "beam width W must be positive");
  Field f(static_cast<std::size_t>(grid.nx));
  for (int i = 0; i < grid.nx; ++i) {
    const double d = (grid.x(i) - center) / W;
    f[i] = std::exp(-d * d);
  }
  const double scale = 1.0 / std::sqrt(l2_norm_squared(f, grid));
  for (auto& v : f) v *= scale;
  return f;
}

double l2_norm_squared(const Field& field, const SimulationGrid& grid) {
  return norm_squared(field.data(), static_cast<int>(field.size()), grid.dx);
}

FieldTrajectory split_step_propagate(const Field& input, const WaveguideArrayDesign& design,
                                     const OpticalConstants& constants, const SimulationGrid& grid,
                                     const PropagationOptions& options) {
  const int n = grid.nx;
  if (static_cast<int>(input.size()) != n) fail(ErrorKind::InvalidArgument, "field size does not match grid");
  if (n < 2 || (n & (n - 1)) != 0) fail(ErrorKind::InvalidArgument, "grid size must be a power of two");
  if (grid.z_slices.empty() || grid.z_slices.front() < 0.0)
    fail(ErrorKind::InvalidArgument, "recorded slices must start at z >= 0");
  const double k0 = constants.k0();
  const double depth = k0 * constants.gamma / constants.n0;
  {
    const double phase_per_step = grid.dz * depth * design.max_profile();
    if (!(phase_per_step < 0.1)) {
      std::ostringstream os;
      os << "dz * max|potential| = " << phase_per_step << " rad (needs < 0.1)";
      fail(ErrorKind::GridUnderresolved, os.str());
    }
    if (grid.dx > design.width() / 8.0) {
      std::ostringstream os;
      os << "dx = " << grid.dx << " um does not resolve guide width wx = " << design.width() << " um";
      fail(ErrorKind::GridUnderresolved, os.str());
    }
  }

  FftBuffer buf(n);
  Complex* psi = buf.data();
  std::copy(input.begin(), input.end(), psi);

  // Spectral kinetic factors, with the 1/n of the unnormalized inverse
  // transform folded in.
  std::vector<Complex> half_kick(n), full_kick(n);
  const double dk = kTwoPi / (n * grid.dx);
  for (int i = 0; i < n; ++i) {
    const int m = i <= n / 2 ? i : i - n;
    const double kx = dk * m;
    const double phase = -kx * kx * grid.dz / (4.0 * k0);
    half_kick[i] = std::polar(1.0 / n, phase);
    full_kick[i] = std::polar(1.0 / n, 2.0 * phase);
  }
  auto kinetic = [&](const std::vector<Complex>& kick, Complex* data) {
    std::copy(data, data + n, psi);
    buf.forward();
    for (int i = 0; i < n; ++i) psi[i] *= kick[i];
    buf.backward();
  };

  ProfileSampler sampler(design, grid);
  FieldTrajectory traj;
  const double z_end = grid.z_slices.back();
  const long steps = std::lround(z_end / grid.dz);
  if (std::abs(steps * grid.dz - z_end) > 1e-9 * std::max(1.0, z_end))
    fail(ErrorKind::InvalidArgument, "final z must be a whole number of steps");
  for (double z : grid.z_slices) {
    const double s = z / grid.dz;
    if (std::abs(s - std::round(s)) > 1e-9 * std::max(1.0, s))
      fail(ErrorKind::InvalidArgument, "recorded z values must fall on step boundaries");
  }

  const double zone = options.leakage_zone_spacings * design.spacing();
  const double n_start = norm_squared(psi, n, grid.dx);
  std::vector<Complex> work(psi, psi + n);  // field missing its trailing half kick
  std::size_t next_slice = 0;
  auto record = [&](double z, const Complex* full) {
    traj.z.push_back(z);
    traj.fields.emplace_back(full, full + n);
    traj.norms.push_back(norm_squared(full, n, grid.dx));
    const double leak = boundary_fraction(full, grid, zone);
    traj.max_leakage = std::max(traj.max_leakage, leak);
    if (leak > options.leakage_limit) {
      std::ostringstream os;
      os << "intensity within " << zone << " um of the domain boundary reached " << leak << " at z = " << z
         << " um (limit " << options.leakage_limit << ")";
      fail(ErrorKind::LeakageExceeded, os.str());
    }
  };
  while (next_slice < grid.z_slices.size() && std::lround(grid.z_slices[next_slice] / grid.dz) == 0)
    record(grid.z_slices[next_slice++], work.data());

  double previous_norm = n_start;
  // Graded absorber: exp(-sigma dz) with sigma rising quadratically to its
  // maximum at the domain edge.
  std::vector<double> mask(n, 1.0);
  std::vector<int> absorbing;
  if (grid.absorber_um > 0.0 && options.absorber_strength > 0.0) {
    for (int i = 0; i < n; ++i) {
      const double d = std::min(grid.x(i) - grid.x_min, grid.x_max() - grid.x(i));
      if (d >= grid.absorber_um) continue;
      const double u = (grid.absorber_um - d) / grid.absorber_um;
      mask[i] = std::exp(-options.absorber_strength * u * u * grid.dz);
      absorbing.push_back(i);
    }
  }
  std::vector<Complex> snapshot(n);
  for (long s = 0; s < steps; ++s) {
    kinetic(s == 0 ? half_kick : full_kick, work.data());
    const double z_mid = (static_cast<double>(s) + 0.5) * grid.dz;
    const std::vector<double>& r = sampler.sample(z_mid);
    const double scale = depth * grid.dz;
    for (int i = sampler.touched_begin(); i < sampler.touched_end(); ++i)
      if (r[i] != 0.0) psi[i] *= std::polar(1.0, scale * r[i]);
    double removed = 0.0;
    for (const int i : absorbing) {
      const double before = std::norm(psi[i]);
      psi[i] *= mask[i];
      removed += before - std::norm(psi[i]);
    }
    removed *= grid.dx;
    traj.absorbed += removed;
    std::copy(psi, psi + n, work.begin());

    const double current = norm_squared(psi, n, grid.dx);
    traj.max_step_drift = std::max(traj.max_step_drift, std::abs(current + removed - previous_norm) / n_start);
    previous_norm = current;

    while (next_slice < grid.z_slices.size() && std::lround(grid.z_slices[next_slice] / grid.dz) == s + 1) {
      kinetic(half_kick, work.data());
      std::copy(psi, psi + n, snapshot.begin());
      record(grid.z_slices[next_slice++], snapshot.data());
    }
  }
  traj.total_drift = std::abs(traj.norms.back() + traj.absorbed - n_start) / n_start;
  return traj;
}

Field relax_bound_mode(const Field& guess, const WaveguideArrayDesign& design, const OpticalConstants& constants,
                       const SimulationGrid& grid, int steps) {
  const int n = grid.nx;
  if (static_cast<int>(guess.size()) != n) fail(ErrorKind::InvalidArgument, "field size does not match grid");
  if (steps < 1) fail(ErrorKind::InvalidArgument, "relaxation needs at least one step");
  const double k0 = constants.k0();
  const double depth = k0 * constants.gamma / constants.n0;
  FftBuffer buf(n);
  Complex* psi = buf.data();
  std::copy(guess.begin(), guess.end(), psi);
  std::vector<double> half_decay(n);
  const double dk = kTwoPi / (n * grid.dx);
  for (int i = 0; i < n; ++i) {
    const int m = i <= n / 2 ? i : i - n;
    const double kx = dk * m;
    half_decay[i] = std::exp(-kx * kx * grid.dz / (4.0 * k0)) / n;
  }
  ProfileSampler sampler(design, grid);
  const std::vector<double> r = sampler.sample(0.0);
  std::vector<double> gain(n);
  for (int i = 0; i < n; ++i) gain[i] = std::exp(depth * r[i] * grid.dz);
  for (int s = 0; s < steps; ++s) {
    buf.forward();
    for (int i = 0; i < n; ++i) psi[i] *= half_decay[i];
    buf.backward();
    for (int i = 0; i < n; ++i) psi[i] *= gain[i];
    buf.forward();
    for (int i = 0; i < n; ++i) psi[i] *= half_decay[i];
    buf.backward();
    const double scale = 1.0 / std::sqrt(norm_squared(psi, n, grid.dx));
    for (int i = 0; i < n; ++i) psi[i] *= scale;
  }
  return Field(psi, psi + n);
}

double mean_position(const Field& field, const SimulationGrid& grid) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    const double w = std::norm(field[i]);
    num += grid.x(i) * w;
    den += w;
  }
  if (!(den > 0.0)) fail(ErrorKind::InvalidArgument, "mean position of a zero field");
  return num / den;
}

double pump_chern(const FieldTrajectory& trajectory, const SimulationGrid& grid, int q, double ws, double Z_um) {
  if (trajectory.z.size() < 2) fail(ErrorKind::InvalidArgument, "trajectory needs at least two slices");
  const double tol = 1e-9 * std::max(1.0, Z_um);
  if (std::abs(trajectory.z.front()) > tol || std::abs(trajectory.z.back() - Z_um) > tol)
    fail(ErrorKind::InvalidArgument, "trajectory must span exactly one pump period [0, Z]");
  const double shift = mean_position(trajectory.fields.back(), grid) - mean_position(trajectory.fields.front(), grid);
  return shift / (q * ws);
}

double lz_ratio(double G1, double Z_um) {
  if (!(G1 >= 0.0) || !(Z_um > 0.0)) fail(ErrorKind::InvalidArgument, "lz_ratio needs G1 >= 0 and Z > 0");
  return std::exp(-G1 * G1 * Z_um);
}

int input_guide(const WaveguideArrayDesign& design) {
  const int first = design.first_guide(), last = design.last_guide();
  auto closer_to_center = [](int a, int b) { return std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b); };
  constexpr double kTie = 1e-9;
  int best = first;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> centers;
  for (int j = first; j <= last; ++j) centers.push_back(design.guide_center(j, 0.0));
  std::vector<double> sorted = centers;
  std::sort(sorted.begin(), sorted.end());
  for (int j = first; j <= last; ++j) {
    double score;
    if (design.index_modulated()) {
      score = design.index_factor(j, 0.0);
    } else {
      // Distance to the nearest neighbour by position; the outermost guides
      // only see one side and are never chosen.
      const double c = centers[j - first];
      const auto it = std::lower_bound(sorted.begin(), sorted.end(), c);
      if (it == sorted.begin() || it + 1 == sorted.end()) continue;
      score = std::min(c - *(it - 1), *(it + 1) - c);
    }
    if (score > best_score + kTie || (std::abs(score - best_score) <= kTie && closer_to_center(j, best))) {
      best = j;
      best_score = score;
    }
  }
  return best;
}

double peak_guide_fraction(const Field& field, const SimulationGrid& grid, const WaveguideArrayDesign& design,
                           double z) {
  int peak = 0;
  for (int i = 1; i < grid.nx; ++i)
    if (std::norm(field[i]) > std::norm(field[peak])) peak = i;
  const double xp = grid.x(peak);
  double c = design.guide_center(design.first_guide(), z);
  for (int j = design.first_guide(); j <= design.last_guide(); ++j) {
    const double cj = design.guide_center(j, z);
    if (std::abs(cj - xp) < std::abs(c - xp)) c = cj;
  }
  const double half = 0.5 * design.spacing();
  double inside = 0.0, total = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    const double w = std::norm(field[i]);
    total += w;
    if (std::abs(grid.x(i) - c) <= half) inside += w;
  }
  return inside / total;
}

std::vector<double> guide_fractions(const Field& field, const SimulationGrid& grid,
                                    const WaveguideArrayDesign& design, double z) {
  double total = 0.0;
  for (int i = 0; i < grid.nx; ++i) total += std::norm(field[i]);
  if (!(total > 0.0)) fail(ErrorKind::InvalidArgument, "guide fractions of a zero field");
  const double half = 0.5 * design.spacing();
  std::vector<double> out;
  for (int j = design.first_guide(); j <= design.last_guide(); ++j) {
    const double c = design.guide_center(j, z);
    double inside = 0.0;
    for (int i = 0; i < grid.nx; ++i)
      if (std::abs(grid.x(i) - c) <= half) inside += std::norm(field[i]);
    out.push_back(inside / total);
  }
  return out;
}

PumpResult run_pump(const PumpSetup& setup) {
  PumpResult r;
  r.grid = make_grid(setup.design, setup.dx, setup.dz, setup.pad_guides, setup.slices);
  r.input_guide = input_guide(setup.design);
  const double x0 = setup.design.guide_center(r.input_guide, 0.0);
  const Field input = gaussian_input(x0, setup.input_width_um, r.grid);
  r.trajectory = split_step_propagate(input, setup.design, setup.constants, r.grid, setup.propagation);
  r.mean_start = mean_position(r.trajectory.fields.front(), r.grid);
  r.mean_end = mean_position(r.trajectory.fields.back(), r.grid);
  r.chern_estimate = pump_chern(r.trajectory, r.grid, static_cast<int>(setup.design.beta().q()),
                                setup.design.spacing(), setup.design.Z_um);
  for (std::size_t s = 0; s < r.trajectory.z.size(); ++s)
    r.min_peak_fraction = std::min(
        r.min_peak_fraction, peak_guide_fraction(r.trajectory.fields[s], r.grid, setup.design, r.trajectory.z[s]));
  return r;
}

PumpSetup preset_index_deep() {
  PumpSetup s;
  s.name = "fig5a";
  s.constants.gamma = 9e-4;
  s.design.variant = IndexModulated{0.5, {1, 3}, 10.0, 3.0};
  s.design.Z_um = 30e4;
  s.input_width_um = 3.77;
  return s;
}

PumpSetup preset_index_shallow() {
  PumpSetup s;
  s.name = "fig5b";
  s.constants.gamma = 5e-4;
  s.design.variant = IndexModulated{0.5, {1, 3}, 10.0, 3.0};
  s.design.Z_um = 10e4;
  s.input_width_um = 4.47;
  return s;
}

PumpSetup preset_spacing() {
  PumpSetup s;
  s.name = "fig5c";
  s.constants.gamma = 5e-4;
  s.design.variant = SpacingModulated{{1, 3}, 20.0, 3.0, 18.0, kPi / 5.0};
  s.design.Z_um = 15e4;
  s.input_width_um = 4.3;
  return s;
}

}  // namespace aah::beam
