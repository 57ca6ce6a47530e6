#include "aah/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "aah/error.hpp"
#include "aah/parallel.hpp"

namespace aah::tb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

double super_gaussian(double d, double w) {
  const double u = (d / w) * (d / w);
  return std::exp(-u * u * u);
}

// (A - sigma) x = y for the ring/wall operator, by the Thomas algorithm on
// the tridiagonal part plus a Sherman-Morrison correction for the wrap bond.
// sigma lies below min V, so the shifted matrix is strictly diagonally
// dominant and no pivoting is needed.
class ShiftedSolver {
 public:
  ShiftedSolver(const FiniteDifferenceOperator& op, double sigma) : n_(static_cast<int>(op.potential.size())) {
    const double kin = 1.0 / (op.k0 * op.dx * op.dx);
    off_ = -0.5 * kin;
    diag_.resize(n_);
    for (int i = 0; i < n_; ++i) diag_[i] = kin + op.potential[i] - sigma;
    periodic_ = op.periodic;
    if (periodic_) {
      lower_corner_ = off_ * std::polar(1.0, op.bloch_phase);   // A(n-1, 0)
      upper_corner_ = off_ * std::polar(1.0, -op.bloch_phase);  // A(0, n-1)
      gamma_ = -diag_[0];
      diag_[0] -= gamma_;
      diag_[n_ - 1] -= (lower_corner_ * upper_corner_).real() / gamma_;
    }
    factor();
    if (periodic_) {
      std::vector<Complex> u(n_, Complex{});
      u[0] = gamma_;
      u[n_ - 1] = lower_corner_;
      correction_ = thomas(u);
      const Complex wq = correction_[0] + (upper_corner_ / gamma_) * correction_[n_ - 1];
      denominator_ = 1.0 + wq;
    }
  }

  void solve(Eigen::Ref<ComplexVector> x) const {
    std::vector<Complex> y(x.data(), x.data() + n_);
    std::vector<Complex> z = thomas(y);
    if (periodic_) {
      const Complex wz = z[0] + (upper_corner_ / gamma_) * z[n_ - 1];
      const Complex scale = wz / denominator_;
      for (int i = 0; i < n_; ++i) z[i] -= correction_[i] * scale;
    }
    for (int i = 0; i < n_; ++i) x(i) = z[i];
  }

 private:
  void factor() {
    // Forward-elimination multipliers for constant off-diagonal entries.
    pivot_.resize(n_);
    pivot_[0] = diag_[0];
    for (int i = 1; i < n_; ++i) pivot_[i] = diag_[i] - off_ * off_ / pivot_[i - 1];
  }

  std::vector<Complex> thomas(const std::vector<Complex>& rhs) const {
    std::vector<Complex> r(rhs);
    for (int i = 1; i < n_; ++i) r[i] -= (off_ / pivot_[i - 1]) * r[i - 1];
    r[n_ - 1] /= pivot_[n_ - 1];
    for (int i = n_ - 2; i >= 0; --i) r[i] = (r[i] - off_ * r[i + 1]) / pivot_[i];
    return r;
  }

  int n_;
  double off_ = 0.0;
  std::vector<double> diag_;
  std::vector<double> pivot_;
  bool periodic_ = false;
  Complex lower_corner_{};
  Complex upper_corner_{};
  double gamma_ = 0.0;
  std::vector<Complex> correction_;
  Complex denominator_{};
};

ComplexMatrix apply_operator(const FiniteDifferenceOperator& op, const ComplexMatrix& x) {
  const int n = static_cast<int>(op.potential.size());
  const double kin = 1.0 / (op.k0 * op.dx * op.dx);
  const double off = -0.5 * kin;
  ComplexMatrix y(n, x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (int i = 0; i < n; ++i) {
      Complex v = (kin + op.potential[i]) * x(i, c);
      if (i > 0) v += off * x(i - 1, c);
      if (i + 1 < n) v += off * x(i + 1, c);
      y(i, c) = v;
    }
    if (op.periodic) {
      y(n - 1, c) += off * std::polar(1.0, op.bloch_phase) * x(0, c);
      y(0, c) += off * std::polar(1.0, -op.bloch_phase) * x(n - 1, c);
    }
  }
  return y;
}

void check_operator(const FiniteDifferenceOperator& op, int count) {
  const auto n = op.potential.size();
  if (n < 3) fail(ErrorKind::InvalidArgument, "finite-difference operator needs at least 3 points");
  if (!(op.dx > 0.0) || !(op.k0 > 0.0)) fail(ErrorKind::InvalidArgument, "dx and k0 must be positive");
  if (count < 1 || static_cast<std::size_t>(count) + 2 > n)
    fail(ErrorKind::InvalidArgument, "requested " + std::to_string(count) + " states from " + std::to_string(n) +
                                         " grid points");
}

// Potential of an infinite array (guides j*ws, all j) on [x0, x0 + n*dx).
std::vector<double> array_potential(const OpticalConstants& constants, const WaveguideArrayDesign& design, double z,
                                    double x0, double dx, int n) {
  const double depth = constants.k0() * constants.gamma / constants.n0;
  const double ws = design.spacing();
  const double wx = design.width();
  double wander = 0.0;
  if (const auto* s = std::get_if<beam::SpacingModulated>(&design.variant)) wander = std::abs(s->wm_um);
  const double reach = 2.0 * wx + wander;
  const double x1 = x0 + dx * n;
  const int jlo = static_cast<int>(std::floor((x0 - reach) / ws)) - 1;
  const int jhi = static_cast<int>(std::ceil((x1 + reach) / ws)) + 1;
  std::vector<double> v(n, 0.0);
  for (int j = jlo; j <= jhi; ++j) {
    const double c = design.guide_center(j, z);
    const double a = design.index_factor(j, z);
    for (int i = 0; i < n; ++i) {
      const double d = x0 + dx * i - c;
      if (std::abs(d) <= reach) v[i] -= depth * a * super_gaussian(d, wx);
    }
  }
  return v;
}

const beam::IndexModulated& require_index(const WaveguideArrayDesign& design) {
  const auto* m = std::get_if<beam::IndexModulated>(&design.variant);
  if (m == nullptr) fail(ErrorKind::InvalidArgument, "parameter extraction needs an index-modulated design");
  return *m;
}

// Same design with the pump phase equal to z.
WaveguideArrayDesign phase_parametrized(const WaveguideArrayDesign& design) {
  WaveguideArrayDesign d = design;
  d.phase_schedule = {};
  d.Z_um = kTwoPi;
  return d;
}

struct CellMatrices {
  std::vector<double> onsite;  // raw epsilon_j
  std::vector<double> hop;     // <w_j|H|w_{j+1}>
  double deficit = 0.0;
};

CellMatrices wannier_matrices(const OpticalConstants& constants, const WaveguideArrayDesign& design,
                              const ExtractionOptions& options) {
  const int q = design.beta().q();
  const double ws = design.spacing();
  const double L = q * ws;
  const int n = static_cast<int>(std::lround(L / options.dx));
  const double dx = L / n;
  const double x0 = 0.5 * ws;

  std::vector<LocalizedMode> trial;
  trial.reserve(q);
  for (int j = 1; j <= q; ++j)
    trial.push_back(localized_mode(constants, design, 0.0, j, {options.dx, options.window_spacings}));

  FiniteDifferenceOperator op;
  op.potential = array_potential(constants, design, 0.0, x0, dx, n);
  op.dx = dx;
  op.k0 = constants.k0();
  op.periodic = true;

  const int nk = options.k_points;
  if (nk < 1) fail(ErrorKind::InvalidArgument, "k_points must be >= 1");
  const double window = 0.5 * options.window_spacings * ws;
  const int images = static_cast<int>(std::ceil(window / L)) + 1;

  std::vector<ComplexMatrix> hk(nk);
  std::vector<double> deficits(nk, 0.0);
  std::vector<double> smallest(nk, 0.0);
  parallel_for(static_cast<std::size_t>(nk), [&](std::size_t m) {
    const double theta = kTwoPi * static_cast<double>(m) / nk;
    FiniteDifferenceOperator local = op;
    local.bloch_phase = theta;
    const TridiagonalStates st = lowest_states(local, q);
    const ComplexMatrix psi = st.vectors / std::sqrt(dx);
    ComplexMatrix phi = ComplexMatrix::Zero(n, q);
    for (int j = 0; j < q; ++j)
      for (int r = -images; r <= images; ++r) {
        const Complex f = std::polar(1.0, theta * r);
        for (int i = 0; i < n; ++i) {
          const double g = trial[j].at(x0 + dx * i - r * L);
          if (g != 0.0) phi(i, j) += f * g;
        }
      }
    const ComplexMatrix a = psi.adjoint() * phi * dx;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.adjoint() * a);
    smallest[m] = es.eigenvalues().minCoeff();
    if (!(smallest[m] > 1e-8)) return;
    const ComplexMatrix inv_sqrt =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    const ComplexMatrix u = a * inv_sqrt;
    const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(st.values.data(), q);
    hk[m] = u.adjoint() * e.asDiagonal() * u;
    const ComplexMatrix w = psi * u;
    deficits[m] = ((w.adjoint() * w * dx) - ComplexMatrix::Identity(q, q)).cwiseAbs().maxCoeff();
  });
  for (int m = 0; m < nk; ++m)
    if (!(smallest[m] > 1e-8))
      fail(ErrorKind::FitDegenerate, "band projection onto guide modes is singular (smallest overlap eigenvalue " +
                                         std::to_string(smallest[m]) + ")");

  ComplexMatrix t0 = ComplexMatrix::Zero(q, q);
  ComplexMatrix t1 = ComplexMatrix::Zero(q, q);
  for (int m = 0; m < nk; ++m) {
    const double theta = kTwoPi * static_cast<double>(m) / nk;
    t0 += hk[m];
    t1 += std::polar(1.0, -theta) * hk[m];
  }
  t0 /= nk;
  t1 /= nk;

  CellMatrices out;
  out.deficit = *std::max_element(deficits.begin(), deficits.end());
  for (int j = 0; j < q; ++j) {
    out.onsite.push_back(t0(j, j).real());
    out.hop.push_back(j + 1 < q ? t0(j, j + 1).real() : t1(q - 1, 0).real());
  }
  return out;
}

double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  return a;
}

}  // namespace

double LocalizedMode::at(double xq) const {
  const double u = (xq - x_start) / dx;
  if (!(u >= 0.0)) return 0.0;
  const auto i = static_cast<std::size_t>(u);
  if (i + 1 >= profile.size()) return i + 1 == profile.size() && u == static_cast<double>(i) ? profile[i] : 0.0;
  const double f = u - static_cast<double>(i);
  return (1.0 - f) * profile[i] + f * profile[i + 1];
}

ComplexMatrix FiniteDifferenceOperator::dense() const {
  const int n = static_cast<int>(potential.size());
  return apply_operator(*this, ComplexMatrix::Identity(n, n));
}

TridiagonalStates lowest_states(const FiniteDifferenceOperator& op, int count) {
  check_operator(op, count);
  const int n = static_cast<int>(op.potential.size());
  const int block = std::min(count + 3, n);
  const double vmin = *std::min_element(op.potential.begin(), op.potential.end());
  const double vmax = *std::max_element(op.potential.begin(), op.potential.end());
  const double kin = 1.0 / (op.k0 * op.dx * op.dx);
  const double sigma = vmin - std::max(0.05 * (vmax - vmin), 1e-6 * kin);
  const ShiftedSolver solver(op, sigma);

  // Deterministic start block.
  std::mt19937_64 rng(0x5eed);
  ComplexMatrix x(n, block);
  for (int c = 0; c < block; ++c)
    for (int i = 0; i < n; ++i) {
      const double re = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
      const double im = op.periodic ? static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5 : 0.0;
      x(i, c) = Complex(re, im);
    }

  const double scale = 2.0 * kin + std::max(std::abs(vmin), std::abs(vmax));
  const double tol = 256.0 * std::numeric_limits<double>::epsilon() * scale;
  Eigen::VectorXd values;
  ComplexMatrix ritz;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 20000; ++it) {
    for (int c = 0; c < block; ++c) solver.solve(x.col(c));
    Eigen::HouseholderQR<ComplexMatrix> qr(x);
    const ComplexMatrix qmat = qr.householderQ() * ComplexMatrix::Identity(n, block);
    const ComplexMatrix aq = apply_operator(op, qmat);
    ComplexMatrix small = qmat.adjoint() * aq;
    small = 0.5 * (small + small.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(small);
    values = es.eigenvalues();
    ritz = qmat * es.eigenvectors();
    const ComplexMatrix r = aq * es.eigenvectors() - ritz * values.asDiagonal();
    residual = 0.0;
    for (int c = 0; c < count; ++c) residual = std::max(residual, r.col(c).norm());
    x = ritz;
    if (residual < tol) break;
  }
  if (!(residual < 1e3 * tol))
    fail(ErrorKind::InvalidArgument, "subspace iteration did not converge (residual " + std::to_string(residual) + ")");

  TridiagonalStates out;
  out.values.assign(values.data(), values.data() + count);
  out.vectors = ritz.leftCols(count);
  return out;
}

LocalizedMode localized_mode(const OpticalConstants& constants, const WaveguideArrayDesign& design, double z, int j,
                             const ModeOptions& options) {
  const auto& m = require_index(design);
  if (!(m.ws_um > 2.0 * m.wx_um))
    fail(ErrorKind::InvalidArgument, "guides overlap: ws must exceed 2 wx for isolated-guide modes");
  if (!(options.dx > 0.0) || !(options.window_spacings > 0.0))
    fail(ErrorKind::InvalidArgument, "mode grid spacing and window must be positive");
  const double center = design.guide_center(j, z);
  const double width = options.window_spacings * m.ws_um;
  const int n = static_cast<int>(std::lround(width / options.dx)) + 1;
  LocalizedMode mode;
  mode.dx = options.dx;
  mode.center = center;
  mode.x_start = center - 0.5 * options.dx * (n - 1);

  const double depth = constants.k0() * constants.gamma / constants.n0 * design.index_factor(j, z);
  FiniteDifferenceOperator op;
  op.potential.resize(n);
  for (int i = 0; i < n; ++i) op.potential[i] = -depth * super_gaussian(mode.x(i) - center, m.wx_um);
  op.dx = options.dx;
  op.k0 = constants.k0();
  const TridiagonalStates st = lowest_states(op, 1);
  if (!(st.values[0] < 0.0))
    fail(ErrorKind::NoBoundMode, "guide " + std::to_string(j) + " has no bound mode (lowest level " +
                                     std::to_string(st.values[0]) + " /um)");
  mode.propagation_constant = st.values[0];

  Eigen::Index peak = 0;
  st.vectors.col(0).cwiseAbs().maxCoeff(&peak);
  const Complex rot = std::conj(st.vectors(peak, 0)) / std::abs(st.vectors(peak, 0));
  mode.profile.resize(n);
  const double norm = 1.0 / std::sqrt(options.dx);
  for (int i = 0; i < n; ++i) mode.profile[i] = (st.vectors(i, 0) * rot).real() * norm;
  return mode;
}

CosineFit fit_cosine(const std::vector<double>& values, const Rational& beta) {
  const int q = static_cast<int>(values.size());
  if (q < 3) fail(ErrorKind::FitDegenerate, "a cosine fit needs at least three samples");
  CosineFit f;
  for (double v : values) f.offset += v;
  f.offset /= q;
  Complex h{};
  for (int j = 1; j <= q; ++j) h += (values[j - 1] - f.offset) * std::polar(1.0, -beta.phase(j));
  h *= 2.0 / q;
  f.amplitude = std::abs(h);
  f.phase = std::arg(h);
  return f;
}

ExtractedParams extract_parameters(const OpticalConstants& constants, const WaveguideArrayDesign& design,
                                   const ExtractionOptions& options) {
  const auto& m = require_index(design);
  const int q = m.beta.q();
  if (q < 3) fail(ErrorKind::FitDegenerate, "q = " + std::to_string(q) + " gives fewer than three fit equations");
  if (!(constants.gamma > 0.0)) fail(ErrorKind::NoBoundMode, "gamma must be positive for bound guide modes");

  const CellMatrices mod = wannier_matrices(constants, design, options);
  WaveguideArrayDesign flat = design;
  std::get<beam::IndexModulated>(flat.variant).alpha = 0.0;
  const CellMatrices base = wannier_matrices(constants, flat, options);

  ExtractedParams p;
  for (double h : base.hop) p.J -= h;
  p.J /= q;

  std::vector<double> strengths;
  for (double h : mod.hop) strengths.push_back(-h);
  const CosineFit tf = fit_cosine(strengths, m.beta);
  const CosineFit ef = fit_cosine(mod.onsite, m.beta);
  p.J_mean = tf.offset;
  p.nu_od = tf.amplitude;
  p.delta_phi = p.nu_od > 1e-12 * std::abs(p.J) ? wrap_angle(tf.phase) : 0.0;
  p.nu_d = ef.amplitude * std::cos(ef.phase);
  p.fit_residual = ef.amplitude * std::abs(std::sin(ef.phase));
  for (double e : mod.onsite) p.onsite.push_back(e - ef.offset);
  p.hoppings = strengths;
  p.wannier_orthogonality_deficit = std::max(mod.deficit, base.deficit);

  std::vector<LocalizedMode> modes;
  for (int j = 1; j <= q + 1; ++j)
    modes.push_back(localized_mode(constants, design, 0.0, j, {options.dx, options.window_spacings}));
  for (int j = 0; j < q; ++j) {
    const LocalizedMode& a = modes[j];
    const LocalizedMode& b = modes[j + 1];
    double s = 0.0;
    for (std::size_t i = 0; i < a.profile.size(); ++i) s += a.profile[i] * b.at(a.x(i));
    p.trial_overlaps.push_back(s * a.dx);
  }
  return p;
}

double continuum_gap(const OpticalConstants& constants, const WaveguideArrayDesign& design, int k_points,
                     int phase_points, double dx) {
  if (k_points < 1 || phase_points < 1) fail(ErrorKind::InvalidArgument, "sample counts must be positive");
  const WaveguideArrayDesign d = phase_parametrized(design);
  const int q = d.beta().q();
  const double L = q * d.spacing();
  const int n = static_cast<int>(std::lround(L / dx));
  const double h = L / n;
  const std::size_t total = static_cast<std::size_t>(k_points) * phase_points;
  std::vector<double> gaps(total, 0.0);
  parallel_for(total, [&](std::size_t idx) {
    const int s = static_cast<int>(idx / k_points);
    const int m = static_cast<int>(idx % k_points);
    FiniteDifferenceOperator op;
    op.potential = array_potential(constants, d, kTwoPi * s / phase_points, 0.5 * d.spacing(), h, n);
    op.dx = h;
    op.k0 = constants.k0();
    op.periodic = true;
    op.bloch_phase = kPi * m / std::max(1, k_points - 1);
    const TridiagonalStates st = lowest_states(op, 2);
    gaps[idx] = st.values[1] - st.values[0];
  });
  return *std::min_element(gaps.begin(), gaps.end());
}

}  // namespace aah::tb
