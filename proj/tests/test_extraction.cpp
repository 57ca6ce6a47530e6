#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "aah/error.hpp"
#include "aah/extraction.hpp"

using namespace aah;
using namespace aah::tb;
using std::numbers::pi;

namespace {

WaveguideArrayDesign index_design(double alpha = 0.5, Rational beta = {1, 3}) {
  WaveguideArrayDesign d;
  d.variant = beam::IndexModulated{alpha, beta, 10.0, 3.0};
  return d;
}

OpticalConstants optics(double gamma) {
  OpticalConstants c;
  c.gamma = gamma;
  return c;
}

}  // namespace

TEST_CASE("finite-difference eigenpairs match dense diagonalization") {
  for (bool periodic : {false, true}) {
    FiniteDifferenceOperator op;
    op.dx = 0.3;
    op.k0 = 14.46;
    op.periodic = periodic;
    op.bloch_phase = 0.7;
    for (int i = 0; i < 60; ++i) {
      const double a = (i - 30) * 0.3 / 3.0, b = (i - 10) * 0.3 / 3.0;
      op.potential.push_back(-0.01 * std::exp(-std::pow(a, 6)) - 0.006 * std::exp(-std::pow(b, 6)));
    }
    const TridiagonalStates st = lowest_states(op, 3);
    const ComplexMatrix h = op.dense();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    for (int n = 0; n < 3; ++n) {
      CHECK(std::abs(st.values[n] - es.eigenvalues()(n)) < 1e-12);
      const ComplexVector v = st.vectors.col(n);
      CHECK(std::abs(v.norm() - 1.0) < 1e-12);
      CHECK((h * v - st.values[n] * v).norm() < 1e-10);
    }
  }
}

TEST_CASE("localized mode") {
  CHECK_THROWS_AS(localized_mode(optics(0.0), index_design(0.0), 0.0, 0), Error);
  try {
    localized_mode(optics(0.0), index_design(0.0), 0.0, 0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoBoundMode);
  }

  const LocalizedMode m = localized_mode(optics(9e-4), index_design(0.0), 0.0, 2);
  double norm = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < m.profile.size(); ++i) {
    norm += m.profile[i] * m.profile[i] * m.dx;
    mean += m.x(i) * m.profile[i] * m.profile[i] * m.dx;
  }
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(m.propagation_constant < 0.0);
  // tails decay as exp(-kappa |x|) with kappa = sqrt(2 k0 |beta|)
  const double kappa = std::sqrt(2.0 * optics(9e-4).k0() * -m.propagation_constant);
  const double slope = (std::log(m.at(20.0 + 12.0)) - std::log(m.at(20.0 + 8.0))) / 4.0;
  CHECK(slope == doctest::Approx(-kappa).epsilon(0.02));
}

TEST_CASE("deeper guides bind more strongly") {
  double previous = 0.0;
  for (double alpha : {-0.6, -0.3, 0.0, 0.3, 0.6}) {
    // guide 0 has factor 1 + alpha
    const LocalizedMode m = localized_mode(optics(9e-4), index_design(alpha), 0.0, 0);
    if (alpha > -0.6) CHECK(m.propagation_constant < previous);
    previous = m.propagation_constant;
  }
}

TEST_CASE("cosine fit") {
  const Rational beta(1, 3);
  std::vector<double> v;
  for (int j = 1; j <= 3; ++j) v.push_back(2.0 + 0.5 * std::cos(beta.phase(j) + 0.4));
  const CosineFit f = fit_cosine(v, beta);
  CHECK(f.offset == doctest::Approx(2.0));
  CHECK(f.amplitude == doctest::Approx(0.5));
  CHECK(f.phase == doctest::Approx(0.4));
  CHECK_THROWS_AS(fit_cosine({1.0, 2.0}, Rational(1, 2)), Error);
}

TEST_CASE("extracted parameters at both contrasts") {
  // reference values from an independent dense-diagonalization
  // implementation of the same projected-Wannier construction
  struct Case {
    double gamma, J, nu_d, nu_od;
  };
  for (const Case& c : {Case{9e-4, 3.76394776e-4, -35.5605841e-4, 0.62698917e-4},
                        Case{5e-4, 5.22766071e-4, -16.8270372e-4, 0.80050826e-4}}) {
    const ExtractedParams p = extract_parameters(optics(c.gamma), index_design());
    CHECK(p.J == doctest::Approx(c.J).epsilon(1e-7));
    CHECK(p.nu_d == doctest::Approx(c.nu_d).epsilon(1e-7));
    CHECK(p.nu_od == doctest::Approx(c.nu_od).epsilon(1e-6));
    CHECK(p.delta_phi == doctest::Approx(pi / 3).epsilon(1e-6));
    CHECK(p.J > 0.0);
    CHECK(p.nu_d < 0.0);
    CHECK(std::abs(p.nu_d) > 10.0 * p.nu_od);
    CHECK(p.nu_od < 0.3 * p.J);
    CHECK(p.wannier_orthogonality_deficit < 1e-10);
    CHECK(p.fit_residual < 1e-10);
    REQUIRE(p.hoppings.size() == 3);
    REQUIRE(p.trial_overlaps.size() == 3);
  }
  CHECK(extract_parameters(optics(9e-4), index_design()).J < extract_parameters(optics(5e-4), index_design()).J);
}

TEST_CASE("unmodulated array has no modulation amplitudes") {
  const ExtractedParams p = extract_parameters(optics(9e-4), index_design(0.0));
  CHECK(std::abs(p.nu_od) < 1e-9 * p.J);
  CHECK(std::abs(p.nu_d) < 1e-9 * p.J);
  CHECK(p.J_mean == doctest::Approx(p.J).epsilon(1e-12));
}

TEST_CASE("extraction is stable under window and grid changes") {
  const ExtractedParams base = extract_parameters(optics(9e-4), index_design());
  ExtractionOptions wide;
  wide.window_spacings = 8.0;
  ExtractionOptions fine;
  fine.dx = 0.025;
  for (const auto& o : {wide, fine}) {
    const ExtractedParams p = extract_parameters(optics(9e-4), index_design(), o);
    CHECK(std::abs(p.J - base.J) < 0.02 * base.J);
    CHECK(std::abs(p.nu_d - base.nu_d) < 0.02 * std::abs(base.nu_d));
    CHECK(std::abs(p.nu_od - base.nu_od) < 0.02 * base.nu_od);
  }
}

TEST_CASE("extraction preconditions") {
  try {
    extract_parameters(optics(9e-4), index_design(0.5, {1, 2}));
    FAIL("expected FitDegenerate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FitDegenerate);
  }
  WaveguideArrayDesign spacing;
  spacing.variant = beam::SpacingModulated{};
  CHECK_THROWS_AS(extract_parameters(optics(5e-4), spacing), Error);
}

TEST_CASE("continuum gap is positive for the pumping designs") {
  WaveguideArrayDesign d = index_design();
  const double g9 = continuum_gap(optics(9e-4), d);
  CHECK(g9 > 0.0);
  CHECK(g9 < 0.01);
}
