#include "qmux/spectral/channels.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace qmux;
using namespace qmux::spectral;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("grid construction", "[spectral]") {
  SECTION("experiment geometry carries 23 channels") {
    const auto grid = build_grid(GridConfig{});
    CHECK(grid.count() == 23);
    for (const auto& ch : grid.channels) CHECK(ch.dispersion_phase == 0.0);
  }
  SECTION("single-channel degenerate grid") {
    GridConfig config;
    config.span = 160e-6;
    const auto grid = build_grid(config);
    CHECK(grid.count() == 1);
    CHECK(grid.channels.front().omega_c == 0.0);
  }
  SECTION("overlap is rejected") {
    GridConfig config;
    config.span = 100e-6;  // narrower than one channel pitch
    CHECK_THROWS_AS(build_grid(config), std::invalid_argument);
  }
  SECTION("raised-cosine envelope tapers the edges") {
    GridConfig config;
    config.envelope = GridConfig::Envelope::RaisedCosine;
    const auto grid = build_grid(config);
    CHECK(grid.channels.front().gain_magnitude < 1e-12);
    CHECK_THAT(grid.channels[11].gain_magnitude, WithinRel(config.gain_magnitude, 1e-9));
  }
  SECTION("quadratic dispersion is even in the detuning") {
    GridConfig config;
    config.dispersion_kappa = 1e-28;
    const auto grid = build_grid(config);
    CHECK_THAT(grid.channels.front().dispersion_phase,
               WithinRel(grid.channels.back().dispersion_phase, 1e-9));
    CHECK(grid.channels.front().dispersion_phase > 0.0);
  }
}

TEST_CASE("capacity formula", "[spectral]") {
  CHECK(channel_capacity(3.68e-3, 160e-6) == 23);
  // Monotone: non-increasing in the pitch, non-decreasing in the span.
  int previous = 1000;
  for (const double pitch : {100e-6, 160e-6, 200e-6, 400e-6}) {
    const int c = channel_capacity(3.68e-3, pitch);
    REQUIRE(c <= previous);
    previous = c;
  }
  previous = 0;
  for (const double span : {1e-3, 2e-3, 3.68e-3, 8e-3}) {
    const int c = channel_capacity(span, 160e-6);
    REQUIRE(c >= previous);
    previous = c;
  }
}

TEST_CASE("crosstalk mixing", "[spectral]") {
  SECTION("identity model is a no-op") {
    const auto model = CrosstalkModel::identity(4);
    const std::vector<double> intensities{1.0, 2.0, 3.0, 4.0};
    CHECK(apply_crosstalk(model, intensities) == intensities);
  }
  SECTION("symmetric leakage conserves the total intensity") {
    const CrosstalkModel model(5, 0.07, 0.07);
    const std::vector<double> intensities{1.0, 0.2, 3.0, 0.4, 2.2};
    const auto mixed = apply_crosstalk(model, intensities);
    double before = 0.0, after = 0.0;
    for (double v : intensities) before += v;
    for (double v : mixed) after += v;
    CHECK_THAT(after, WithinAbs(before, 1e-12));
  }
  SECTION("a neighbor's intensity leaks in proportion") {
    const CrosstalkModel model(3, 0.0, 0.1);
    const std::vector<double> intensities{1.0, 0.0, 0.0};
    const auto mixed = apply_crosstalk(model, intensities);
    CHECK_THAT(mixed[0], WithinAbs(0.9, 1e-15));
    CHECK_THAT(mixed[1], WithinAbs(0.0, 1e-15));  // right-leak only
    const CrosstalkModel left_model(3, 0.1, 0.0);
    const auto left_mixed = apply_crosstalk(left_model, intensities);
    CHECK_THAT(left_mixed[1], WithinAbs(0.1, 1e-15));
  }
  SECTION("model validation") {
    CHECK_THROWS_AS(CrosstalkModel(3, 0.6, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(CrosstalkModel(0, 0.0, 0.0), std::invalid_argument);
    const auto model = CrosstalkModel::identity(3);
    CHECK_THROWS_AS(apply_crosstalk(model, {1.0, 2.0}), std::invalid_argument);
  }
}

namespace {

// Interference intensity of a two-channel toy: I_c = 2 + 2 cos(phi_c),
// with a fraction eps of the neighbor leaking into channel 1's pixel.
std::vector<std::vector<double>> leaky_intensity_grid(double eps_right, int points) {
  std::vector<std::vector<double>> grid(static_cast<std::size_t>(points));
  const CrosstalkModel model(2, 0.0, eps_right);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(points));
    const double phi1 = 2.0 * kPi * i / points;
    for (int j = 0; j < points; ++j) {
      const double phi2 = 2.0 * kPi * j / points;
      const std::vector<double> intensities{2.0 + 2.0 * std::cos(phi1),
                                            2.0 + 2.0 * std::cos(phi2)};
      grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          apply_crosstalk(model, intensities)[0];
    }
  }
  return grid;
}

double amplitude(const std::vector<double>& curve) {
  double lo = curve.front(), hi = curve.front();
  for (double v : curve) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

}  // namespace

TEST_CASE("crosstalk error metric", "[spectral]") {
  SECTION("constant intensity gives exactly zero") {
    const std::vector<std::vector<double>> grid(8, std::vector<double>(8, 3.7));
    for (double v : crosstalk_error_metric(grid)) REQUIRE(v == 0.0);
  }
  SECTION("zero leakage gives zero within numerical dust") {
    const auto grid = leaky_intensity_grid(0.0, 16);
    for (double v : crosstalk_error_metric(grid)) REQUIRE_THAT(v, WithinAbs(0.0, 1e-12));
  }
  SECTION("error amplitude grows with the leakage") {
    double previous = 0.0;
    for (const double eps : {0.01, 0.05, 0.1}) {
      const auto err = crosstalk_error_metric(leaky_intensity_grid(eps, 16));
      const double a = amplitude(err);
      REQUIRE(a > previous);
      previous = a;
    }
    // The deviation is the leaked fringe: amplitude eps * 4.
    const auto err = crosstalk_error_metric(leaky_intensity_grid(0.1, 16));
    CHECK_THAT(amplitude(err), WithinAbs(0.4, 1e-12));
  }
  SECTION("ragged grids are rejected") {
    std::vector<std::vector<double>> grid{{1.0, 2.0}, {1.0}};
    CHECK_THROWS_AS(crosstalk_error_metric(grid), std::invalid_argument);
  }
}

TEST_CASE("optics design rules", "[spectral]") {
  const double lambda = 1.56e-6;
  const double omega_p = 2.0 * (2.0 * kPi * kSpeedOfLight / lambda);
  const double omega = 0.05 * omega_p / 2.0;

  SECTION("focal length matches the diffraction-limit rule") {
    const auto design = design_optics(10e-6, 10e-3, lambda, 3.68e-3, omega, omega_p);
    CHECK_THAT(design.focal_length, WithinRel(0.4 * 10e-6 * 10e-3 / lambda, 1e-12));
    CHECK_THAT(design.focal_length, WithinAbs(0.0256410256, 1e-9));
    CHECK(design.capacity == 23);
    CHECK(design.grating_period > 0.0);
  }
  SECTION("focal length is linear in the pixel size") {
    const auto a = design_optics(10e-6, 10e-3, lambda, 3.68e-3, omega, omega_p);
    const auto b = design_optics(20e-6, 10e-3, lambda, 3.68e-3, omega, omega_p);
    CHECK_THAT(b.focal_length, WithinRel(2.0 * a.focal_length, 1e-12));
  }
  SECTION("invalid geometry is rejected") {
    CHECK_THROWS_AS(design_optics(10e-6, 10e-3, lambda, 3.68e-3, omega_p / 2.0, omega_p),
                    std::invalid_argument);
    CHECK_THROWS_AS(design_optics(10e-6, 2e-3, lambda, 3.68e-3, omega, omega_p),
                    std::invalid_argument);
  }
}

TEST_CASE("dispersion compensation", "[spectral]") {
  SECTION("calibrated phases cancel the offsets") {
    GridConfig config;
    config.dispersion_kappa = 5e-29;
    const auto grid = build_grid(config);
    std::vector<double> measured;
    for (const auto& ch : grid.channels) measured.push_back(ch.dispersion_phase);
    const auto result = dispersion_compensate(grid, measured);
    for (double offset : result.residual_offsets) REQUIRE_THAT(offset, WithinAbs(0.0, 1e-12));
    // Weak dispersion: intra-channel phase variation is negligible.
    for (double contrast : result.fringe_contrast) REQUIRE(contrast > 0.999);
  }
  SECTION("strong intra-channel curvature costs contrast") {
    GridConfig config;
    config.dispersion_kappa = 1.5e-26;
    const auto grid = build_grid(config);
    std::vector<double> measured(grid.channels.size(), 0.0);
    const auto result = dispersion_compensate(grid, measured);
    // Edge channels see the steepest phase slope across their band.
    CHECK(result.fringe_contrast.front() < 0.9);
    CHECK(result.fringe_contrast[11] > result.fringe_contrast.front());
  }
  SECTION("zero dispersion is a no-op") {
    const auto grid = build_grid(GridConfig{});
    const std::vector<double> measured(grid.channels.size(), 0.0);
    const auto result = dispersion_compensate(grid, measured);
    for (double offset : result.residual_offsets) REQUIRE(offset == 0.0);
    for (double contrast : result.fringe_contrast) REQUIRE_THAT(contrast, WithinAbs(1.0, 1e-12));
  }
  SECTION("calibration vector must match the grid") {
    const auto grid = build_grid(GridConfig{});
    CHECK_THROWS_AS(dispersion_compensate(grid, {0.0}), std::invalid_argument);
  }
}
