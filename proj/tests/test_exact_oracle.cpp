#include "qmux/exact_oracle.hpp"
#include "qmux/perturbative_state.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace qmux;
using Catch::Matchers::WithinAbs;

namespace {

// Same pipeline as the first-order algebra, run exactly: squeeze, per-mode
// phases, squeeze.
double exact_interferometer_count(double g, double phi_signal, double phi_idler) {
  auto state = two_mode_squeeze(TwoModeFock::vacuum(), g, squeeze_phase_for_opa(0.0, 0.0));
  state = fock_phase_shift(state, phi_signal, phi_idler);
  state = two_mode_squeeze(state, g, squeeze_phase_for_opa(0.0, 0.0));
  return state.mean_photon_a();
}

}  // namespace

TEST_CASE("zero gain is the identity", "[oracle]") {
  const auto state = two_mode_squeeze(TwoModeFock::vacuum(), 0.0, 0.0);
  CHECK_THAT(std::abs(state.amplitude(0, 0) - std::complex<double>(1.0, 0.0)),
             WithinAbs(0.0, 1e-14));
  CHECK_THAT(state.norm(), WithinAbs(1.0, 1e-14));
}

TEST_CASE("squeezed vacuum pair population matches sinh^2", "[oracle]") {
  const auto state = two_mode_squeeze(TwoModeFock::vacuum(), 0.1, 0.0);
  // Frozen from sinh(0.1)^2.
  CHECK_THAT(state.mean_photon_a(), WithinAbs(0.0100333778095379, 1e-12));
  CHECK_THAT(state.mean_photon_b(), WithinAbs(0.0100333778095379, 1e-12));
  CHECK_THAT(state.norm(), WithinAbs(1.0, 1e-10));
}

TEST_CASE("opposite-phase squeezers invert each other", "[oracle]") {
  auto state = two_mode_squeeze(TwoModeFock::vacuum(), 0.1, 0.0);
  state = two_mode_squeeze(state, 0.1, kPi);
  CHECK_THAT(std::abs(state.amplitude(0, 0)), WithinAbs(1.0, 1e-10));
  CHECK_THAT(state.mean_photon_a(), WithinAbs(0.0, 1e-10));
}

TEST_CASE("composed squeezers double the effective gain", "[oracle]") {
  // Two in-phase passes at g = 0.05: population sinh^2(0.1), first order 4 g^2.
  const double n = exact_interferometer_count(0.05, 0.0, 0.0);
  CHECK_THAT(n, WithinAbs(0.0100333778095379, 1e-10));
  const double first_order = 4.0 * 0.05 * 0.05;
  CHECK_THAT(std::abs(n - first_order) / first_order, WithinAbs(0.0, 2.0 * 0.05 * 0.05));
}

TEST_CASE("perturbative pipeline agrees with the exact propagator", "[oracle]") {
  for (const double g : {0.01, 0.05, 0.1}) {
    for (int k = 0; k < 16; ++k) {
      const double phi = 2.0 * kPi * k / 16.0;

      PerturbativeKet ket =
          opa_apply(PerturbativeKet::vacuum(), ComplexGain(g), 0.0, Subsystem::Bob);
      ket = phase_shift(ket, phi, 0.0, Subsystem::Bob);
      ket = opa_apply(ket, ComplexGain(g), 0.0, Subsystem::Bob);
      const double n_first_order = mean_photon_number(ket, Subsystem::Bob, Tone::Signal);

      const double n_exact = exact_interferometer_count(g, phi, 0.0);
      REQUIRE_THAT(std::abs(n_exact - n_first_order),
                   WithinAbs(0.0, 2.0 * g * g * n_first_order + 1e-13));
    }
  }
}

TEST_CASE("phase-sum semantics match between the routes", "[oracle]") {
  // Splitting the phase across signal and idler changes nothing.
  const double g = 0.08;
  const double split_a = exact_interferometer_count(g, 0.9, 0.4);
  const double split_b = exact_interferometer_count(g, 0.0, 1.3);
  CHECK_THAT(split_a, WithinAbs(split_b, 1e-12));
}

TEST_CASE("cutoff leakage is rejected", "[oracle]") {
  CHECK_THROWS_AS(two_mode_squeeze(TwoModeFock::vacuum(), 0.5, 0.0), OracleError);
  // Admissible gains stay far below the leakage guard.
  const auto state = two_mode_squeeze(TwoModeFock::vacuum(), 0.1, 0.0);
  CHECK(state.top_level_population() < 1e-8);
}
