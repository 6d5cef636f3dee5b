#pragma once

#include "qmux/adversary/attacks.hpp"
#include "qmux/exact_oracle.hpp"
#include "qmux/perturbative_state.hpp"
#include "qmux/qkd/session.hpp"
#include "qmux/spectral/channels.hpp"
#include "qmux/teleport/teleport.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace qmux::harness {

struct PropertyResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;     // worst deviation observed (property-specific units)
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<PropertyResult> properties;
  std::vector<std::string> notes;  // informational, not pass/fail
  bool all_passed() const {
    for (const auto& p : properties)
      if (!p.passed) return false;
    return true;
  }
};

namespace validate_detail {

inline PerturbativeKet interferometer(double g, double phi) {
  PerturbativeKet ket =
      opa_apply(PerturbativeKet::vacuum(), ComplexGain(g), 0.0, Subsystem::Bob);
  ket = phase_shift(ket, phi, 0.0, Subsystem::Bob);
  return opa_apply(ket, ComplexGain(g), 0.0, Subsystem::Bob);
}

inline PropertyResult check(const std::string& name, double worst, double tolerance,
                            std::string detail = {}) {
  return {name, worst <= tolerance, worst, tolerance, std::move(detail)};
}

}  // namespace validate_detail

// Expectation-mode invariant suite: every closed form checked against the
// quantum pipeline or the exact propagator, plus the convention reports.
inline ValidationReport run_validation() {
  using namespace validate_detail;
  ValidationReport report;

  {  // Interference law, 16 phases x 3 gains.
    double worst = 0.0;
    for (const double g : {0.01, 0.05, 0.1})
      for (int k = 0; k < 16; ++k) {
        const double phi = 2.0 * kPi * k / 16.0;
        const double n =
            mean_photon_number(interferometer(g, phi), Subsystem::Bob, Tone::Signal);
        worst = std::max(worst, std::abs(n - g * g * (2.0 + 2.0 * std::cos(phi))));
      }
    report.properties.push_back(check("interference-law", worst, 1e-12));
  }

  {  // Exact-propagator agreement within relative 2 g^2.
    double worst = 0.0;
    for (const double g : {0.01, 0.05, 0.1})
      for (int k = 0; k < 16; ++k) {
        const double phi = 2.0 * kPi * k / 16.0;
        auto state =
            two_mode_squeeze(TwoModeFock::vacuum(), g, squeeze_phase_for_opa(0.0, 0.0));
        state = fock_phase_shift(state, phi, 0.0);
        state = two_mode_squeeze(state, g, squeeze_phase_for_opa(0.0, 0.0));
        const double n_exact = state.mean_photon_a();
        const double n_first =
            mean_photon_number(interferometer(g, phi), Subsystem::Bob, Tone::Signal);
        const double budget = 2.0 * g * g * n_first + 1e-13;
        worst = std::max(worst, std::abs(n_exact - n_first) - budget);
      }
    report.properties.push_back(
        check("exact-oracle-agreement", worst, 0.0, "slack left after the 2g^2 budget"));
  }

  {  // Beamsplitter unitarity across R.
    double worst = 0.0;
    for (const auto convention : {BsConvention::Symmetric, BsConvention::RealAsymmetric})
      for (int i = 0; i <= 20; ++i) {
        auto ket = interferometer(0.1, 0.0);
        (void)ket;
        auto alice = phase_shift(
            opa_apply(PerturbativeKet::vacuum(), ComplexGain(0.1), 0.0, Subsystem::Bob),
            0.6, 0.0, Subsystem::Bob);
        const double before = alice.norm_squared();
        const auto after = beamsplit_to_eve(alice, i / 20.0, convention);
        worst = std::max(worst, std::abs(after.norm_squared() - before));
      }
    report.properties.push_back(check("beamsplitter-unitarity", worst, 1e-12));
  }

  {  // The two tap conventions agree on Bob-side marginals.
    double worst = 0.0;
    for (int i = 0; i <= 8; ++i)
      for (int k = 0; k < 8; ++k) {
        auto alice = phase_shift(
            opa_apply(PerturbativeKet::vacuum(), ComplexGain(0.1), 0.0, Subsystem::Bob),
            2.0 * kPi * k / 8.0, 0.0, Subsystem::Bob);
        const auto sym = outcome_distribution(
            beamsplit_to_eve(alice, i / 8.0, BsConvention::Symmetric), Subsystem::Bob);
        const auto real = outcome_distribution(
            beamsplit_to_eve(alice, i / 8.0, BsConvention::RealAsymmetric), Subsystem::Bob);
        for (int ns = 0; ns <= 1; ++ns)
          for (int ni = 0; ni <= 1; ++ni)
            worst = std::max(worst, std::abs(sym(ns, ni) - real(ns, ni)));
      }
    report.properties.push_back(check("convention-bracketing", worst, 1e-12));
  }

  {  // Eve's closed-form outcome table vs the pipeline, both conventions.
    double worst = 0.0;
    const double g = 0.2;
    for (const auto convention : {BsConvention::RealAsymmetric, BsConvention::Symmetric})
      for (const double r : {0.1, 0.3, 0.5, 0.9})
        for (const double phi_ae : {0.0, kPi / 2.0, kPi, -kPi / 2.0}) {
          const auto closed = adversary::eve_outcome_probs(phi_ae, r, g, convention);
          auto staged = phase_shift(
              opa_apply(PerturbativeKet::vacuum(), ComplexGain(g), 0.0, Subsystem::Bob),
              phi_ae, 0.0, Subsystem::Bob);
          auto joint = beamsplit_to_eve(staged, r, convention);
          joint = opa_apply(joint, ComplexGain(g), 0.0, Subsystem::Eve);
          const auto piped = outcome_distribution(joint, Subsystem::Eve);
          for (int ns = 0; ns <= 1; ++ns)
            for (int ni = 0; ni <= 1; ++ni)
              worst = std::max(worst, std::abs(closed(ns, ni) - piped(ns, ni)));
        }
    report.properties.push_back(check("eve-outcome-table", worst, 1e-12));
  }

  {  // Wrong-basis columns identical.
    double worst = 0.0;
    for (const double r : {0.05, 0.3, 0.7, 1.0}) {
      const auto plus = adversary::eve_outcome_probs(kPi / 2.0, r, 0.2);
      const auto minus = adversary::eve_outcome_probs(-kPi / 2.0, r, 0.2);
      for (int ns = 0; ns <= 1; ++ns)
        for (int ni = 0; ni <= 1; ++ni)
          worst = std::max(worst, std::abs(plus(ns, ni) - minus(ns, ni)));
    }
    report.properties.push_back(check("wrong-basis-indistinguishable", worst, 0.0));
  }

  {  // Steal-resend conditional closed forms vs the pipeline.
    double worst = 0.0;
    const double g = 0.1;
    for (const double t2 : {0.0, 0.25, 0.5, 0.75, 1.0})
      for (const double phi : {0.0, kPi})
        for (const int scenario : {0, 1, 2}) {
          const double phi_e = scenario == 0 ? kPi / 2.0 : 0.0;
          const double guess = scenario == 0   ? 0.0
                               : scenario == 1 ? wrap_phase(phi + kPi)
                                               : phi;
          auto staged = phase_shift(
              opa_apply(PerturbativeKet::vacuum(), ComplexGain(g), 0.0, Subsystem::Bob),
              phi + phi_e, 0.0, Subsystem::Bob);
          auto joint = beamsplit_to_eve(staged, 1.0 - t2, BsConvention::RealAsymmetric);
          joint = opa_apply(joint, ComplexGain(g), 0.0, Subsystem::Eve);
          const auto remainder = project_eve_vacuum(joint);
          const auto toward_bob = adversary::eve_replenish(
              adversary::choose_replenish(adversary::EveOutcome::NoPhoton, guess, phi_e, t2),
              remainder, ComplexGain(g));
          auto at_bob = opa_apply(toward_bob, ComplexGain(g), 0.0, Subsystem::Bob);
          const double n = mean_photon_number(at_bob, Subsystem::Bob, Tone::Signal) / (g * g);
          const auto c = scenario == 0
                             ? adversary::StealResendCase::ManipulatedWrongBasis
                             : scenario == 1 ? adversary::StealResendCase::ManipulatedWrongBit
                                             : adversary::StealResendCase::ManipulatedCorrect;
          worst = std::max(
              worst, std::abs(n - adversary::steal_resend_bob_expectation(c, t2, phi)));
        }
    report.properties.push_back(check("steal-resend-conditionals", worst, 1e-12));
  }

  {  // Expectation-mode session contrast equals the closed-form predictors.
    double worst = 0.0;
    qkd::SessionConfig session;
    session.channels = 1;
    session.gain_magnitude = 0.01;
    session.bits_per_channel = 1;
    for (const double t2 : {0.0, 0.25, 0.5, 0.75, 0.95, 1.0}) {
      const auto rep = qkd::expectation_channel_report(
          session, 0, adversary::AttackModel::steal(1.0 - t2));
      worst = std::max(worst, std::abs(rep.contrast - adversary::steal_contrast(t2)));
    }
    for (const double r : {0.2, 0.5, 0.8}) {
      const auto rep = qkd::expectation_channel_report(
          session, 0, adversary::AttackModel::steal_resend(r));
      worst = std::max(worst,
                       std::abs(rep.contrast - adversary::predicted_contrast(
                                                   adversary::AttackModel::steal_resend(r),
                                                   session.gain_magnitude)));
    }
    {
      const auto rep = qkd::expectation_channel_report(
          session, 0, adversary::AttackModel::intercept_resend());
      worst = std::max(worst, std::abs(rep.contrast - 0.5));
    }
    report.properties.push_back(check("session-contrast-consistency", worst, 1e-12));
  }

  {  // Mismatched bases leak nothing about the bit (closed form).
    double worst = 0.0;
    const ComplexGain gain(0.01);
    for (const int bit : {0, 1}) {
      const double phi_a = qkd::alice_encode(bit, qkd::Basis::B1);
      auto ket = phase_shift(
          opa_apply(PerturbativeKet::vacuum(), gain, 0.0, Subsystem::Bob), phi_a, 0.0,
          Subsystem::Bob);
      for (int window = 1; window <= 2; ++window) {
        auto at_bob =
            phase_shift(ket, qkd::bob_phase(qkd::Basis::B2, window), 0.0, Subsystem::Bob);
        at_bob = opa_apply(at_bob, gain, 0.0, Subsystem::Bob);
        worst = std::max(worst,
                         std::abs(mean_photon_number(at_bob, Subsystem::Bob, Tone::Signal) -
                                  2.0 * gain.magnitude() * gain.magnitude()));
      }
    }
    report.properties.push_back(check("basis-secrecy-closed-form", worst, 1e-12));
  }

  {  // Teleportation output identity on a deterministic grid.
    double worst = 0.0;
    for (const double g : {0.0, 0.5, 1.0, 2.0, 4.0})
      for (const double t : {0.6, 0.9, 0.999}) {
        const teleport::SqueezeSettings settings(g, t);
        const auto out = teleport::teleport_symbolic(1.3, -0.4, settings);
        worst = std::max(worst,
                         std::abs(out.x_coef(teleport::Source::Input) - Complex(1.3 * t)));
        worst = std::max(
            worst, std::abs(out.x_coef(teleport::Source::Opa2) - 2.0 * t * std::exp(-g)));
        worst = std::max(
            worst, std::abs(out.y_coef(teleport::Source::Opa1) - 2.0 * t * std::exp(-g)));
        worst = std::max(worst, std::abs(out.x_coef(teleport::Source::Opa1)));
        worst = std::max(worst, std::abs(out.y_coef(teleport::Source::Opa2)));
      }
    report.properties.push_back(check("teleport-symbolic-identity", worst, 1e-12));
  }

  {  // Added-noise monotonicity.
    double worst = 0.0;
    double previous = 2.0;
    for (double g = 0.0; g <= 6.0; g += 0.2) {
      const double v = teleport::added_noise_variance(g);
      if (v >= previous) worst = std::max(worst, v - previous + 1.0);
      previous = v;
    }
    report.properties.push_back(check("added-noise-monotone", worst, 0.0));
  }

  {  // Crosstalk metric nulls.
    double worst = 0.0;
    const std::vector<std::vector<double>> constant(8, std::vector<double>(8, 2.5));
    for (double v : spectral::crosstalk_error_metric(constant))
      worst = std::max(worst, std::abs(v));
    report.properties.push_back(check("crosstalk-metric-null", worst, 1e-12));
  }

  // ---- informational reports (convention forks and known table quirks) ----
  {
    std::ostringstream note;
    note << "eve pair weight P(1,1)*Z/g^2 at R=0.3: table1 convention {phi_AE=0: "
         << adversary::eve_outcome_probs(0.0, 0.3, 0.2).p[3] *
                adversary::eve_outcome_probs(0.0, 0.3, 0.2).z / 0.04
         << ", pi: "
         << adversary::eve_outcome_probs(kPi, 0.3, 0.2).p[3] *
                adversary::eve_outcome_probs(kPi, 0.3, 0.2).z / 0.04
         << "}, eq9 convention {phi_AE=0: "
         << adversary::eve_outcome_probs(0.0, 0.3, 0.2, BsConvention::Symmetric).p[3] *
                adversary::eve_outcome_probs(0.0, 0.3, 0.2, BsConvention::Symmetric).z / 0.04
         << ", pi: "
         << adversary::eve_outcome_probs(kPi, 0.3, 0.2, BsConvention::Symmetric).p[3] *
                adversary::eve_outcome_probs(kPi, 0.3, 0.2, BsConvention::Symmetric).z / 0.04
         << "}; the published table matches table1, the printed state"
            " expression matches eq9; both are exposed and the default is table1.";
    report.notes.push_back(note.str());
  }
  {
    std::ostringstream note;
    const double g = 0.2, t2 = 0.6;
    note << "published no-photon weight (T - 1/g)^2 g^2 = " << std::pow(t2 * g - 1.0, 2)
         << " at T=0.6, g=0.2 mixes orders in g; the first-order vacuum weight is 1 and"
            " is what both routes here use.";
    report.notes.push_back(note.str());
  }
  {
    // Steal-resend vs steal crossover at g = 0.2 under both conventions.
    for (const auto convention : {BsConvention::RealAsymmetric, BsConvention::Symmetric}) {
      double crossover = 0.0;
      bool above_prev = true;
      for (int i = 1; i < 100; ++i) {
        const double t2 = i / 100.0;
        const bool above =
            adversary::steal_resend_average_photon_numbers(1.0 - t2, 0.2, convention)
                .contrast > adversary::steal_contrast(t2);
        if (above_prev && !above) crossover = t2;
        above_prev = above;
      }
      std::ostringstream note;
      note << "steal-resend/steal highest crossover at g=0.2, "
           << (convention == BsConvention::RealAsymmetric ? "table1" : "eq9")
           << " convention: T ~= " << crossover
           << " (the resend strategy conceals better only below the crossover).";
      report.notes.push_back(note.str());
    }
  }

  return report;
}

}  // namespace qmux::harness
