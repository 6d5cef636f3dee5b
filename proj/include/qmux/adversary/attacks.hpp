#pragma once

#include "qmux/perturbative_state.hpp"
#include "qmux/rng.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qmux::adversary {

struct AttackModel {
  enum class Kind { None, InterceptResend, Steal, StealResend };

  Kind kind = Kind::None;
  double reflectance = 0.0;
  BsConvention convention = BsConvention::RealAsymmetric;

  static AttackModel none() { return {}; }
  static AttackModel intercept_resend() { return {Kind::InterceptResend, 0.0}; }
  static AttackModel steal(double r, BsConvention c = BsConvention::RealAsymmetric) {
    check_reflectance(r);
    return {Kind::Steal, r, c};
  }
  static AttackModel steal_resend(double r, BsConvention c = BsConvention::RealAsymmetric) {
    check_reflectance(r);
    return {Kind::StealResend, r, c};
  }

  bool taps_channel() const {
    return (kind == Kind::Steal || kind == Kind::StealResend) && reflectance > 0.0;
  }

  static void check_reflectance(double r) {
    if (!(r >= 0.0) || r > 1.0)
      throw std::invalid_argument("reflectance out of range [0,1]");
  }
};

// Eve's replenish move after her measurement (the concealing strategy table):
// a fresh pair at her guessed phase, a full state replacement, or the
// phase-unshift + weak amplification that patches the surviving state.
struct EveAction {
  enum class Kind { GeneratePair, ReplaceState, Manipulate };
  Kind kind = Kind::GeneratePair;
  double phase_a_prime = 0.0;  // Eve's stand-in for Alice's phase
  double phase_unshift = 0.0;  // Manipulate only: -phi_E applied first
  double alpha = 0.0;          // Manipulate only: gain scale 1 - t^2
};

enum class EveOutcome { Pair, SplitSignal, SplitIdler, NoPhoton };

namespace detail {
inline bool is_half_pi_multiple(double phi) {
  const double q = phi / (kPi / 2.0);
  return std::abs(q - std::round(q)) < 1e-9;
}
}  // namespace detail

// Closed-form outcome weights of Eve's measurement after her completing OPA,
// tabulated at phi_AE in {0, +-pi/2, pi}. In the first-order algebra the
// vacuum outcome has weight 1, the pair outcome |1 + s R e^{i phi_AE}|^2 g^2
// (s = +1 for RealAsymmetric, -1 for Symmetric), and each lone-photon outcome
// R T g^2.
inline OutcomeDistribution eve_outcome_probs(double phi_ae, double reflectance, double g,
                                             BsConvention convention = BsConvention::RealAsymmetric) {
  AttackModel::check_reflectance(reflectance);
  if (!detail::is_half_pi_multiple(phi_ae))
    throw std::invalid_argument("eve_outcome_probs tabulated only at multiples of pi/2");
  const double r2 = reflectance;
  const double t2 = 1.0 - reflectance;
  const double sign = convention == BsConvention::RealAsymmetric ? 1.0 : -1.0;
  const Complex pair_amp = 1.0 + sign * r2 * std::exp(Complex(0.0, phi_ae));

  OutcomeDistribution dist;
  dist.p[0] = 1.0;                         // no photons
  dist.p[1] = r2 * t2 * g * g;             // signal only
  dist.p[2] = r2 * t2 * g * g;             // idler only
  dist.p[3] = std::norm(pair_amp) * g * g; // pair
  dist.z = dist.p[0] + dist.p[1] + dist.p[2] + dist.p[3];
  for (double& v : dist.p) v /= dist.z;
  return dist;
}

// Eve's maximum-a-posteriori guess for phi_AE in the matched-basis column
// pair {0, pi}, derived from the outcome-weight ratios rather than pinned to
// one convention.
inline double eve_guess_for_pair(double reflectance, double g, BsConvention convention) {
  const auto at0 = eve_outcome_probs(0.0, reflectance, g, convention);
  const auto atpi = eve_outcome_probs(kPi, reflectance, g, convention);
  return at0(1, 1) >= atpi(1, 1) ? 0.0 : kPi;
}

inline double eve_guess_for_none(double reflectance, double g, BsConvention convention) {
  const auto at0 = eve_outcome_probs(0.0, reflectance, g, convention);
  const auto atpi = eve_outcome_probs(kPi, reflectance, g, convention);
  return at0(0, 0) >= atpi(0, 0) ? 0.0 : kPi;
}

inline EveAction choose_replenish(EveOutcome outcome, double guessed_phase_ae,
                                  double phi_e, double transmission) {
  EveAction action;
  action.phase_a_prime = wrap_phase(guessed_phase_ae - phi_e);
  switch (outcome) {
    case EveOutcome::Pair:
      action.kind = EveAction::Kind::GeneratePair;
      break;
    case EveOutcome::SplitSignal:
    case EveOutcome::SplitIdler:
      action.kind = EveAction::Kind::ReplaceState;
      break;
    case EveOutcome::NoPhoton:
      action.kind = EveAction::Kind::Manipulate;
      action.phase_unshift = -phi_e;
      action.alpha = 1.0 - transmission;
      break;
  }
  return action;
}

// Applies the replenish move and returns the state headed to Bob. Pair and
// split outcomes leave Eve holding the photons, so the channel restarts from
// vacuum with her freshly generated pair; the no-photon outcome patches the
// surviving amplitude in place.
inline PerturbativeKet eve_replenish(const EveAction& action,
                                     const PerturbativeKet& remainder,
                                     const ComplexGain& gain) {
  switch (action.kind) {
    case EveAction::Kind::GeneratePair:
    case EveAction::Kind::ReplaceState: {
      PerturbativeKet fresh = PerturbativeKet::vacuum();
      return opa_apply(fresh, gain, action.phase_a_prime, Subsystem::Bob);
    }
    case EveAction::Kind::Manipulate: {
      PerturbativeKet shifted =
          phase_shift(remainder, action.phase_unshift, 0.0, Subsystem::Bob);
      if (action.alpha == 0.0) return shifted;
      const ComplexGain weak(action.alpha * gain.magnitude(), gain.phase());
      return opa_apply(shifted, weak, action.phase_a_prime, Subsystem::Bob);
    }
  }
  return remainder;
}

inline PerturbativeKet steal_transform(const PerturbativeKet& ket, double reflectance,
                                       BsConvention convention = BsConvention::RealAsymmetric) {
  AttackModel::check_reflectance(reflectance);
  return beamsplit_to_eve(ket, reflectance, convention);
}

// Eve completes an SU(1,1) stage at phase phi_E on the intercepted state and
// reads the interference. In the idealized one-photon detection regime her
// reading is exact whenever the interference is decisive; at the midpoint
// (wrong basis) it carries no information and she falls back to a coin. She
// then emits a fresh single-OPA state at the phase matching her inference.
// Returns the regenerated state and her inferred bit (1 = constructive).
inline std::pair<PerturbativeKet, int> intercept_resend(const PerturbativeKet& after_alice,
                                                        double phi_e,
                                                        const ComplexGain& gain,
                                                        RngStream& rng) {
  PerturbativeKet staged = phase_shift(after_alice, phi_e, 0.0, Subsystem::Bob);
  staged = opa_apply(staged, gain, 0.0, Subsystem::Bob);
  const double n = mean_photon_number(staged, Subsystem::Bob, Tone::Signal);
  const double g2 = gain.magnitude() * gain.magnitude();
  const double cos_phi_ae = g2 > 0.0 ? (n / g2 - 2.0) / 2.0 : 0.0;

  double guessed_phase_ae;
  if (cos_phi_ae > 0.5) {
    guessed_phase_ae = 0.0;
  } else if (cos_phi_ae < -0.5) {
    guessed_phase_ae = kPi;
  } else {
    guessed_phase_ae = rng.uniform_bit() ? 0.0 : kPi;
  }

  const double phase_a_prime = wrap_phase(guessed_phase_ae - phi_e);
  PerturbativeKet regenerated =
      opa_apply(PerturbativeKet::vacuum(), gain, phase_a_prime, Subsystem::Bob);
  const int eve_bit = guessed_phase_ae == 0.0 ? 1 : 0;
  return {regenerated, eve_bit};
}

// ----- closed-form conditional expectations (units of |g|^2) -----

enum class StealResendCase {
  Regenerated,
  ManipulatedWrongBasis,
  ManipulatedWrongBit,
  ManipulatedCorrect,
};

// Bob's mean photon number after his OPA, conditioned on Eve's replenish
// branch. phase_sum is phi_A + phi_B for the manipulated cases and
// phi_A' + phi_B for the regenerated one.
inline double steal_resend_bob_expectation(StealResendCase c, double transmission,
                                           double phase_sum) {
  const double t2 = transmission;
  if (!(t2 >= 0.0) || t2 > 1.0)
    throw std::invalid_argument("transmission out of range [0,1]");
  const double r2 = 1.0 - t2;
  switch (c) {
    case StealResendCase::Regenerated:
      return 2.0 + 2.0 * std::cos(phase_sum);
    case StealResendCase::ManipulatedWrongBasis:
      // phi_A' +- pi/2 off: both cross terms with phi_A' vanish.
      return 1.0 + t2 * t2 + r2 * r2 + 2.0 * t2 * std::cos(phase_sum);
    case StealResendCase::ManipulatedWrongBit:
      // phi_A' = phi_A + pi: |1 + (2T - 1) e^{i phi}|^2.
      return std::norm(1.0 + (2.0 * t2 - 1.0) * std::exp(Complex(0.0, phase_sum)));
    case StealResendCase::ManipulatedCorrect:
      return 2.0 + 2.0 * std::cos(phase_sum);
  }
  throw std::invalid_argument("unknown steal-resend case");
}

// ----- contrast predictors -----

inline double steal_contrast(double transmission) {
  return 2.0 * transmission / (1.0 + transmission);
}

inline double eve_steal_contrast(double reflectance) {
  return 2.0 * reflectance / (1.0 + reflectance);
}

inline double steal_contrast_unequal_gains(double g_alice, double g_bob,
                                           double transmission) {
  return 2.0 * g_alice * g_bob * transmission /
         (g_bob * g_bob + transmission * g_alice * g_alice);
}

inline double intercept_resend_contrast() {
  // Right basis (1/2): untampered 4 / 0. Wrong basis (1/2): flat 2 / 2.
  return 0.5;
}

struct StealResendAverages {
  double n_constructive = 0.0;  // <N> at phi_A + phi_B = 0, units |g|^2
  double n_destructive = 0.0;   // <N> at phi_A + phi_B = pi
  double contrast = 1.0;
};

// Probability-weighted Bob expectations over (Eve basis) x (measurement
// outcome) x (guess correctness), all from the closed forms above. A zero
// reflectance means the tap couples nothing in or out, so Eve has no handle
// on the channel and the statistics are untampered.
inline StealResendAverages steal_resend_average_photon_numbers(
    double reflectance, double g, BsConvention convention = BsConvention::RealAsymmetric) {
  AttackModel::check_reflectance(reflectance);
  if (reflectance == 0.0) return {4.0, 0.0, 1.0};

  const double t2 = 1.0 - reflectance;
  const double guess_pair = eve_guess_for_pair(reflectance, g, convention);
  const double guess_none = eve_guess_for_none(reflectance, g, convention);

  StealResendAverages avg;
  double n_sum[2] = {0.0, 0.0};
  const double phases[2] = {0.0, kPi};
  for (int i = 0; i < 2; ++i) {
    const double phi = phases[i];

    // Eve in Alice's basis: phi_AE equals the revealed phase sum.
    const auto dist_c = eve_outcome_probs(phi, reflectance, g, convention);
    const double p_pair_c = dist_c(1, 1);
    const double p_split_c = dist_c(1, 0) + dist_c(0, 1);
    const double p_none_c = dist_c(0, 0);
    const double n_pair_c =
        steal_resend_bob_expectation(StealResendCase::Regenerated, t2, guess_pair);
    const double n_split_c = 2.0;  // coin between regenerated 0 and 4
    const bool none_guess_right = std::abs(wrap_phase(guess_none - phi)) < 1e-9 ||
                                  std::abs(wrap_phase(guess_none - phi) - 2.0 * kPi) < 1e-9;
    const double n_none_c = steal_resend_bob_expectation(
        none_guess_right ? StealResendCase::ManipulatedCorrect
                         : StealResendCase::ManipulatedWrongBit,
        t2, phi);
    const double n_correct = p_pair_c * n_pair_c + p_split_c * n_split_c + p_none_c * n_none_c;

    // Eve in the other basis: phi_AE = phi +- pi/2, identical columns.
    const auto dist_w = eve_outcome_probs(kPi / 2.0, reflectance, g, convention);
    const double p_pair_w = dist_w(1, 1);
    const double p_split_w = dist_w(1, 0) + dist_w(0, 1);
    const double p_none_w = dist_w(0, 0);
    const double n_none_w = steal_resend_bob_expectation(
        StealResendCase::ManipulatedWrongBasis, t2, phi);
    const double n_wrong = p_pair_w * 2.0 + p_split_w * 2.0 + p_none_w * n_none_w;

    n_sum[i] = 0.5 * (n_correct + n_wrong);
  }
  avg.n_constructive = n_sum[0];
  avg.n_destructive = n_sum[1];
  const double total = avg.n_constructive + avg.n_destructive;
  avg.contrast = total > 0.0 ? (avg.n_constructive - avg.n_destructive) / total : 1.0;
  return avg;
}

inline double predicted_contrast(const AttackModel& attack, double g) {
  switch (attack.kind) {
    case AttackModel::Kind::None:
      return 1.0;
    case AttackModel::Kind::InterceptResend:
      return intercept_resend_contrast();
    case AttackModel::Kind::Steal:
      return steal_contrast(1.0 - attack.reflectance);
    case AttackModel::Kind::StealResend:
      return steal_resend_average_photon_numbers(attack.reflectance, g, attack.convention)
          .contrast;
  }
  throw std::invalid_argument("unknown attack kind");
}

// ----- pipeline branch enumeration -----
//
// One branch = one resolution of Eve's per-state randomness, with the state
// she forwards to Bob (before his basis phase and OPA). Probabilities come
// from the quantum pipeline itself, which keeps this route independent of the
// closed-form predictors above.
struct AttackBranch {
  double probability = 1.0;
  PerturbativeKet ket_to_bob;
};

// Branches conditional on Eve's basis phase phi_e (ignored by the attacks
// that never measure). after_alice must be the channel state following
// Alice's OPA and phase encoding.
inline std::vector<AttackBranch> enumerate_attack_branches(const AttackModel& attack,
                                                           const ComplexGain& gain,
                                                           const PerturbativeKet& after_alice,
                                                           double phi_a, double phi_e) {
  std::vector<AttackBranch> branches;
  switch (attack.kind) {
    case AttackModel::Kind::None:
      branches.push_back({1.0, after_alice});
      break;

    case AttackModel::Kind::Steal: {
      if (attack.reflectance == 0.0) {
        branches.push_back({1.0, after_alice});
      } else {
        branches.push_back(
            {1.0, steal_transform(after_alice, attack.reflectance, attack.convention)});
      }
      break;
    }

    case AttackModel::Kind::InterceptResend: {
      const double cos_phi_ae = std::cos(phi_a + phi_e);
      auto regen = [&](double guessed_phase_ae) {
        return opa_apply(PerturbativeKet::vacuum(), gain,
                         wrap_phase(guessed_phase_ae - phi_e), Subsystem::Bob);
      };
      if (cos_phi_ae > 0.5) {
        branches.push_back({1.0, regen(0.0)});
      } else if (cos_phi_ae < -0.5) {
        branches.push_back({1.0, regen(kPi)});
      } else {
        branches.push_back({0.5, regen(0.0)});
        branches.push_back({0.5, regen(kPi)});
      }
      break;
    }

    case AttackModel::Kind::StealResend: {
      if (attack.reflectance == 0.0) {
        branches.push_back({1.0, after_alice});
        break;
      }
      const double t2 = 1.0 - attack.reflectance;
      // Her basis phase rides on the channel ahead of the tap, so the surviving
      // amplitude carries it too (and her unshift can cancel it).
      PerturbativeKet staged = phase_shift(after_alice, phi_e, 0.0, Subsystem::Bob);
      PerturbativeKet joint = beamsplit_to_eve(staged, attack.reflectance, attack.convention);
      joint = opa_apply(joint, gain, 0.0, Subsystem::Eve);
      const OutcomeDistribution dist = outcome_distribution(joint, Subsystem::Eve);

      const double guess_pair = eve_guess_for_pair(attack.reflectance, gain.magnitude(),
                                                   attack.convention);
      const double guess_none = eve_guess_for_none(attack.reflectance, gain.magnitude(),
                                                   attack.convention);
      const PerturbativeKet remainder = project_eve_vacuum(joint);

      // Pair seen: fresh pair at her guess.
      branches.push_back(
          {dist(1, 1), eve_replenish(choose_replenish(EveOutcome::Pair, guess_pair, phi_e, t2),
                                     remainder, gain)});
      // Lone photon: replacement with a coin-flip bit in her basis.
      const double p_split = dist(1, 0) + dist(0, 1);
      branches.push_back(
          {0.5 * p_split,
           eve_replenish(choose_replenish(EveOutcome::SplitSignal, 0.0, phi_e, t2), remainder,
                         gain)});
      branches.push_back(
          {0.5 * p_split,
           eve_replenish(choose_replenish(EveOutcome::SplitIdler, kPi, phi_e, t2), remainder,
                         gain)});
      // Nothing seen: unshift and patch the surviving amplitude.
      branches.push_back(
          {dist(0, 0),
           eve_replenish(choose_replenish(EveOutcome::NoPhoton, guess_none, phi_e, t2),
                         remainder, gain)});
      break;
    }
  }
  return branches;
}

}  // namespace qmux::adversary
