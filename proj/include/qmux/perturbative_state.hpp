#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qmux {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

inline double wrap_phase(double phi) {
  phi = std::fmod(phi, 2.0 * kPi);
  if (phi < 0.0) phi += 2.0 * kPi;
  return phi;
}

enum class Subsystem : int { Bob = 0, Eve = 1 };
enum class Tone : int { Signal = 0, Idler = 1 };

struct ModeId {
  Subsystem subsystem;
  Tone tone;
  // Bit position in the packed occupation index:
  // 0 = Bob signal, 1 = Bob idler, 2 = Eve signal, 3 = Eve idler.
  constexpr int bit() const {
    return static_cast<int>(tone) + 2 * static_cast<int>(subsystem);
  }
};

constexpr int mode_bit(Subsystem s, Tone t) {
  return static_cast<int>(t) + 2 * static_cast<int>(s);
}

// Parametric gain of one signal-idler pair. The magnitude is capped at 0.5;
// the first-order algebra drifts noticeably above ~0.3, which callers can
// surface as a warning without being blocked.
class ComplexGain {
 public:
  static constexpr double kHardLimit = 0.5;
  static constexpr double kWarnThreshold = 0.3;

  explicit ComplexGain(double magnitude, double phase = 0.0)
      : magnitude_(magnitude), phase_(wrap_phase(phase)) {
    if (!(magnitude >= 0.0) || magnitude > kHardLimit)
      throw std::invalid_argument("gain magnitude outside [0, 0.5]");
  }

  double magnitude() const { return magnitude_; }
  double phase() const { return phase_; }
  bool above_warn_threshold() const { return magnitude_ > kWarnThreshold; }

 private:
  double magnitude_;
  double phase_;
};

// Photon-count outcome probabilities for one subsystem's (signal, idler)
// tones, including the vacuum outcome, normalized by z.
struct OutcomeDistribution {
  std::array<double, 4> p{};  // index = n_signal + 2 * n_idler
  double z = 0.0;

  double operator()(int n_signal, int n_idler) const {
    return p[static_cast<std::size_t>(n_signal + 2 * n_idler)];
  }
};

// First-order-in-gain biphoton state over the four Bob/Eve signal-idler modes.
//
// Amplitudes are indexed by a 4-bit occupation tuple; occupations are 0 or 1
// by construction. The vacuum entry carries formal order 0 and is pinned at
// amplitude 1 (the customary unnormalized presentation); every other entry is
// order 1 in the gain. Operations prune anything that would reach order 2.
class PerturbativeKet {
 public:
  static constexpr int kDim = 16;

  PerturbativeKet() { amp_[0] = Complex(1.0, 0.0); }

  static PerturbativeKet vacuum() { return PerturbativeKet(); }

  Complex amplitude(int index) const { return amp_[static_cast<std::size_t>(index)]; }
  Complex amplitude(int ns_bob, int ni_bob, int ns_eve, int ni_eve) const {
    return amp_[static_cast<std::size_t>(ns_bob | (ni_bob << 1) | (ns_eve << 2) |
                                         (ni_eve << 3))];
  }
  Complex& mutable_amplitude(int index) { return amp_[static_cast<std::size_t>(index)]; }

  static constexpr int formal_order(int index) { return index == 0 ? 0 : 1; }

  static constexpr int occupation(int index, Subsystem s, Tone t) {
    return (index >> mode_bit(s, t)) & 1;
  }

  double norm_squared() const {
    double total = 0.0;
    for (const Complex& a : amp_) total += std::norm(a);
    return total;
  }

  bool eve_side_vacuum() const {
    for (int idx = 0; idx < kDim; ++idx)
      if ((idx & 0b1100) != 0 && amp_[static_cast<std::size_t>(idx)] != Complex{})
        return false;
    return true;
  }

 private:
  std::array<Complex, kDim> amp_{};
};

// U ~ 1 + i g a†_s a†_i on one subsystem. Only the order-0 (vacuum) term can
// seed a new pair; pair creation on an order-1 term would be order 2 and is
// pruned. The vacuum amplitude itself stays untouched.
inline PerturbativeKet opa_apply(const PerturbativeKet& ket, const ComplexGain& gain,
                                 double pump_phase, Subsystem subsystem) {
  PerturbativeKet out = ket;
  const Complex g_eff =
      Complex(0.0, 1.0) * gain.magnitude() *
      std::exp(Complex(0.0, gain.phase() + pump_phase));
  const int pair_index = (1 << mode_bit(subsystem, Tone::Signal)) |
                         (1 << mode_bit(subsystem, Tone::Idler));
  out.mutable_amplitude(pair_index) += g_eff * ket.amplitude(0);
  return out;
}

// Multiplies every entry by exp(i (n_signal phi_s + n_idler phi_i)) for the
// chosen subsystem, so a pair picks up the phase-sum.
inline PerturbativeKet phase_shift(const PerturbativeKet& ket, double phi_signal,
                                   double phi_idler, Subsystem subsystem) {
  PerturbativeKet out = ket;
  for (int idx = 0; idx < PerturbativeKet::kDim; ++idx) {
    const int ns = PerturbativeKet::occupation(idx, subsystem, Tone::Signal);
    const int ni = PerturbativeKet::occupation(idx, subsystem, Tone::Idler);
    if (ns == 0 && ni == 0) continue;
    out.mutable_amplitude(idx) *=
        std::exp(Complex(0.0, ns * phi_signal + ni * phi_idler));
  }
  return out;
}

// Reflection-phase convention of the tap beamsplitter. Symmetric uses the
// i*r cross coefficient (Eve pair picks up -r^2); RealAsymmetric uses a real
// r cross coefficient (Eve pair +r^2). The two agree on every Bob-side
// marginal and differ only in the Eve-side pair phase.
enum class BsConvention { Symmetric, RealAsymmetric };

// Mixes each Bob mode with a matching Eve vacuum mode on a beamsplitter of
// reflectance R. Requires the Eve side of the input to be vacuum.
inline PerturbativeKet beamsplit_to_eve(const PerturbativeKet& ket, double reflectance,
                                        BsConvention convention) {
  if (!(reflectance >= 0.0) || reflectance > 1.0)
    throw std::invalid_argument("beamsplitter reflectance outside [0,1]");
  if (!ket.eve_side_vacuum())
    throw std::invalid_argument("beamsplitter input must have vacuum Eve modes");

  const double t = std::sqrt(1.0 - reflectance);
  const double r = std::sqrt(reflectance);
  const Complex cross = convention == BsConvention::Symmetric
                            ? Complex(0.0, r)
                            : Complex(r, 0.0);

  PerturbativeKet out;
  out.mutable_amplitude(0) = Complex{};
  for (int idx = 0; idx < PerturbativeKet::kDim; ++idx) {
    const Complex a = ket.amplitude(idx);
    if (a == Complex{}) continue;
    const int bs = idx & 0b01;
    const int bi = idx & 0b10;
    // Each occupied Bob mode either stays (x t) or hops to the Eve mode of the
    // same tone (x cross); expand the product over the two tones.
    for (int move_s = 0; move_s <= (bs ? 1 : 0); ++move_s) {
      for (int move_i = 0; move_i <= (bi ? 1 : 0); ++move_i) {
        Complex coef = a;
        int target = idx;
        if (bs) {
          coef *= move_s ? cross : t;
          if (move_s) target = (target & ~0b0001) | 0b0100;
        }
        if (bi) {
          coef *= move_i ? cross : t;
          if (move_i) target = (target & ~0b0010) | 0b1000;
        }
        out.mutable_amplitude(target) += coef;
      }
    }
  }
  return out;
}

// Mean photon number of one mode, Sum_n n |amplitude|^2, in the unnormalized
// vacuum-amplitude-1 convention.
inline double mean_photon_number(const PerturbativeKet& ket, Subsystem subsystem,
                                 Tone tone) {
  double total = 0.0;
  for (int idx = 0; idx < PerturbativeKet::kDim; ++idx)
    if (PerturbativeKet::occupation(idx, subsystem, tone))
      total += std::norm(ket.amplitude(idx));
  return total;
}

inline OutcomeDistribution outcome_distribution(const PerturbativeKet& ket,
                                                Subsystem subsystem) {
  OutcomeDistribution dist;
  for (int idx = 0; idx < PerturbativeKet::kDim; ++idx) {
    const double w = std::norm(ket.amplitude(idx));
    if (w == 0.0) continue;
    const int ns = PerturbativeKet::occupation(idx, subsystem, Tone::Signal);
    const int ni = PerturbativeKet::occupation(idx, subsystem, Tone::Idler);
    dist.p[static_cast<std::size_t>(ns + 2 * ni)] += w;
  }
  dist.z = dist.p[0] + dist.p[1] + dist.p[2] + dist.p[3];
  if (dist.z <= 0.0) throw std::invalid_argument("outcome_distribution of null state");
  for (double& v : dist.p) v /= dist.z;
  return dist;
}

// Post-measurement Bob state given Eve registered no photons: keeps exactly
// the entries with vacuum Eve modes. The vacuum amplitude is 1 there already,
// so the result is a valid ket without renormalization.
inline PerturbativeKet project_eve_vacuum(const PerturbativeKet& ket) {
  PerturbativeKet out;
  out.mutable_amplitude(0) = Complex{};
  for (int idx = 0; idx < PerturbativeKet::kDim; ++idx)
    if ((idx & 0b1100) == 0) out.mutable_amplitude(idx) = ket.amplitude(idx);
  return out;
}

}  // namespace qmux
