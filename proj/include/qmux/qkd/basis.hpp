#pragma once

#include "qmux/perturbative_state.hpp"

#include <stdexcept>

namespace qmux::qkd {

enum class Basis : int { B1 = 0, B2 = 1 };

// Bit-to-phase maps. B1: 1 -> 0, 0 -> pi. B2: 1 -> 3pi/2, 0 -> pi/2, chosen
// so that a matched-basis phase-sum is 0 for bit 1 and pi for bit 0 in both
// bases, which keeps the decode rule uniform.
inline double alice_encode(int bit, Basis basis) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("bit must be 0 or 1");
  if (basis == Basis::B1) return bit == 1 ? 0.0 : kPi;
  return bit == 1 ? 1.5 * kPi : 0.5 * kPi;
}

// Bob's measurement phase: 0 for B1, pi/2 for B2; the second half-window adds
// the differential pi flip.
inline double bob_phase(Basis basis, int half_window) {
  if (half_window != 1 && half_window != 2)
    throw std::invalid_argument("half_window must be 1 or 2");
  double phi = basis == Basis::B1 ? 0.0 : 0.5 * kPi;
  if (half_window == 2) phi += kPi;
  return phi;
}

}  // namespace qmux::qkd
