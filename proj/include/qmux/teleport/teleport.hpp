#pragma once

#include "qmux/rng.hpp"
#include "qmux/stats.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace qmux::teleport {

using Complex = std::complex<double>;

// The three independent mode families feeding one teleportation channel. Each
// owns one x-type and one y-type quadrature symbol; all six symbols are
// statistically independent with vacuum variance 1/4 per quadrature
// (commutator [x, y] = i/2 convention).
enum class Source : int { Input = 0, Opa1 = 1, Opa2 = 2 };

inline constexpr double kVacuumQuadratureVariance = 0.25;

// Heisenberg-picture field operator as a linear combination over the labelled
// source quadratures plus a classical displacement (real part = x shift,
// imaginary part = y shift).
struct LinearQuadratureOperator {
  std::array<Complex, 3> x{};  // coefficients on the x-type symbols per source
  std::array<Complex, 3> y{};  // coefficients on the y-dagger-type symbols
  Complex displacement{};

  Complex x_coef(Source s) const { return x[static_cast<std::size_t>(s)]; }
  Complex y_coef(Source s) const { return y[static_cast<std::size_t>(s)]; }

  LinearQuadratureOperator operator+(const LinearQuadratureOperator& o) const {
    LinearQuadratureOperator out;
    for (std::size_t i = 0; i < 3; ++i) {
      out.x[i] = x[i] + o.x[i];
      out.y[i] = y[i] + o.y[i];
    }
    out.displacement = displacement + o.displacement;
    return out;
  }
  LinearQuadratureOperator operator-(const LinearQuadratureOperator& o) const {
    LinearQuadratureOperator out;
    for (std::size_t i = 0; i < 3; ++i) {
      out.x[i] = x[i] - o.x[i];
      out.y[i] = y[i] - o.y[i];
    }
    out.displacement = displacement - o.displacement;
    return out;
  }
  LinearQuadratureOperator scaled(double s) const {
    LinearQuadratureOperator out = *this;
    for (std::size_t i = 0; i < 3; ++i) {
      out.x[i] *= s;
      out.y[i] *= s;
    }
    out.displacement *= s;
    return out;
  }

  double max_coefficient_distance(const LinearQuadratureOperator& o) const {
    double worst = std::abs(displacement - o.displacement);
    for (std::size_t i = 0; i < 3; ++i) {
      worst = std::max(worst, std::abs(x[i] - o.x[i]));
      worst = std::max(worst, std::abs(y[i] - o.y[i]));
    }
    return worst;
  }
};

struct SqueezeSettings {
  double g = 1.0;   // parametric gain; stretched factor e^g, squeezed e^{-g}
  double t = 0.999; // output-shift beamsplitter transmission amplitude

  SqueezeSettings(double gain, double transmission) : g(gain), t(transmission) {
    if (!(g >= 0.0)) throw std::invalid_argument("squeeze gain must be >= 0");
    if (!(t > 0.0) || t > 1.0)
      throw std::invalid_argument("beamsplitter amplitude t outside (0,1]");
  }

  double stretched() const { return std::exp(g); }
  double squeezed() const { return std::exp(-g); }
  double r() const { return std::sqrt(std::max(0.0, 1.0 - t * t)); }
  double alpha() const {
    const double rr = r();
    if (rr == 0.0)
      throw std::invalid_argument("feedforward gain alpha undefined at r = 0");
    return t / rr;
  }
};

enum class Orientation { XStretched, YStretched };

// sqrt(2) (e^{+-g} x + i e^{-+g} y-dagger) over the chosen source's own
// symbols.
inline LinearQuadratureOperator squeezed_source(double g, Orientation orientation,
                                                Source label) {
  if (!(g >= 0.0)) throw std::invalid_argument("squeeze gain must be >= 0");
  const double root2 = std::sqrt(2.0);
  LinearQuadratureOperator op;
  const std::size_t i = static_cast<std::size_t>(label);
  if (orientation == Orientation::XStretched) {
    op.x[i] = root2 * std::exp(g);
    op.y[i] = root2 * std::exp(-g);
  } else {
    op.x[i] = root2 * std::exp(-g);
    op.y[i] = root2 * std::exp(g);
  }
  return op;
}

// Exact 50:50 beamsplitter: returns ((a + b)/sqrt(2), (a - b)/sqrt(2)).
inline std::pair<LinearQuadratureOperator, LinearQuadratureOperator> mix_on_beamsplitter(
    const LinearQuadratureOperator& a, const LinearQuadratureOperator& b) {
  const double inv_root2 = 1.0 / std::sqrt(2.0);
  return {(a + b).scaled(inv_root2), (a - b).scaled(inv_root2)};
}

inline LinearQuadratureOperator input_operator(Complex xi, Complex eta,
                                               Complex displacement = {}) {
  LinearQuadratureOperator op;
  op.x[static_cast<std::size_t>(Source::Input)] = xi;
  op.y[static_cast<std::size_t>(Source::Input)] = eta;
  op.displacement = displacement;
  return op;
}

// Full protocol, exactly (no dropped squeezed-quadrature terms):
//   1. two orthogonal squeezed sources,
//   2. entangling beamsplitter,
//   3. input mixed with one entangled arm,
//   4. homodyne of x on one port and y-dagger on the other,
//   5. measured values scaled by alpha = t/r drive the displacement of the
//      other arm on a high-transmission beamsplitter.
// Output: t [ (xi + 2 e^{-g} x_OPA2) x + i (eta + 2 e^{-g} y_OPA1) y-dagger ].
inline LinearQuadratureOperator teleport_symbolic(Complex xi, Complex eta,
                                                  const SqueezeSettings& settings,
                                                  Complex input_displacement = {}) {
  const auto a1 = squeezed_source(settings.g, Orientation::XStretched, Source::Opa1);
  const auto a2 = squeezed_source(settings.g, Orientation::YStretched, Source::Opa2);
  const auto [a3, a4] = mix_on_beamsplitter(a1, a2);
  const auto a_in = input_operator(xi, eta, input_displacement);
  // Port assignment: a5 = (a_in - a4)/sqrt2 and a6 = (a_in + a4)/sqrt2.
  const auto [a6, a5] = mix_on_beamsplitter(a_in, a4);

  // Homodyne takes the x-part of a5 and the y-part of a6; classically fed
  // forward, the measured linear forms stay linear forms over the symbols.
  LinearQuadratureOperator a7;
  const double scale = settings.alpha() * std::sqrt(2.0);
  for (std::size_t i = 0; i < 3; ++i) {
    a7.x[i] = scale * a5.x[i];
    a7.y[i] = scale * a6.y[i];
  }
  a7.displacement =
      scale * Complex(a5.displacement.real(), a6.displacement.imag());

  return a3.scaled(settings.t) + a7.scaled(settings.r());
}

// Residual noise power per quadrature left by finite squeezing: the output
// carries 2 e^{-g} of a squeezed symbol, i.e. variance (2 e^{-g})^2 / 4.
inline double added_noise_variance(double g) {
  if (!(g >= 0.0)) throw std::invalid_argument("squeeze gain must be >= 0");
  return std::exp(-2.0 * g);
}

struct GaussianInput {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = kVacuumQuadratureVariance;
  double var_y = kVacuumQuadratureVariance;
  double cov_xy = 0.0;

  void validate() const {
    if (var_x < 0.0 || var_y < 0.0 || cov_xy * cov_xy > var_x * var_y)
      throw std::invalid_argument("input covariance is not positive semidefinite");
  }
};

struct TeleportMcStats {
  long samples = 0;
  double mean_x = 0.0, mean_y = 0.0;
  double mean_x_se = 0.0, mean_y_se = 0.0;
  double var_x = 0.0, var_y = 0.0;
  // Var(out - t * in): the noise the channel adds on top of its deterministic
  // t-scaling. Reported with the jackknife-free sqrt(2/(n-1)) standard error.
  double added_var_x = 0.0, added_var_y = 0.0;
  double added_var_x_se = 0.0, added_var_y_se = 0.0;
  double naive_added_var_x = 0.0, naive_added_var_y = 0.0;  // Var(out) - Var(in)
};

// Samples the six source quadratures as independent Gaussians and pushes the
// classical values through the same five steps numerically (an independent
// route from the coefficient algebra above).
inline TeleportMcStats teleport_monte_carlo(const GaussianInput& input,
                                            const SqueezeSettings& settings,
                                            long n_samples, RngStream& rng) {
  if (n_samples < 1) throw std::invalid_argument("need at least one sample");
  input.validate();

  const double sig = std::sqrt(kVacuumQuadratureVariance);
  const double root2 = std::sqrt(2.0);
  const double eg = std::exp(settings.g);
  const double emg = std::exp(-settings.g);
  const double t = settings.t;
  const double r = settings.r();
  const double alpha = settings.alpha();

  // Cholesky factor of the 2x2 input covariance.
  const double lxx = std::sqrt(input.var_x);
  const double lyx = lxx > 0.0 ? input.cov_xy / lxx : 0.0;
  const double lyy = std::sqrt(std::max(0.0, input.var_y - lyx * lyx));

  RunningStats out_x, out_y, resid_x, resid_y;
  for (long s = 0; s < n_samples; ++s) {
    const double u1 = rng.normal(0.0, 1.0);
    const double u2 = rng.normal(0.0, 1.0);
    const double in_x = input.mean_x + lxx * u1;
    const double in_y = input.mean_y + lyx * u1 + lyy * u2;

    const double x1 = rng.normal(0.0, sig), y1 = rng.normal(0.0, sig);
    const double x2 = rng.normal(0.0, sig), y2 = rng.normal(0.0, sig);

    // Step 1: sources. Step 2: entangling beamsplitter.
    const double a1x = root2 * eg * x1, a1y = root2 * emg * y1;
    const double a2x = root2 * emg * x2, a2y = root2 * eg * y2;
    const double a3x = (a1x + a2x) / root2, a3y = (a1y + a2y) / root2;
    const double a4x = (a1x - a2x) / root2, a4y = (a1y - a2y) / root2;

    // Step 3: mix the input with one entangled arm.
    const double a5x = (in_x - a4x) / root2;
    const double a6y = (in_y + a4y) / root2;

    // Step 4: parametric homodyne reads m_x and m_y. Step 5: feedforward.
    const double a7x = alpha * root2 * a5x;
    const double a7y = alpha * root2 * a6y;
    const double a8x = t * a3x + r * a7x;
    const double a8y = t * a3y + r * a7y;

    out_x.add(a8x);
    out_y.add(a8y);
    resid_x.add(a8x - t * in_x);
    resid_y.add(a8y - t * in_y);
  }

  TeleportMcStats stats;
  stats.samples = n_samples;
  stats.mean_x = out_x.mean();
  stats.mean_y = out_y.mean();
  stats.mean_x_se = out_x.standard_error();
  stats.mean_y_se = out_y.standard_error();
  stats.var_x = out_x.variance();
  stats.var_y = out_y.variance();
  stats.added_var_x = resid_x.variance();
  stats.added_var_y = resid_y.variance();
  const double var_se_factor = std::sqrt(2.0 / static_cast<double>(n_samples - 1));
  stats.added_var_x_se = stats.added_var_x * var_se_factor;
  stats.added_var_y_se = stats.added_var_y * var_se_factor;
  stats.naive_added_var_x = stats.var_x - input.var_x;
  stats.naive_added_var_y = stats.var_y - input.var_y;
  return stats;
}

}  // namespace qmux::teleport
