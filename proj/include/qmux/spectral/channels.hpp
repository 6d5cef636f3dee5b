#pragma once

#include "qmux/perturbative_state.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace qmux::spectral {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct GridConfig {
  double span = 3.68e-3;           // modulator span, m
  double channel_width = 130e-6;   // m on the modulator plane
  double gap = 30e-6;              // m between channels
  double gain_magnitude = 0.01;
  enum class Envelope { Flat, RaisedCosine } envelope = Envelope::Flat;
  double dispersion_kappa = 0.0;       // theta_c = kappa * omega_c^2, rad/(rad/s)^2
  double center_wavelength = 1.56e-6;  // m, degenerate signal/idler wavelength
  double bandwidth = 150e-9;           // m; presets: 150 nm (main), 100 nm (source-limited)
};

struct Channel {
  double omega_c = 0.0;          // detuning from omega_p / 2, rad/s
  double gain_magnitude = 0.0;
  double dispersion_phase = 0.0;  // phase-sum offset of this channel, rad
};

struct ChannelGrid {
  GridConfig config;
  std::vector<Channel> channels;

  int count() const { return static_cast<int>(channels.size()); }

  std::vector<double> gains() const {
    std::vector<double> out;
    out.reserve(channels.size());
    for (const auto& ch : channels) out.push_back(ch.gain_magnitude);
    return out;
  }
  std::vector<double> phase_offsets() const {
    std::vector<double> out;
    out.reserve(channels.size());
    for (const auto& ch : channels) out.push_back(ch.dispersion_phase);
    return out;
  }
};

inline int channel_capacity(double span, double pitch) {
  if (!(pitch > 0.0)) throw std::invalid_argument("channel pitch must be positive");
  return static_cast<int>(std::floor(span / pitch + 1e-9));
}

// Lays the channels across the modulator span, spaced by width + gap, with
// detunings spread uniformly over the source bandwidth. The gain envelope is
// flat by default; the raised-cosine option tapers toward the band edges the
// way a finite phase-matching bandwidth would.
inline ChannelGrid build_grid(const GridConfig& config) {
  if (!(config.span > 0.0) || !(config.channel_width > 0.0) || config.gap < 0.0)
    throw std::invalid_argument("grid lengths must be positive");
  const double pitch = config.channel_width + config.gap;
  const int n = channel_capacity(config.span, pitch);
  if (n < 1)
    throw std::invalid_argument("channels overlap: span too small for one channel");

  // Half of the full spectral bandwidth, as a detuning from omega_p / 2.
  const double omega_half = kPi * kSpeedOfLight * config.bandwidth /
                            (config.center_wavelength * config.center_wavelength);

  ChannelGrid grid;
  grid.config = config;
  grid.channels.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    const double xi = n > 1 ? -1.0 + 2.0 * c / (n - 1.0) : 0.0;  // in [-1, 1]
    Channel& ch = grid.channels[static_cast<std::size_t>(c)];
    ch.omega_c = xi * omega_half;
    ch.gain_magnitude =
        config.envelope == GridConfig::Envelope::RaisedCosine
            ? config.gain_magnitude * 0.5 * (1.0 + std::cos(kPi * xi))
            : config.gain_magnitude;
    ch.dispersion_phase = config.dispersion_kappa * ch.omega_c * ch.omega_c;
  }
  return grid;
}

// Row-stochastic tridiagonal leakage: a fraction eps_left of each channel's
// measured intensity actually comes from its left neighbor, eps_right from
// the right one. Edge rows keep only the neighbor that exists.
struct CrosstalkModel {
  int n = 1;
  double eps_left = 0.0;
  double eps_right = 0.0;

  CrosstalkModel(int channels, double left, double right)
      : n(channels), eps_left(left), eps_right(right) {
    if (channels < 1) throw std::invalid_argument("need at least one channel");
    if (left < 0.0 || right < 0.0 || left + right > 1.0)
      throw std::invalid_argument("leakage fractions must be >= 0 and sum to <= 1");
  }

  static CrosstalkModel identity(int channels) { return {channels, 0.0, 0.0}; }
};

inline std::vector<double> apply_crosstalk(const CrosstalkModel& model,
                                           const std::vector<double>& intensities) {
  if (intensities.size() != static_cast<std::size_t>(model.n))
    throw std::invalid_argument("intensity vector size does not match the model");
  for (double v : intensities)
    if (v < 0.0) throw std::invalid_argument("intensities must be non-negative");

  std::vector<double> mixed(intensities.size());
  for (int i = 0; i < model.n; ++i) {
    const bool has_left = i > 0;
    const bool has_right = i + 1 < model.n;
    const double el = has_left ? model.eps_left : 0.0;
    const double er = has_right ? model.eps_right : 0.0;
    double v = (1.0 - el - er) * intensities[static_cast<std::size_t>(i)];
    if (has_left) v += el * intensities[static_cast<std::size_t>(i - 1)];
    if (has_right) v += er * intensities[static_cast<std::size_t>(i + 1)];
    mixed[static_cast<std::size_t>(i)] = v;
  }
  return mixed;
}

// Err_1(phi_2): for each neighbor phase, the phi_1-average of the deviation
// of I_1 from its own phi_2-average. samples[i][j] = I_1(phi_1[i], phi_2[j])
// over a full factorial grid.
inline std::vector<double> crosstalk_error_metric(
    const std::vector<std::vector<double>>& samples) {
  if (samples.empty()) throw std::invalid_argument("empty phase grid");
  const std::size_t n2 = samples.front().size();
  if (n2 == 0) throw std::invalid_argument("empty phase grid");
  for (const auto& row : samples)
    if (row.size() != n2)
      throw std::invalid_argument("incomplete factorial grid over (phi1, phi2)");

  std::vector<double> err(n2, 0.0);
  for (const auto& row : samples) {
    double row_mean = 0.0;
    for (double v : row) row_mean += v;
    row_mean /= static_cast<double>(n2);
    for (std::size_t j = 0; j < n2; ++j) err[j] += row[j] - row_mean;
  }
  for (double& v : err) v /= static_cast<double>(samples.size());
  return err;
}

struct OpticsDesign {
  double focal_length = 0.0;   // m
  double grating_period = 0.0; // m
  int capacity = 0;
};

// Pulse-shaper design rules: the lens focal length matches the diffraction
// limit to the pixel size, f = 0.4 d_pixel D / lambda; the grating period
// spreads the +-omega spectrum across the span,
// d = (f / span) * 4 omega pi c / (omega_p^2/4 - omega^2).
inline OpticsDesign design_optics(double d_pixel, double aperture, double lambda,
                                  double span, double omega, double omega_p,
                                  double channel_pitch = 160e-6) {
  if (!(d_pixel > 0.0) || !(aperture > 0.0) || !(lambda > 0.0) || !(span > 0.0) ||
      !(omega > 0.0) || !(omega_p > 0.0))
    throw std::invalid_argument("all optics lengths and frequencies must be positive");
  if (omega >= omega_p / 2.0)
    throw std::invalid_argument("detuning must stay below omega_p / 2");
  if (aperture <= span)
    throw std::invalid_argument(
        "lens aperture must exceed the modulator span to capture the spectrum");

  OpticsDesign out;
  out.focal_length = 0.4 * d_pixel * aperture / lambda;
  out.grating_period = (out.focal_length / span) * 4.0 * omega * kPi * kSpeedOfLight /
                       (omega_p * omega_p / 4.0 - omega * omega);
  out.capacity = channel_capacity(span, channel_pitch);
  return out;
}

struct CompensationResult {
  ChannelGrid corrected;
  std::vector<double> residual_offsets;  // per channel, after subtraction
  std::vector<double> fringe_contrast;   // |<e^{i theta}>| across each channel band
};

// Subtracts one calibration phase per channel (the modulator piston) and
// reports the interference-contrast multiplier left by the intra-channel
// phase variation, |<e^{i (theta(omega) - theta(omega_c))}>| over the band.
inline CompensationResult dispersion_compensate(const ChannelGrid& grid,
                                                const std::vector<double>& measured_phases) {
  if (measured_phases.size() != grid.channels.size())
    throw std::invalid_argument("need one calibration phase per channel");

  CompensationResult out;
  out.corrected = grid;
  out.residual_offsets.resize(grid.channels.size());
  out.fringe_contrast.resize(grid.channels.size());

  // Width of one channel in detuning, from its share of the modulator span.
  const double omega_half = kPi * kSpeedOfLight * grid.config.bandwidth /
                            (grid.config.center_wavelength * grid.config.center_wavelength);
  const double band_half =
      omega_half * grid.config.channel_width / grid.config.span;

  constexpr int kQuadraturePoints = 129;
  for (std::size_t c = 0; c < grid.channels.size(); ++c) {
    const Channel& ch = grid.channels[c];
    out.corrected.channels[c].dispersion_phase =
        ch.dispersion_phase - measured_phases[c];
    out.residual_offsets[c] = out.corrected.channels[c].dispersion_phase;

    std::complex<double> fringe{};
    for (int k = 0; k < kQuadraturePoints; ++k) {
      const double delta =
          band_half * (-1.0 + 2.0 * k / (kQuadraturePoints - 1.0));
      const double omega = ch.omega_c + delta;
      const double theta = grid.config.dispersion_kappa * omega * omega -
                           grid.config.dispersion_kappa * ch.omega_c * ch.omega_c;
      fringe += std::exp(std::complex<double>(0.0, theta));
    }
    out.fringe_contrast[c] = std::abs(fringe) / kQuadraturePoints;
  }
  return out;
}

}  // namespace qmux::spectral
