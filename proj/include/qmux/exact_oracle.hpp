#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qmux {

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense two-mode Fock state with per-mode occupations 0..cutoff. Used as an
// independent check on the first-order algebra: states are evolved with the
// exact squeezing unitary instead of the truncated propagator.
class TwoModeFock {
 public:
  static constexpr int kDefaultCutoff = 6;
  static constexpr double kLeakageLimit = 1e-6;
  static constexpr double kNormTolerance = 1e-10;

  explicit TwoModeFock(int cutoff = kDefaultCutoff) : cutoff_(cutoff) {
    if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
    amp_ = Eigen::VectorXcd::Zero(dim());
    amp_(0) = 1.0;
  }

  static TwoModeFock vacuum(int cutoff = kDefaultCutoff) { return TwoModeFock(cutoff); }

  int cutoff() const { return cutoff_; }
  int levels() const { return cutoff_ + 1; }
  Eigen::Index dim() const {
    return static_cast<Eigen::Index>(levels()) * levels();
  }

  std::complex<double> amplitude(int n_a, int n_b) const {
    return amp_(index(n_a, n_b));
  }
  std::complex<double>& mutable_amplitude(int n_a, int n_b) {
    return amp_(index(n_a, n_b));
  }
  const Eigen::VectorXcd& vector() const { return amp_; }
  Eigen::VectorXcd& vector() { return amp_; }

  double norm() const { return amp_.norm(); }

  double mean_photon_a() const {
    double total = 0.0;
    for (int n = 0; n <= cutoff_; ++n)
      for (int m = 0; m <= cutoff_; ++m) total += n * std::norm(amp_(index(n, m)));
    return total;
  }
  double mean_photon_b() const {
    double total = 0.0;
    for (int n = 0; n <= cutoff_; ++n)
      for (int m = 0; m <= cutoff_; ++m) total += m * std::norm(amp_(index(n, m)));
    return total;
  }

  // Probability mass sitting on the top occupation level of either mode.
  double top_level_population() const {
    double total = 0.0;
    for (int n = 0; n <= cutoff_; ++n) {
      total += std::norm(amp_(index(n, cutoff_)));
      if (n != cutoff_) total += std::norm(amp_(index(cutoff_, n)));
    }
    return total;
  }

  Eigen::Index index(int n_a, int n_b) const {
    if (n_a < 0 || n_a > cutoff_ || n_b < 0 || n_b > cutoff_)
      throw std::out_of_range("Fock occupation outside cutoff");
    return static_cast<Eigen::Index>(n_a) * levels() + n_b;
  }

 private:
  int cutoff_;
  Eigen::VectorXcd amp_;
};

inline TwoModeFock fock_phase_shift(const TwoModeFock& state, double phi_a, double phi_b) {
  TwoModeFock out = state;
  for (int n = 0; n <= state.cutoff(); ++n)
    for (int m = 0; m <= state.cutoff(); ++m)
      out.mutable_amplitude(n, m) *=
          std::exp(std::complex<double>(0.0, n * phi_a + m * phi_b));
  return out;
}

// Applies exp[g (e^{i theta} a†b† - e^{-i theta} a b)] via a dense matrix
// exponential on the truncated space. Rejects states whose population has
// already leaked to the cutoff level, and checks norm preservation after the
// unitary.
inline TwoModeFock two_mode_squeeze(const TwoModeFock& state, double g, double theta) {
  if (state.top_level_population() > TwoModeFock::kLeakageLimit)
    throw OracleError("cutoff leakage above 1e-6: oracle result would be invalid");

  const int levels = state.levels();
  const Eigen::Index dim = state.dim();
  Eigen::MatrixXcd generator = Eigen::MatrixXcd::Zero(dim, dim);
  const std::complex<double> zeta = g * std::exp(std::complex<double>(0.0, theta));
  for (int n = 0; n + 1 < levels; ++n) {
    for (int m = 0; m + 1 < levels; ++m) {
      const double elem = std::sqrt(static_cast<double>((n + 1) * (m + 1)));
      const Eigen::Index lo = static_cast<Eigen::Index>(n) * levels + m;
      const Eigen::Index hi = static_cast<Eigen::Index>(n + 1) * levels + (m + 1);
      generator(hi, lo) += zeta * elem;          // a†b†
      generator(lo, hi) -= std::conj(zeta) * elem;  // -ab
    }
  }

  TwoModeFock out = state;
  out.vector() = generator.exp() * state.vector();

  const double norm = out.norm();
  if (std::abs(norm - state.norm()) > TwoModeFock::kNormTolerance)
    throw OracleError("squeezing unitary failed to preserve the norm");
  if (out.top_level_population() > TwoModeFock::kLeakageLimit)
    throw OracleError("cutoff leakage above 1e-6 after evolution");
  return out;
}

// Phase that makes the exact unitary's first order match 1 + i g a†b† with an
// extra pump phase: i e^{i phi} = e^{i (phi + pi/2)}.
inline double squeeze_phase_for_opa(double gain_phase, double pump_phase) {
  return gain_phase + pump_phase + 1.5707963267948966;
}

}  // namespace qmux
