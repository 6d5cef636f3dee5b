#pragma once

#include "qmux/adversary/attacks.hpp"
#include "qmux/perturbative_state.hpp"
#include "qmux/qkd/basis.hpp"
#include "qmux/rng.hpp"
#include "qmux/stats.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qmux::qkd {

struct SessionConfig {
  int channels = 23;
  double gain_magnitude = 0.002;
  double gain_phase = 0.0;
  // Per-channel overrides (sized `channels` when present); built from a
  // spectral grid or left empty for a flat profile.
  std::vector<double> channel_gains;
  std::vector<double> channel_phase_offsets;

  int coherence_slots = 10000;  // per bit, split into two equal half-windows
  double detector_efficiency = 1.0;
  double dark_count_rate = 0.0;  // per slot
  long bits_per_channel = 1000;
  std::uint64_t master_seed = 1;
  bool window_one_is_bit_one = true;  // photon in window 1 decodes as '1'

  double channel_gain(int channel) const {
    return channel_gains.empty() ? gain_magnitude
                                 : channel_gains[static_cast<std::size_t>(channel)];
  }
  double channel_phase_offset(int channel) const {
    return channel_phase_offsets.empty()
               ? 0.0
               : channel_phase_offsets[static_cast<std::size_t>(channel)];
  }

  void validate() const {
    if (channels < 1) throw std::invalid_argument("channels must be >= 1");
    if (coherence_slots < 2 || coherence_slots % 2 != 0)
      throw std::invalid_argument("coherence_slots must be even and >= 2");
    if (detector_efficiency < 0.0 || detector_efficiency > 1.0)
      throw std::invalid_argument("detector_efficiency outside [0,1]");
    if (dark_count_rate < 0.0 || dark_count_rate >= 1.0)
      throw std::invalid_argument("dark_count_rate outside [0,1)");
    if (bits_per_channel < 1) throw std::invalid_argument("bits_per_channel must be >= 1");
    if (!channel_gains.empty() &&
        channel_gains.size() != static_cast<std::size_t>(channels))
      throw std::invalid_argument("channel_gains size must match channel count");
    if (!channel_phase_offsets.empty() &&
        channel_phase_offsets.size() != static_cast<std::size_t>(channels))
      throw std::invalid_argument("channel_phase_offsets size must match channel count");
    for (int c = 0; c < channels; ++c) {
      const double g = channel_gain(c);
      (void)ComplexGain(g, gain_phase);  // range check
      const double worst_slot_probability =
          4.0 * g * g * detector_efficiency + dark_count_rate;
      if (worst_slot_probability > 1.0)
        throw std::invalid_argument(
            "per-slot detection probability exceeds 1; lower the gain, efficiency "
            "or dark rate");
    }
  }
};

struct DetectionRecord {
  int channel = 0;
  Basis alice_basis = Basis::B1;
  Basis bob_basis = Basis::B1;
  int alice_bit = 0;
  long counts_w1 = 0;
  long counts_w2 = 0;
  double expected_n = 0.0;  // per-slot mean photon number, averaged over windows
};

enum class DecodeResult { Bit0, Bit1, Erasure, Inconclusive };

// Differential decode: a photon in exactly one half-window names the bit, no
// photons is an erasure, photons in both windows contradict each other.
inline DecodeResult differential_decode(const DetectionRecord& record,
                                        bool window_one_is_bit_one = true) {
  const bool w1 = record.counts_w1 > 0;
  const bool w2 = record.counts_w2 > 0;
  if (!w1 && !w2) return DecodeResult::Erasure;
  if (w1 && w2) return DecodeResult::Inconclusive;
  const bool hit_first = w1;
  const bool is_one = hit_first == window_one_is_bit_one;
  return is_one ? DecodeResult::Bit1 : DecodeResult::Bit0;
}

struct ChannelStats {
  long raw_bits = 0;
  long sifted = 0;
  long conclusive = 0;
  long errors = 0;
  double i_max = 0.0;  // mean counts, constructive window, over sifted bits
  double i_min = 0.0;
  double i_max_se = 0.0;
  double i_min_se = 0.0;
  double contrast = 0.0;
  double contrast_se = 0.0;
  double qber = 0.0;
  bool qber_defined = false;
};

struct SessionReport {
  std::vector<std::uint8_t> sifted_key_alice;
  std::vector<std::uint8_t> sifted_key_bob;
  double qber = 0.0;
  bool qber_defined = false;
  double erasure_rate = 0.0;       // over sifted positions
  double inconclusive_rate = 0.0;  // over sifted positions
  long sifted_total = 0;
  long raw_total = 0;
  std::vector<ChannelStats> channels;
};

namespace detail {

struct WindowMeans {
  double n_w1 = 0.0;  // per-slot mean photon number, window 1
  double n_w2 = 0.0;
};

// Mean photon numbers Bob sees in the two half-windows, conditional on Eve's
// per-bit basis phase. Her per-state randomness (measurement outcome, coin
// guesses) is mixed exactly: slots are independent, so the slot-level success
// probability is the branch-weighted mean.
inline WindowMeans window_means(const ComplexGain& gain, double phi_a_channel,
                                Basis bob_basis, const adversary::AttackModel& attack,
                                double phi_e) {
  const PerturbativeKet after_alice = phase_shift(
      opa_apply(PerturbativeKet::vacuum(), gain, 0.0, Subsystem::Bob), phi_a_channel,
      0.0, Subsystem::Bob);
  const auto branches =
      adversary::enumerate_attack_branches(attack, gain, after_alice, phi_a_channel, phi_e);

  WindowMeans means;
  for (const auto& branch : branches) {
    for (int window = 1; window <= 2; ++window) {
      const double phi_b = bob_phase(bob_basis, window);
      PerturbativeKet at_bob = phase_shift(branch.ket_to_bob, phi_b, 0.0, Subsystem::Bob);
      at_bob = opa_apply(at_bob, gain, 0.0, Subsystem::Bob);
      const double n = mean_photon_number(at_bob, Subsystem::Bob, Tone::Signal);
      (window == 1 ? means.n_w1 : means.n_w2) += branch.probability * n;
    }
  }
  return means;
}

inline double eve_basis_phase(RngStream& rng) { return rng.uniform_bit() ? kPi / 2.0 : 0.0; }

inline double slot_probability(double mean_photons, const SessionConfig& config) {
  const double p = mean_photons * config.detector_efficiency + config.dark_count_rate;
  if (p > 1.0)
    throw std::invalid_argument("per-slot detection probability exceeds 1");
  return p;
}

}  // namespace detail

// Simulates one bit of one channel: Alice's encoding, the attack transform,
// Bob's differential windows, and binomial photon counting over the coherence
// slots.
inline DetectionRecord simulate_bit(const SessionConfig& config, int channel,
                                    int alice_bit, Basis alice_basis, Basis bob_basis,
                                    const adversary::AttackModel& attack,
                                    RngStream& rng) {
  const ComplexGain gain(config.channel_gain(channel), config.gain_phase);
  const double phi_a =
      alice_encode(alice_bit, alice_basis) + config.channel_phase_offset(channel);

  double phi_e = 0.0;
  if (attack.kind == adversary::AttackModel::Kind::InterceptResend ||
      attack.kind == adversary::AttackModel::Kind::StealResend)
    phi_e = detail::eve_basis_phase(rng);

  const auto means = detail::window_means(gain, phi_a, bob_basis, attack, phi_e);
  const long half = config.coherence_slots / 2;

  DetectionRecord record;
  record.channel = channel;
  record.alice_basis = alice_basis;
  record.bob_basis = bob_basis;
  record.alice_bit = alice_bit;
  record.expected_n = 0.5 * (means.n_w1 + means.n_w2);
  record.counts_w1 = rng.binomial(half, detail::slot_probability(means.n_w1, config));
  record.counts_w2 = rng.binomial(half, detail::slot_probability(means.n_w2, config));
  return record;
}

// Sifting and scoring: keeps matched-basis records, decodes, accumulates the
// key streams, QBER over conclusive positions, and per-channel interference
// intensities split by the revealed constructive window.
inline SessionReport sift_and_score(const std::vector<DetectionRecord>& records,
                                    const SessionConfig& config) {
  SessionReport report;
  report.channels.assign(static_cast<std::size_t>(config.channels), ChannelStats{});
  std::vector<RunningStats> bright(static_cast<std::size_t>(config.channels));
  std::vector<RunningStats> dim(static_cast<std::size_t>(config.channels));

  long erased = 0, inconclusive = 0;
  for (const auto& record : records) {
    auto& ch = report.channels[static_cast<std::size_t>(record.channel)];
    ++ch.raw_bits;
    ++report.raw_total;
    if (record.alice_basis != record.bob_basis) continue;

    ++ch.sifted;
    ++report.sifted_total;
    const bool constructive_in_w1 =
        (record.alice_bit == 1) == config.window_one_is_bit_one;
    bright[static_cast<std::size_t>(record.channel)].add(
        static_cast<double>(constructive_in_w1 ? record.counts_w1 : record.counts_w2));
    dim[static_cast<std::size_t>(record.channel)].add(
        static_cast<double>(constructive_in_w1 ? record.counts_w2 : record.counts_w1));

    switch (differential_decode(record, config.window_one_is_bit_one)) {
      case DecodeResult::Erasure:
        ++erased;
        break;
      case DecodeResult::Inconclusive:
        ++inconclusive;
        break;
      case DecodeResult::Bit0:
      case DecodeResult::Bit1: {
        const int bob_bit =
            differential_decode(record, config.window_one_is_bit_one) == DecodeResult::Bit1
                ? 1
                : 0;
        report.sifted_key_alice.push_back(static_cast<std::uint8_t>(record.alice_bit));
        report.sifted_key_bob.push_back(static_cast<std::uint8_t>(bob_bit));
        ++ch.conclusive;
        if (bob_bit != record.alice_bit) ++ch.errors;
        break;
      }
    }
  }

  long total_conclusive = 0, total_errors = 0;
  for (std::size_t c = 0; c < report.channels.size(); ++c) {
    auto& ch = report.channels[c];
    total_conclusive += ch.conclusive;
    total_errors += ch.errors;
    ch.qber_defined = ch.conclusive > 0;
    ch.qber = ch.qber_defined
                  ? static_cast<double>(ch.errors) / static_cast<double>(ch.conclusive)
                  : 0.0;
    ch.i_max = bright[c].mean();
    ch.i_min = dim[c].mean();
    ch.i_max_se = bright[c].standard_error();
    ch.i_min_se = dim[c].standard_error();
    const auto v = contrast_from_means(ch.i_max, ch.i_max_se, ch.i_min, ch.i_min_se);
    ch.contrast = v.value;
    ch.contrast_se = v.standard_error;
  }

  report.qber_defined = total_conclusive > 0;
  report.qber = report.qber_defined ? static_cast<double>(total_errors) /
                                          static_cast<double>(total_conclusive)
                                    : 0.0;
  if (report.sifted_total > 0) {
    report.erasure_rate =
        static_cast<double>(erased) / static_cast<double>(report.sifted_total);
    report.inconclusive_rate =
        static_cast<double>(inconclusive) / static_cast<double>(report.sifted_total);
  }
  return report;
}

// Stream purposes for per-(channel, bit) child streams.
namespace stream_purpose {
inline constexpr std::uint64_t kAliceBit = 1;
inline constexpr std::uint64_t kAliceBasis = 2;
inline constexpr std::uint64_t kBobBasis = 3;
inline constexpr std::uint64_t kQuantum = 4;
}  // namespace stream_purpose

struct SessionResult {
  std::vector<DetectionRecord> records;
  SessionReport report;
};

// Mixes the per-channel slot-mean intensities of one window before photon
// counting; used to couple neighboring channels (modulation leakage).
using IntensityMixer = std::function<std::vector<double>(const std::vector<double>&)>;

// Full sampled session. Every random draw comes from a stream derived from
// (master_seed, channel, bit, purpose), so results do not depend on
// evaluation order. Channels advance in lockstep over the bit index so a
// mixer can couple their intensities.
inline SessionResult run_session(const SessionConfig& config,
                                 const adversary::AttackModel& attack,
                                 const IntensityMixer& mixer = {}) {
  config.validate();
  const std::size_t n_channels = static_cast<std::size_t>(config.channels);
  SessionResult result;
  result.records.reserve(n_channels * static_cast<std::size_t>(config.bits_per_channel));

  std::vector<DetectionRecord> row(n_channels);
  std::vector<RngStream> quantum_streams;
  std::vector<double> means_w1(n_channels), means_w2(n_channels);
  for (long bit = 0; bit < config.bits_per_channel; ++bit) {
    quantum_streams.clear();
    for (int channel = 0; channel < config.channels; ++channel) {
      const auto c = static_cast<std::uint64_t>(channel);
      const auto b = static_cast<std::uint64_t>(bit);
      auto alice_bit_stream =
          RngStream::derive(config.master_seed, c, b, stream_purpose::kAliceBit);
      auto alice_basis_stream =
          RngStream::derive(config.master_seed, c, b, stream_purpose::kAliceBasis);
      auto bob_basis_stream =
          RngStream::derive(config.master_seed, c, b, stream_purpose::kBobBasis);
      quantum_streams.push_back(
          RngStream::derive(config.master_seed, c, b, stream_purpose::kQuantum));

      DetectionRecord& record = row[static_cast<std::size_t>(channel)];
      record = DetectionRecord{};
      record.channel = channel;
      record.alice_bit = alice_bit_stream.uniform_bit();
      record.alice_basis = alice_basis_stream.uniform_bit() ? Basis::B2 : Basis::B1;
      record.bob_basis = bob_basis_stream.uniform_bit() ? Basis::B2 : Basis::B1;

      const ComplexGain gain(config.channel_gain(channel), config.gain_phase);
      const double phi_a = alice_encode(record.alice_bit, record.alice_basis) +
                           config.channel_phase_offset(channel);
      double phi_e = 0.0;
      if (attack.kind == adversary::AttackModel::Kind::InterceptResend ||
          attack.kind == adversary::AttackModel::Kind::StealResend)
        phi_e = detail::eve_basis_phase(quantum_streams.back());
      const auto means = detail::window_means(gain, phi_a, record.bob_basis, attack, phi_e);
      means_w1[static_cast<std::size_t>(channel)] = means.n_w1;
      means_w2[static_cast<std::size_t>(channel)] = means.n_w2;
    }

    const std::vector<double> mixed_w1 = mixer ? mixer(means_w1) : means_w1;
    const std::vector<double> mixed_w2 = mixer ? mixer(means_w2) : means_w2;
    const long half = config.coherence_slots / 2;
    for (std::size_t ch = 0; ch < n_channels; ++ch) {
      DetectionRecord& record = row[ch];
      record.expected_n = 0.5 * (mixed_w1[ch] + mixed_w2[ch]);
      record.counts_w1 =
          quantum_streams[ch].binomial(half, detail::slot_probability(mixed_w1[ch], config));
      record.counts_w2 =
          quantum_streams[ch].binomial(half, detail::slot_probability(mixed_w2[ch], config));
      result.records.push_back(record);
    }
  }
  result.report = sift_and_score(result.records, config);
  return result;
}

// ----- expectation mode -----
//
// No sampling: window means, decode-event probabilities and the contrast are
// propagated exactly, which pins the formula-level checks to 1e-12 instead of
// Monte Carlo noise.

struct ExpectationChannelReport {
  double i_max = 0.0;  // expected counts per window at constructive settings
  double i_min = 0.0;
  double contrast = 0.0;
  double qber = 0.0;
  double erasure_rate = 0.0;
  double inconclusive_rate = 0.0;
};

namespace detail {

struct DecodeProbabilities {
  double correct = 0.0;
  double wrong = 0.0;
  double erasure = 0.0;
  double inconclusive = 0.0;
};

inline DecodeProbabilities decode_probabilities(double p_constructive,
                                                double p_destructive, long half_window) {
  const double miss_c = std::pow(1.0 - p_constructive, static_cast<double>(half_window));
  const double miss_d = std::pow(1.0 - p_destructive, static_cast<double>(half_window));
  DecodeProbabilities out;
  out.correct = (1.0 - miss_c) * miss_d;
  out.wrong = (1.0 - miss_d) * miss_c;
  out.erasure = miss_c * miss_d;
  out.inconclusive = (1.0 - miss_c) * (1.0 - miss_d);
  return out;
}

}  // namespace detail

inline ExpectationChannelReport expectation_channel_report(
    const SessionConfig& config, int channel, const adversary::AttackModel& attack) {
  config.validate();
  const ComplexGain gain(config.channel_gain(channel), config.gain_phase);
  const long half = config.coherence_slots / 2;

  const bool eve_measures =
      attack.kind == adversary::AttackModel::Kind::InterceptResend ||
      attack.kind == adversary::AttackModel::Kind::StealResend;
  const std::vector<double> eve_phases =
      eve_measures ? std::vector<double>{0.0, kPi / 2.0} : std::vector<double>{0.0};
  const double eve_weight = 1.0 / static_cast<double>(eve_phases.size());

  ExpectationChannelReport out;
  double n_constructive = 0.0, n_destructive = 0.0;
  detail::DecodeProbabilities decode{};

  // Matched-basis cases only; both bases and both bits carry equal weight and
  // by the phase-sum symmetry the two bases give identical numbers, so
  // averaging over (bit, basis, Eve phase) is exact.
  for (const Basis basis : {Basis::B1, Basis::B2}) {
    for (const int bit : {0, 1}) {
      const double phi_a =
          alice_encode(bit, basis) + config.channel_phase_offset(channel);
      for (const double phi_e : eve_phases) {
        const auto means = detail::window_means(gain, phi_a, basis, attack, phi_e);
        const bool constructive_in_w1 = (bit == 1) == config.window_one_is_bit_one;
        const double n_c = constructive_in_w1 ? means.n_w1 : means.n_w2;
        const double n_d = constructive_in_w1 ? means.n_w2 : means.n_w1;
        const double weight = 0.25 * eve_weight;
        n_constructive += weight * n_c;
        n_destructive += weight * n_d;
        const auto probs = detail::decode_probabilities(
            detail::slot_probability(n_c, config), detail::slot_probability(n_d, config),
            half);
        decode.correct += weight * probs.correct;
        decode.wrong += weight * probs.wrong;
        decode.erasure += weight * probs.erasure;
        decode.inconclusive += weight * probs.inconclusive;
      }
    }
  }

  out.i_max = (n_constructive * config.detector_efficiency + config.dark_count_rate) *
              static_cast<double>(half);
  out.i_min = (n_destructive * config.detector_efficiency + config.dark_count_rate) *
              static_cast<double>(half);
  const double total = out.i_max + out.i_min;
  out.contrast = total > 0.0 ? (out.i_max - out.i_min) / total : 0.0;
  const double conclusive = decode.correct + decode.wrong;
  out.qber = conclusive > 0.0 ? decode.wrong / conclusive : 0.0;
  out.erasure_rate = decode.erasure;
  out.inconclusive_rate = decode.inconclusive;
  return out;
}

}  // namespace qmux::qkd
