#pragma once

#include "qmux/harness/config.hpp"
#include "qmux/harness/emit.hpp"
#include "qmux/harness/validate.hpp"
#include "qmux/spectral/channels.hpp"
#include "qmux/stats.hpp"
#include "qmux/teleport/teleport.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

namespace qmux::harness {

inline constexpr const char* kVersion = "0.1.0";

namespace run_detail {

inline std::uint64_t splitmix_of(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t s = master ^ (salt * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

inline nlohmann::json metadata(const ExperimentConfig& config, double elapsed_ms) {
  nlohmann::json meta;
  meta["version"] = kVersion;
  meta["command"] = command_name(config.command);
  meta["mode"] = config.mode == Mode::Sampled ? "sampled" : "expectation";
  meta["seed"] = config.seed;
  meta["elapsed_ms"] = elapsed_ms;  // informational; never emitted to CSV
  if (!config.warnings.empty()) meta["warnings"] = config.warnings;
  return meta;
}

// Eve's own interference statistics under a plain tap: she holds the
// reflected arm, so her fringe follows 2R/(1+R). Counted the same way Bob's
// windows are.
struct EveContrastSample {
  double contrast = 0.0;
  double standard_error = 0.0;
};

inline EveContrastSample sample_eve_contrast(double reflectance,
                                             const ExperimentConfig& config, long trials,
                                             std::uint64_t salt) {
  const ComplexGain gain(config.session.gain_magnitude, config.session.gain_phase);
  const long half = config.session.coherence_slots / 2;
  RunningStats bright, dim;
  for (long i = 0; i < trials; ++i) {
    auto rng = RngStream::derive(config.seed, salt, static_cast<std::uint64_t>(i), 17);
    for (const double phi_ae : {0.0, kPi}) {
      auto staged = phase_shift(
          opa_apply(PerturbativeKet::vacuum(), gain, 0.0, Subsystem::Bob), phi_ae, 0.0,
          Subsystem::Bob);
      auto joint = beamsplit_to_eve(staged, reflectance, BsConvention::RealAsymmetric);
      joint = opa_apply(joint, gain, 0.0, Subsystem::Eve);
      const double n = mean_photon_number(joint, Subsystem::Eve, Tone::Signal);
      const long counts = rng.binomial(half, n * config.session.detector_efficiency);
      (phi_ae == 0.0 ? bright : dim).add(static_cast<double>(counts));
    }
  }
  const auto v = contrast_from_means(bright.mean(), bright.standard_error(), dim.mean(),
                                     dim.standard_error());
  return {v.value, v.standard_error};
}

inline adversary::AttackModel attack_at_transmission(const adversary::AttackModel& base,
                                                     double transmission) {
  adversary::AttackModel attack = base;
  attack.reflectance = 1.0 - transmission;
  return attack;
}

inline ReportBundle run_qkd(const ExperimentConfig& config) {
  ReportBundle bundle;
  bundle.command = command_name(config.command);
  nlohmann::json& doc = bundle.structured;

  const qkd::SessionConfig& session = config.session;
  qkd::IntensityMixer mixer;
  if (config.crosstalk.leak_left > 0.0 || config.crosstalk.leak_right > 0.0) {
    const spectral::CrosstalkModel model(session.channels, config.crosstalk.leak_left,
                                         config.crosstalk.leak_right);
    mixer = [model](const std::vector<double>& v) { return apply_crosstalk(model, v); };
  }

  Table table;
  table.name = "channels";
  table.columns = {"channel", "raw_bits", "sifted", "conclusive", "qber",
                   "i_max", "i_min", "contrast", "contrast_se"};
  if (config.mode == Mode::Sampled) {
    const auto result = qkd::run_session(session, config.attack, mixer);
    const auto& report = result.report;
    for (std::size_t c = 0; c < report.channels.size(); ++c) {
      const auto& ch = report.channels[c];
      table.rows.push_back({static_cast<double>(c), static_cast<double>(ch.raw_bits),
                            static_cast<double>(ch.sifted),
                            static_cast<double>(ch.conclusive), ch.qber, ch.i_max,
                            ch.i_min, ch.contrast, ch.contrast_se});
    }
    doc["qber"] = report.qber;
    doc["qber_defined"] = report.qber_defined;
    doc["sift_fraction"] = report.raw_total > 0 ? static_cast<double>(report.sifted_total) /
                                                      static_cast<double>(report.raw_total)
                                                : 0.0;
    doc["erasure_rate"] = report.erasure_rate;
    doc["inconclusive_rate"] = report.inconclusive_rate;
    doc["sifted_key_length"] = report.sifted_key_alice.size();
  } else {
    for (int c = 0; c < session.channels; ++c) {
      const auto rep = qkd::expectation_channel_report(session, c, config.attack);
      table.rows.push_back({static_cast<double>(c), 0.0, 0.0, 0.0, rep.qber, rep.i_max,
                            rep.i_min, rep.contrast, 0.0});
    }
    doc["note"] = "expectation mode: exact means, no sampling";
  }
  bundle.tables.push_back(std::move(table));
  return bundle;
}

inline ReportBundle attack_sweep(const ExperimentConfig& config) {
  ReportBundle bundle;
  bundle.command = command_name(config.command);
  nlohmann::json& doc = bundle.structured;

  if (config.attack.kind == adversary::AttackModel::Kind::InterceptResend) {
    qkd::SessionConfig session = config.session;
    session.channels = 1;
    session.bits_per_channel = config.sweep.trials;
    Table table;
    table.name = "intercept_resend";
    table.columns = {"qber_mc", "qber_sem", "qber_closed_form",
                     "v_mc", "v_sem", "v_closed_form"};
    double qber = 0.0, qber_sem = 0.0, v = 0.0, v_sem = 0.0;
    if (config.mode == Mode::Sampled) {
      const auto result = qkd::run_session(session, config.attack);
      const auto& ch = result.report.channels.front();
      qber = result.report.qber;
      qber_sem = ch.conclusive > 0 ? std::sqrt(qber * (1.0 - qber) /
                                               static_cast<double>(ch.conclusive))
                                   : 0.0;
      v = ch.contrast;
      v_sem = ch.contrast_se;
    } else {
      const auto rep = qkd::expectation_channel_report(session, 0, config.attack);
      qber = rep.qber;
      v = rep.contrast;
    }
    table.rows.push_back({qber, qber_sem, 0.25, v, v_sem,
                          adversary::intercept_resend_contrast()});
    doc["sub_runs"] = 1;
    doc["attack"] = "intercept-resend";
    bundle.tables.push_back(std::move(table));
    return bundle;
  }

  const bool is_steal = config.attack.kind == adversary::AttackModel::Kind::Steal;
  Table table;
  table.name = "contrast";
  table.columns = {"T", "V_mc", "V_sem", "V_closed_form"};
  nlohmann::json eve_side = nlohmann::json::array();
  for (std::size_t i = 0; i < config.sweep.t_grid.size(); ++i) {
    const double t2 = config.sweep.t_grid[i];
    const auto attack = attack_at_transmission(config.attack, t2);
    const double closed =
        adversary::predicted_contrast(attack, config.session.gain_magnitude);
    double v = closed, sem = 0.0;
    qkd::SessionConfig session = config.session;
    session.channels = 1;
    session.bits_per_channel = config.sweep.trials;
    session.master_seed = splitmix_of(config.seed, 1000 + i);
    if (config.mode == Mode::Sampled) {
      const auto result = qkd::run_session(session, attack);
      v = result.report.channels.front().contrast;
      sem = result.report.channels.front().contrast_se;
    } else {
      v = qkd::expectation_channel_report(session, 0, attack).contrast;
    }
    table.rows.push_back({t2, v, sem, closed});

    if (is_steal) {
      nlohmann::json eve;
      eve["T"] = t2;
      eve["v_closed_form"] = adversary::eve_steal_contrast(1.0 - t2);
      if (config.mode == Mode::Sampled && t2 < 1.0) {
        const auto sampled = sample_eve_contrast(
            1.0 - t2, config, std::min<long>(config.sweep.trials, 20000), 7000 + i);
        eve["v_mc"] = sampled.contrast;
        eve["v_sem"] = sampled.standard_error;
      }
      eve_side.push_back(eve);
    }
  }
  doc["sub_runs"] = config.sweep.t_grid.size();
  doc["attack"] = is_steal ? "steal" : "steal-resend";
  if (!eve_side.empty()) doc["eve_side"] = eve_side;
  if (!is_steal) {
    // Highest crossover against the plain-steal witness on this grid.
    double crossover = 0.0;
    bool above_prev = false;
    for (const auto& row : table.rows) {
      const double t2 = row[0];
      if (t2 <= 0.0 || t2 >= 1.0) continue;
      const bool above = row[3] > adversary::steal_contrast(t2);
      if (above_prev && !above) crossover = t2;
      above_prev = above;
    }
    doc["steal_resend_crossover_T"] = crossover;
  }
  bundle.tables.push_back(std::move(table));
  return bundle;
}

inline ReportBundle run_teleport(const ExperimentConfig& config) {
  ReportBundle bundle;
  bundle.command = command_name(config.command);
  nlohmann::json& doc = bundle.structured;

  Table table;
  table.name = "added_noise";
  table.columns = {"g", "added_var_mc", "added_var_pred"};
  nlohmann::json details = nlohmann::json::array();
  for (std::size_t i = 0; i < config.teleport.g_grid.size(); ++i) {
    const double g = config.teleport.g_grid[i];
    const teleport::SqueezeSettings settings(g, config.teleport.t);
    const double predicted = teleport::added_noise_variance(g);
    double measured;
    nlohmann::json entry;
    entry["g"] = g;
    if (config.mode == Mode::Sampled) {
      teleport::GaussianInput input;
      input.mean_x = config.teleport.mean_x;
      input.mean_y = config.teleport.mean_y;
      auto rng = RngStream::derive(config.seed, 2000 + i, 0, 0);
      const auto stats =
          teleport::teleport_monte_carlo(input, settings, config.teleport.samples, rng);
      measured = 0.5 * (stats.added_var_x + stats.added_var_y);
      entry["added_var_se"] = 0.5 * (stats.added_var_x_se + stats.added_var_y_se);
      entry["naive_added_var_x"] = stats.naive_added_var_x;
      entry["mean_x"] = stats.mean_x;
      entry["mean_y"] = stats.mean_y;
      entry["mean_x_se"] = stats.mean_x_se;
    } else {
      // Exact residual power per quadrature from the symbolic coefficients.
      const auto out = teleport::teleport_symbolic(1.0, 1.0, settings);
      const double var_x = 0.25 * std::norm(out.x_coef(teleport::Source::Opa2));
      const double var_y = 0.25 * std::norm(out.y_coef(teleport::Source::Opa1));
      measured = 0.5 * (var_x + var_y);
      entry["symbolic_residual_var"] = measured;
    }
    details.push_back(entry);
    table.rows.push_back({g, measured, predicted});
  }
  doc["points"] = details;
  doc["t"] = config.teleport.t;
  bundle.tables.push_back(std::move(table));
  return bundle;
}

inline ReportBundle design_setup(const ExperimentConfig& config) {
  ReportBundle bundle;
  bundle.command = command_name(config.command);
  const double omega_p = 2.0 * (2.0 * kPi * spectral::kSpeedOfLight / config.optics.lambda);
  const double omega = config.optics.detuning_fraction * omega_p / 2.0;
  const auto design = spectral::design_optics(config.optics.pixel, config.optics.aperture,
                                              config.optics.lambda, config.optics.span,
                                              omega, omega_p, config.optics.channel_pitch);
  Table table;
  table.name = "design";
  table.columns = {"f_lens_m", "grating_period_m", "capacity"};
  table.rows.push_back(
      {design.focal_length, design.grating_period, static_cast<double>(design.capacity)});
  bundle.structured["focal_length_m"] = design.focal_length;
  bundle.structured["grating_period_m"] = design.grating_period;
  bundle.structured["capacity"] = design.capacity;
  bundle.tables.push_back(std::move(table));
  return bundle;
}

// Two channels scanned over a full factorial (phi_1, phi_2) grid; the
// leakage model mixes their interference intensities, and the published
// error metric is evaluated in both directions.
inline ReportBundle crosstalk_test(const ExperimentConfig& config) {
  ReportBundle bundle;
  bundle.command = command_name(config.command);
  nlohmann::json& doc = bundle.structured;

  const int points = config.crosstalk.phase_points;
  const long trials = config.crosstalk.trials_per_point;
  const double g = config.crosstalk.gain;
  const long half = config.crosstalk.coherence_slots / 2;
  const spectral::CrosstalkModel model(2, config.crosstalk.leak_left,
                                       config.crosstalk.leak_right);
  const ComplexGain gain(g);

  auto interference = [&](double phi) {
    PerturbativeKet ket =
        opa_apply(PerturbativeKet::vacuum(), gain, 0.0, Subsystem::Bob);
    ket = phase_shift(ket, phi, 0.0, Subsystem::Bob);
    ket = opa_apply(ket, gain, 0.0, Subsystem::Bob);
    return mean_photon_number(ket, Subsystem::Bob, Tone::Signal);
  };

  std::vector<std::vector<double>> grid_1(static_cast<std::size_t>(points)),
      grid_2(static_cast<std::size_t>(points));
  RunningStats noise_scale;
  for (int i = 0; i < points; ++i) {
    grid_1[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(points));
    grid_2[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(points));
    const double phi_1 = 2.0 * kPi * i / points;
    for (int j = 0; j < points; ++j) {
      const double phi_2 = 2.0 * kPi * j / points;
      const auto mixed =
          apply_crosstalk(model, {interference(phi_1), interference(phi_2)});
      double i1, i2;
      if (config.mode == Mode::Sampled) {
        auto rng = RngStream::derive(config.seed, 3000 + i, static_cast<std::uint64_t>(j), 0);
        RunningStats c1, c2;
        for (long trial = 0; trial < trials; ++trial) {
          c1.add(static_cast<double>(rng.binomial(half, mixed[0])));
          c2.add(static_cast<double>(rng.binomial(half, mixed[1])));
        }
        i1 = c1.mean();
        i2 = c2.mean();
        noise_scale.add(c1.standard_error());
      } else {
        i1 = mixed[0] * static_cast<double>(half);
        i2 = mixed[1] * static_cast<double>(half);
      }
      grid_1[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = i1;
      // For the reverse direction the roles of the axes swap.
      grid_2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = i2;
    }
  }

  const auto err_1 = spectral::crosstalk_error_metric(grid_1);
  const auto err_2 = spectral::crosstalk_error_metric(grid_2);

  Table t1;
  t1.name = "err_channel1_vs_phi2";
  t1.columns = {"phi_2", "err_1"};
  for (int j = 0; j < points; ++j)
    t1.rows.push_back({2.0 * kPi * j / points, err_1[static_cast<std::size_t>(j)]});
  Table t2;
  t2.name = "err_channel2_vs_phi1";
  t2.columns = {"phi_1", "err_2"};
  for (int j = 0; j < points; ++j)
    t2.rows.push_back({2.0 * kPi * j / points, err_2[static_cast<std::size_t>(j)]});

  auto amplitude = [](const std::vector<double>& curve) {
    double lo = curve.front(), hi = curve.front();
    for (double v : curve) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi - lo;
  };
  doc["err1_amplitude"] = amplitude(err_1);
  doc["err2_amplitude"] = amplitude(err_2);
  doc["leak_left"] = config.crosstalk.leak_left;
  doc["leak_right"] = config.crosstalk.leak_right;
  if (config.mode == Mode::Sampled) {
    // Standard error of one Err point: the phi_1 average of per-point means.
    const double per_point = noise_scale.mean();
    doc["err_point_sigma"] =
        per_point / std::sqrt(static_cast<double>(points));
  }
  bundle.tables.push_back(std::move(t1));
  bundle.tables.push_back(std::move(t2));
  return bundle;
}

inline ReportBundle validate_command(const ExperimentConfig& config) {
  ReportBundle bundle;
  bundle.command = command_name(config.command);
  const auto report = run_validation();
  Table table;
  table.name = "properties";
  table.columns = {"index", "passed", "worst", "tolerance"};
  nlohmann::json props = nlohmann::json::array();
  for (std::size_t i = 0; i < report.properties.size(); ++i) {
    const auto& p = report.properties[i];
    table.rows.push_back(
        {static_cast<double>(i), p.passed ? 1.0 : 0.0, p.worst, p.tolerance});
    nlohmann::json entry;
    entry["name"] = p.name;
    entry["passed"] = p.passed;
    entry["worst"] = p.worst;
    entry["tolerance"] = p.tolerance;
    if (!p.detail.empty()) entry["detail"] = p.detail;
    props.push_back(entry);
  }
  bundle.structured["properties"] = props;
  bundle.structured["notes"] = report.notes;
  bundle.structured["all_passed"] = report.all_passed();
  bundle.failed = !report.all_passed();
  bundle.tables.push_back(std::move(table));
  return bundle;
}

}  // namespace run_detail

inline ReportBundle execute(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  ReportBundle bundle;
  switch (config.command) {
    case Command::RunQkd: bundle = run_detail::run_qkd(config); break;
    case Command::AttackSweep: bundle = run_detail::attack_sweep(config); break;
    case Command::RunTeleport: bundle = run_detail::run_teleport(config); break;
    case Command::DesignSetup: bundle = run_detail::design_setup(config); break;
    case Command::CrosstalkTest: bundle = run_detail::crosstalk_test(config); break;
    case Command::Validate: bundle = run_detail::validate_command(config); break;
  }
  const auto elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started);
  bundle.structured["meta"] = run_detail::metadata(config, elapsed.count());
  return bundle;
}

}  // namespace qmux::harness
