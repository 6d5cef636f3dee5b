#pragma once

#include "qmux/adversary/attacks.hpp"
#include "qmux/qkd/session.hpp"
#include "qmux/spectral/channels.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmux::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Command { RunQkd, AttackSweep, RunTeleport, DesignSetup, CrosstalkTest, Validate };

enum class Mode { Expectation, Sampled };

struct SweepConfig {
  std::vector<double> t_grid;  // transmissions; default 0..1 step 0.05
  long trials = 100000;        // bits per grid point in sampled mode
};

struct TeleportConfig {
  std::vector<double> g_grid{0.0, 0.5, 1.0, 2.0};
  double t = 0.9999;
  long samples = 100000;
  double mean_x = 1.0;
  double mean_y = 0.0;
};

struct CrosstalkConfig {
  double leak_left = 0.0;
  double leak_right = 0.1;
  int phase_points = 16;
  long trials_per_point = 200;
  double gain = 0.01;
  int coherence_slots = 10000;
};

struct OpticsConfig {
  double pixel = 10e-6;
  double aperture = 10e-3;
  double lambda = 1.56e-6;
  double span = 3.68e-3;
  double detuning_fraction = 0.05;  // omega as a fraction of omega_p / 2
  double channel_pitch = 160e-6;
};

struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  Command command = Command::Validate;
  Mode mode = Mode::Expectation;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "out";

  qkd::SessionConfig session;
  adversary::AttackModel attack;
  SweepConfig sweep;
  TeleportConfig teleport;
  CrosstalkConfig crosstalk;
  OpticsConfig optics;
  std::optional<spectral::GridConfig> grid;

  void finalize() {
    if (sweep.t_grid.empty())
      for (int i = 0; i <= 20; ++i) sweep.t_grid.push_back(i * 0.05);
    if (mode == Mode::Sampled && !seed_given)
      throw ConfigError("sampled mode requires a seed");
    session.master_seed = seed;
    if (grid) {
      const auto built = spectral::build_grid(*grid);
      session.channels = built.count();
      session.channel_gains = built.gains();
      session.channel_phase_offsets = built.phase_offsets();
    }
    try {
      session.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("session: ") + e.what());
    }
    if (session.gain_magnitude > ComplexGain::kWarnThreshold)
      warnings.push_back("gain above 0.3: first-order statistics degrade");
  }

  std::vector<std::string> warnings;
};

namespace detail {

inline void require_keys(const nlohmann::json& object, const char* scope,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : object.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(std::string("unknown key '") + item.key() + "' in " + scope);
  }
}

template <typename T>
T get_or(const nlohmann::json& object, const char* key, T fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

inline Command parse_command(const std::string& name) {
  if (name == "run-qkd") return Command::RunQkd;
  if (name == "attack-sweep") return Command::AttackSweep;
  if (name == "run-teleport") return Command::RunTeleport;
  if (name == "design-setup") return Command::DesignSetup;
  if (name == "crosstalk-test") return Command::CrosstalkTest;
  if (name == "validate") return Command::Validate;
  throw ConfigError("unknown command '" + name + "'");
}

inline adversary::AttackModel parse_attack(const nlohmann::json& object) {
  require_keys(object, "attack", {"type", "reflectance", "convention"});
  const std::string type = get_or<std::string>(object, "type", "none");
  const double reflectance = get_or<double>(object, "reflectance", 0.0);
  const std::string convention_name =
      get_or<std::string>(object, "convention", "table1");
  BsConvention convention;
  if (convention_name == "table1")
    convention = BsConvention::RealAsymmetric;
  else if (convention_name == "eq9")
    convention = BsConvention::Symmetric;
  else
    throw ConfigError("attack.convention must be 'table1' or 'eq9'");

  try {
    if (type == "none") return adversary::AttackModel::none();
    if (type == "intercept-resend") return adversary::AttackModel::intercept_resend();
    if (type == "steal") return adversary::AttackModel::steal(reflectance, convention);
    if (type == "steal-resend")
      return adversary::AttackModel::steal_resend(reflectance, convention);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("attack: ") + e.what());
  }
  throw ConfigError("attack.type must be one of none, intercept-resend, steal, steal-resend");
}

inline qkd::SessionConfig parse_session(const nlohmann::json& object) {
  require_keys(object, "session",
               {"channels", "gain", "gain_phase", "coherence_slots",
                "detector_efficiency", "dark_count_rate", "bits_per_channel",
                "window_one_is_bit_one"});
  qkd::SessionConfig session;
  session.channels = get_or<int>(object, "channels", session.channels);
  session.gain_magnitude = get_or<double>(object, "gain", session.gain_magnitude);
  session.gain_phase = get_or<double>(object, "gain_phase", session.gain_phase);
  session.coherence_slots =
      get_or<int>(object, "coherence_slots", session.coherence_slots);
  session.detector_efficiency =
      get_or<double>(object, "detector_efficiency", session.detector_efficiency);
  session.dark_count_rate =
      get_or<double>(object, "dark_count_rate", session.dark_count_rate);
  session.bits_per_channel =
      get_or<long>(object, "bits_per_channel", session.bits_per_channel);
  session.window_one_is_bit_one =
      get_or<bool>(object, "window_one_is_bit_one", session.window_one_is_bit_one);
  return session;
}

inline SweepConfig parse_sweep(const nlohmann::json& object) {
  require_keys(object, "sweep", {"t_grid", "t_start", "t_stop", "t_step", "trials"});
  SweepConfig sweep;
  if (object.contains("t_grid")) {
    sweep.t_grid = get_or<std::vector<double>>(object, "t_grid", {});
  } else if (object.contains("t_start") || object.contains("t_stop") ||
             object.contains("t_step")) {
    const double start = get_or<double>(object, "t_start", 0.0);
    const double stop = get_or<double>(object, "t_stop", 1.0);
    const double step = get_or<double>(object, "t_step", 0.05);
    if (step <= 0.0 || stop < start) throw ConfigError("sweep: bad t range");
    for (double t = start; t <= stop + 1e-12; t += step) sweep.t_grid.push_back(t);
  }
  for (double t : sweep.t_grid)
    if (t < 0.0 || t > 1.0) throw ConfigError("sweep: transmission out of range [0,1]");
  sweep.trials = get_or<long>(object, "trials", sweep.trials);
  if (sweep.trials < 1) throw ConfigError("sweep: trials must be positive");
  return sweep;
}

inline TeleportConfig parse_teleport(const nlohmann::json& object) {
  require_keys(object, "teleport", {"g_grid", "t", "samples", "mean_x", "mean_y"});
  TeleportConfig teleport;
  teleport.g_grid = get_or<std::vector<double>>(object, "g_grid", teleport.g_grid);
  teleport.t = get_or<double>(object, "t", teleport.t);
  teleport.samples = get_or<long>(object, "samples", teleport.samples);
  teleport.mean_x = get_or<double>(object, "mean_x", teleport.mean_x);
  teleport.mean_y = get_or<double>(object, "mean_y", teleport.mean_y);
  for (double g : teleport.g_grid)
    if (g < 0.0) throw ConfigError("teleport: squeeze gain must be >= 0");
  if (teleport.t <= 0.0 || teleport.t >= 1.0)
    throw ConfigError("teleport: t must lie in (0,1) so the feedforward gain exists");
  if (teleport.samples < 2) throw ConfigError("teleport: need at least two samples");
  return teleport;
}

inline CrosstalkConfig parse_crosstalk(const nlohmann::json& object) {
  require_keys(object, "crosstalk",
               {"leak_left", "leak_right", "phase_points", "trials_per_point", "gain",
                "coherence_slots"});
  CrosstalkConfig crosstalk;
  crosstalk.leak_left = get_or<double>(object, "leak_left", crosstalk.leak_left);
  crosstalk.leak_right = get_or<double>(object, "leak_right", crosstalk.leak_right);
  crosstalk.phase_points = get_or<int>(object, "phase_points", crosstalk.phase_points);
  crosstalk.trials_per_point =
      get_or<long>(object, "trials_per_point", crosstalk.trials_per_point);
  crosstalk.gain = get_or<double>(object, "gain", crosstalk.gain);
  crosstalk.coherence_slots =
      get_or<int>(object, "coherence_slots", crosstalk.coherence_slots);
  if (crosstalk.leak_left < 0.0 || crosstalk.leak_right < 0.0 ||
      crosstalk.leak_left + crosstalk.leak_right > 1.0)
    throw ConfigError("crosstalk: leak fractions must be >= 0 and sum to <= 1");
  if (crosstalk.phase_points < 2) throw ConfigError("crosstalk: need >= 2 phase points");
  if (crosstalk.trials_per_point < 1)
    throw ConfigError("crosstalk: trials_per_point must be positive");
  return crosstalk;
}

inline OpticsConfig parse_optics(const nlohmann::json& object) {
  require_keys(object, "optics",
               {"pixel", "aperture", "lambda", "span", "detuning_fraction",
                "channel_pitch"});
  OpticsConfig optics;
  optics.pixel = get_or<double>(object, "pixel", optics.pixel);
  optics.aperture = get_or<double>(object, "aperture", optics.aperture);
  optics.lambda = get_or<double>(object, "lambda", optics.lambda);
  optics.span = get_or<double>(object, "span", optics.span);
  optics.detuning_fraction =
      get_or<double>(object, "detuning_fraction", optics.detuning_fraction);
  optics.channel_pitch = get_or<double>(object, "channel_pitch", optics.channel_pitch);
  if (optics.detuning_fraction <= 0.0 || optics.detuning_fraction >= 1.0)
    throw ConfigError("optics: detuning_fraction must lie in (0,1)");
  return optics;
}

inline spectral::GridConfig parse_grid(const nlohmann::json& object) {
  require_keys(object, "grid",
               {"span", "channel_width", "gap", "gain", "envelope", "dispersion_kappa",
                "center_wavelength", "bandwidth"});
  spectral::GridConfig grid;
  grid.span = get_or<double>(object, "span", grid.span);
  grid.channel_width = get_or<double>(object, "channel_width", grid.channel_width);
  grid.gap = get_or<double>(object, "gap", grid.gap);
  grid.gain_magnitude = get_or<double>(object, "gain", grid.gain_magnitude);
  grid.dispersion_kappa =
      get_or<double>(object, "dispersion_kappa", grid.dispersion_kappa);
  grid.center_wavelength =
      get_or<double>(object, "center_wavelength", grid.center_wavelength);
  grid.bandwidth = get_or<double>(object, "bandwidth", grid.bandwidth);
  const std::string envelope = get_or<std::string>(object, "envelope", "flat");
  if (envelope == "flat")
    grid.envelope = spectral::GridConfig::Envelope::Flat;
  else if (envelope == "raised-cosine")
    grid.envelope = spectral::GridConfig::Envelope::RaisedCosine;
  else
    throw ConfigError("grid.envelope must be 'flat' or 'raised-cosine'");
  return grid;
}

}  // namespace detail

// Parses and validates a full experiment description. Unknown keys are
// rejected rather than ignored so published configs stay reproducible.
inline ExperimentConfig parse_config(const nlohmann::json& document) {
  if (!document.is_object()) throw ConfigError("config root must be an object");
  detail::require_keys(document, "config root",
                       {"schema_version", "command", "seed", "mode", "out_dir", "session",
                        "attack", "sweep", "teleport", "crosstalk", "optics", "grid"});
  const int version = detail::get_or<int>(document, "schema_version", -1);
  if (version != ExperimentConfig::kSchemaVersion)
    throw ConfigError("schema_version must be " +
                      std::to_string(ExperimentConfig::kSchemaVersion));
  if (!document.contains("command")) throw ConfigError("missing 'command'");

  ExperimentConfig config;
  config.command = detail::parse_command(document.at("command").get<std::string>());
  const std::string mode = detail::get_or<std::string>(document, "mode", "expectation");
  if (mode == "expectation")
    config.mode = Mode::Expectation;
  else if (mode == "sampled")
    config.mode = Mode::Sampled;
  else
    throw ConfigError("mode must be 'expectation' or 'sampled'");
  if (document.contains("seed")) {
    config.seed = detail::get_or<std::uint64_t>(document, "seed", 0);
    config.seed_given = true;
  }
  config.out_dir = detail::get_or<std::string>(document, "out_dir", config.out_dir);

  if (document.contains("session")) config.session = detail::parse_session(document.at("session"));
  if (document.contains("attack")) config.attack = detail::parse_attack(document.at("attack"));
  if (document.contains("sweep")) config.sweep = detail::parse_sweep(document.at("sweep"));
  if (document.contains("teleport"))
    config.teleport = detail::parse_teleport(document.at("teleport"));
  if (document.contains("crosstalk"))
    config.crosstalk = detail::parse_crosstalk(document.at("crosstalk"));
  if (document.contains("optics")) config.optics = detail::parse_optics(document.at("optics"));
  if (document.contains("grid")) config.grid = detail::parse_grid(document.at("grid"));

  config.finalize();
  return config;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json document;
  try {
    in >> document;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("parse error in " + path + ": " + e.what());
  }
  return parse_config(document);
}

inline const char* command_name(Command command) {
  switch (command) {
    case Command::RunQkd: return "run-qkd";
    case Command::AttackSweep: return "attack-sweep";
    case Command::RunTeleport: return "run-teleport";
    case Command::DesignSetup: return "design-setup";
    case Command::CrosstalkTest: return "crosstalk-test";
    case Command::Validate: return "validate";
  }
  return "unknown";
}

}  // namespace qmux::harness
