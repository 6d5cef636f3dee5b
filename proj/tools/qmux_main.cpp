// Command-line front end: loads an optional JSON config, applies flag
// overrides, runs the requested experiment and writes the report files.

#include "qmux/harness/config.hpp"
#include "qmux/harness/emit.hpp"
#include "qmux/harness/run.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

namespace {

using qmux::harness::Command;
using qmux::harness::ConfigError;
using qmux::harness::ExperimentConfig;
using qmux::harness::Mode;

struct CliOptions {
  std::string config_path;
  std::string mode;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;

  // attack-sweep
  std::string attack;
  std::vector<double> t_grid;
  long trials = -1;

  // run-qkd / session overrides
  int channels = -1;
  double gain = -1.0;
  long bits = -1;

  // run-teleport
  std::vector<double> g_grid;
  long samples = -1;
  double t_bs = -1.0;

  // design-setup
  double pixel = -1.0, aperture = -1.0, lambda = -1.0, span = -1.0;

  // crosstalk-test
  double leak_left = -1.0, leak_right = -1.0;
};

ExperimentConfig assemble(Command command, const CliOptions& options) {
  nlohmann::json document;
  if (!options.config_path.empty()) {
    std::ifstream in(options.config_path);
    if (!in) throw ConfigError("cannot open config file: " + options.config_path);
    try {
      in >> document;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("parse error in " + options.config_path + ": " + e.what());
    }
    if (!document.is_object()) throw ConfigError("config root must be an object");
  } else {
    document = nlohmann::json::object();
    document["schema_version"] = ExperimentConfig::kSchemaVersion;
  }
  document["command"] = qmux::harness::command_name(command);

  if (options.seed_given) document["seed"] = options.seed;
  if (!options.mode.empty()) document["mode"] = options.mode;
  if (!options.out_dir.empty()) document["out_dir"] = options.out_dir;

  auto section = [&document](const char* name) -> nlohmann::json& {
    if (!document.contains(name)) document[name] = nlohmann::json::object();
    return document[name];
  };

  if (!options.attack.empty()) section("attack")["type"] = options.attack;
  if (!options.t_grid.empty()) section("sweep")["t_grid"] = options.t_grid;
  if (options.trials > 0) section("sweep")["trials"] = options.trials;
  if (options.channels > 0) section("session")["channels"] = options.channels;
  if (options.gain >= 0.0) section("session")["gain"] = options.gain;
  if (options.bits > 0) section("session")["bits_per_channel"] = options.bits;
  if (!options.g_grid.empty()) section("teleport")["g_grid"] = options.g_grid;
  if (options.samples > 0) section("teleport")["samples"] = options.samples;
  if (options.t_bs > 0.0) section("teleport")["t"] = options.t_bs;
  if (options.pixel > 0.0) section("optics")["pixel"] = options.pixel;
  if (options.aperture > 0.0) section("optics")["aperture"] = options.aperture;
  if (options.lambda > 0.0) section("optics")["lambda"] = options.lambda;
  if (options.span > 0.0) section("optics")["span"] = options.span;
  if (options.leak_left >= 0.0) section("crosstalk")["leak_left"] = options.leak_left;
  if (options.leak_right >= 0.0) section("crosstalk")["leak_right"] = options.leak_right;

  return qmux::harness::parse_config(document);
}

int run(Command command, const CliOptions& options) {
  const ExperimentConfig config = assemble(command, options);
  for (const auto& warning : config.warnings)
    std::cerr << "warning: " << warning << '\n';

  const auto bundle = qmux::harness::execute(config);
  const auto written = qmux::harness::emit(bundle, config.out_dir);
  for (const auto& path : written) std::cout << "wrote " << path << '\n';

  if (config.command == Command::Validate) {
    for (const auto& entry : bundle.structured.at("properties")) {
      std::cout << (entry.at("passed").get<bool>() ? "[PASS] " : "[FAIL] ")
                << entry.at("name").get<std::string>() << '\n';
    }
    for (const auto& note : bundle.structured.at("notes"))
      std::cout << "note: " << note.get<std::string>() << '\n';
  }
  return bundle.failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-multiplexed squeezed-light protocol simulator"};
  app.require_subcommand(1);

  CliOptions options;
  auto add_common = [&options](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "JSON config file");
    sub->add_option("--seed", options.seed, "master seed (required in sampled mode)")
        ->each([&options](const std::string&) { options.seed_given = true; });
    sub->add_option("--mode", options.mode, "expectation | sampled")
        ->check(CLI::IsMember({"expectation", "sampled"}));
    sub->add_option("--out", options.out_dir, "output directory");
  };

  auto* run_qkd = app.add_subcommand("run-qkd", "multiplexed QKD session");
  add_common(run_qkd);
  run_qkd->add_option("--channels", options.channels, "number of spectral channels");
  run_qkd->add_option("--gain", options.gain, "parametric gain magnitude");
  run_qkd->add_option("--bits", options.bits, "bits per channel");
  run_qkd->add_option("--attack", options.attack,
                      "none | steal | steal-resend | intercept-resend");

  auto* sweep = app.add_subcommand("attack-sweep", "contrast vs transmission curves");
  add_common(sweep);
  sweep->add_option("--attack", options.attack,
                    "steal | steal-resend | intercept-resend")
      ->required();
  sweep->add_option("--t-grid", options.t_grid, "transmission grid points");
  sweep->add_option("--trials", options.trials, "bits per grid point");
  sweep->add_option("--gain", options.gain, "parametric gain magnitude");

  auto* teleport = app.add_subcommand("run-teleport", "teleportation noise sweep");
  add_common(teleport);
  teleport->add_option("--g-grid", options.g_grid, "squeeze-gain grid");
  teleport->add_option("--samples", options.samples, "Monte Carlo samples per point");
  teleport->add_option("--t", options.t_bs, "output beamsplitter transmission amplitude");

  auto* design = app.add_subcommand("design-setup", "pulse-shaper design calculator");
  add_common(design);
  design->add_option("--pixel", options.pixel, "modulator pixel size, m");
  design->add_option("--aperture", options.aperture, "lens aperture, m");
  design->add_option("--lambda", options.lambda, "center wavelength, m");
  design->add_option("--span", options.span, "modulator span, m");

  auto* crosstalk = app.add_subcommand("crosstalk-test", "neighbor-channel error metric");
  add_common(crosstalk);
  crosstalk->add_option("--leak", options.leak_right, "rightward leakage fraction");
  crosstalk->add_option("--leak-left", options.leak_left, "leftward leakage fraction");

  auto* validate = app.add_subcommand("validate", "closed-form / oracle invariant suite");
  add_common(validate);

  CLI11_PARSE(app, argc, argv);

  Command command = Command::Validate;
  if (run_qkd->parsed()) command = Command::RunQkd;
  else if (sweep->parsed()) command = Command::AttackSweep;
  else if (teleport->parsed()) command = Command::RunTeleport;
  else if (design->parsed()) command = Command::DesignSetup;
  else if (crosstalk->parsed()) command = Command::CrosstalkTest;

  try {
    return run(command, options);
  } catch (const qmux::harness::ConfigError& e) {
    std::cerr << "error[config]: " << e.what() << '\n';
    return 2;
  } catch (const qmux::harness::EmitError& e) {
    std::cerr << "error[io]: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error[runtime]: " << e.what() << '\n';
    return 3;
  }
}
