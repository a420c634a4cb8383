// qdnoise: command-line front end for the detuning-noise laboratory.
// Subcommands wrap one library operation each; `reproduce` chains them into
// figure-equivalent dataset pipelines. Every run writes a manifest echoing
// the resolved configuration. Exit codes: 0 ok, 2 config error, 3 numeric
// failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "qdn/charge_conversion.hpp"
#include "qdn/fitting.hpp"
#include "qdn/noise_synth.hpp"
#include "qdn/pipeline.hpp"
#include "qdn/qubit_sim.hpp"
#include "qdn/spectral.hpp"

namespace {

namespace fs = std::filesystem;
using qdn::pipeline::RunResult;
using qdn::pipeline::ScenarioConfig;

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> scale;
  std::optional<int> threads;
};

void add_global_flags(CLI::App* cmd, GlobalArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON scenario configuration");
  cmd->add_option("--seed", args.seed, "master seed override");
  cmd->add_option("--out", args.out, "output directory override");
  cmd->add_option("--scale", args.scale, "duration/shot scale in (0, 1]");
  cmd->add_option("--threads", args.threads, "worker thread cap");
}

ScenarioConfig resolve_config(const GlobalArgs& args) {
  ScenarioConfig cfg = args.config_path.empty()
                           ? ScenarioConfig()
                           : ScenarioConfig::load(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.out) cfg.out_dir = *args.out;
  if (args.scale) cfg.scale = *args.scale;
  if (args.threads) cfg.threads = *args.threads;
  if (!(cfg.scale > 0.0) || cfg.scale > 1.0)
    throw std::invalid_argument("scale must lie in (0, 1]");
  if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
  return cfg;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open " + path);
  nlohmann::json j;
  is >> j;
  return j;
}

void finish(const ScenarioConfig& cfg, const std::string& command,
            const RunResult& result) {
  qdn::pipeline::write_manifest(cfg, command, result, cfg.out_dir);
  std::cout << result.summary.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qdnoise: spin-qubit detuning-noise simulation and analysis"};
  app.require_subcommand(1);

  GlobalArgs args;
  std::string figure = "fig1d";
  std::string input_path;
  std::string scale_flag_kind = "ramsey";

  auto* synth = app.add_subcommand("synth", "synthesize a detuning noise trace");
  add_global_flags(synth, args);

  auto* reproduce = app.add_subcommand("reproduce", "run a figure pipeline");
  add_global_flags(reproduce, args);
  reproduce->add_option("--figure", figure,
                        "fig1d | fig2c | fig2d | fig3b | hyperfine_table")
      ->required();

  auto* welch = app.add_subcommand("welch", "spectral estimate of a trace file");
  add_global_flags(welch, args);
  welch->add_option("--input", input_path, "trace file (.qdnt)")->required();

  auto* sim_ramsey =
      app.add_subcommand("simulate-ramsey", "fringe scan against synthesized noise");
  add_global_flags(sim_ramsey, args);

  auto* sim_echo = app.add_subcommand("simulate-echo", "echo decay acquisition");
  add_global_flags(sim_echo, args);

  auto* track = app.add_subcommand("track", "extract detuning from a fringe dataset");
  add_global_flags(track, args);
  track->add_option("--input", input_path, "fringe dataset (.json)")->required();

  auto* fit_decay = app.add_subcommand("fit-decay", "Gaussian decay fit of a curve");
  add_global_flags(fit_decay, args);
  fit_decay->add_option("--input", input_path, "decay curve (.json)")->required();

  auto* fit_echo_cmd = app.add_subcommand("fit-echo", "echo decay fit of a curve");
  add_global_flags(fit_echo_cmd, args);
  fit_echo_cmd->add_option("--input", input_path, "decay curve (.json)")->required();

  auto* t2scan = app.add_subcommand(
      "t2star-scan", "decay-line dataset, bundle averaging, and decay-time fits");
  add_global_flags(t2scan, args);

  auto* convert = app.add_subcommand("convert",
                                     "charge-to-detuning conversion of a PSD model "
                                     "(.json) or current trace (.qdnt)");
  add_global_flags(convert, args);
  convert->add_option("--input", input_path, "input file")->required();
  convert->add_option("--input-unit", scale_flag_kind,
                      "unit of a .qdnt input (default current-pA)");

  auto* hyperfine = app.add_subcommand("hyperfine", "nuclear-bath dephasing table");
  add_global_flags(hyperfine, args);

  CLI11_PARSE(app, argc, argv);

  try {
    ScenarioConfig cfg = resolve_config(args);
    const fs::path out_dir = cfg.out_dir;
    fs::create_directories(out_dir);

    if (synth->parsed()) {
      finish(cfg, "synth", qdn::pipeline::run_synth(cfg, out_dir));
    } else if (reproduce->parsed()) {
      finish(cfg, "reproduce --figure " + figure,
             qdn::pipeline::run_figure(figure, cfg, out_dir));
    } else if (welch->parsed()) {
      const qdn::NoiseTrace trace = qdn::load_trace(input_path);
      const qdn::PsdEstimate est = qdn::welch_psd(trace, cfg.welch);
      est.write_csv(out_dir / "psd.csv");
      std::ofstream(out_dir / "psd.json") << est.to_json().dump(2) << "\n";
      RunResult result;
      result.summary = {{"n_bins", est.frequencies_hz.size()},
                        {"n_segments_averaged", est.n_segments_averaged},
                        {"f_min_hz", est.frequencies_hz.front()},
                        {"f_max_hz", est.frequencies_hz.back()}};
      result.output_files = {"psd.csv", "psd.json"};
      finish(cfg, "welch", result);
    } else if (sim_ramsey->parsed()) {
      const auto& f = cfg.fringe_scan;
      qdn::RamseyScanConfig scan;
      scan.detuning_grid_hz = qdn::pipeline::linspace(
          f.grid_min_hz, f.grid_max_hz, static_cast<std::size_t>(f.n_steps));
      scan.shots_per_point = f.shots_per_point;
      scan.line_duration_s = f.line_duration_s;
      scan.n_lines = std::max(1, static_cast<int>(std::lround(f.n_lines * cfg.scale)));
      scan.t_e_s = f.t_e_s;
      const qdn::NoiseTrace trace =
          qdn::synthesize(cfg.detuning_model(), static_cast<std::size_t>(scan.n_lines),
                          1.0 / scan.line_duration_s, cfg.seed);
      const qdn::FringeDataset data =
          qdn::simulate_ramsey_scan(cfg.pulse, scan, trace, cfg.seed + 1, cfg.threads);
      data.write_csv(out_dir / "fringes.csv");
      std::ofstream(out_dir / "fringes.json") << data.to_json().dump() << "\n";
      RunResult result;
      result.summary = {{"n_lines", scan.n_lines},
                        {"grid_points", scan.detuning_grid_hz.size()}};
      result.output_files = {"fringes.csv", "fringes.json"};
      finish(cfg, "simulate-ramsey", result);
    } else if (sim_echo->parsed()) {
      const auto& e = cfg.echo_scan;
      const qdn::NoiseTrace trace = qdn::synthesize(
          cfg.detuning_model(), e.trace_samples, e.trace_sample_rate_hz, cfg.seed);
      const auto grid = qdn::pipeline::linspace(e.t_e_min_s, e.t_e_max_s,
                                                static_cast<std::size_t>(e.n_points));
      qdn::DecaySimOptions opt;
      opt.quasi_static = false;
      const int shots =
          std::max(100, static_cast<int>(std::lround(e.shots_per_point * cfg.scale)));
      const qdn::DecayCurve curve = qdn::simulate_decay(
          qdn::SequenceKind::echo, grid, trace, shots, cfg.seed + 1, opt, cfg.threads);
      curve.write_csv(out_dir / "echo_decay.csv");
      std::ofstream(out_dir / "echo_decay.json") << curve.to_json().dump() << "\n";
      RunResult result;
      result.summary = {{"n_points", curve.t_e_s.size()}, {"shots_per_point", shots}};
      result.output_files = {"echo_decay.csv", "echo_decay.json"};
      finish(cfg, "simulate-echo", result);
    } else if (track->parsed()) {
      const auto data = qdn::FringeDataset::from_json(load_json(input_path));
      const qdn::DetuningSeries series =
          qdn::track_detuning(data, cfg.pulse, data.config.t_e_s, cfg.threads);
      series.write_csv(out_dir / "detuning_series.csv");
      RunResult result;
      result.summary = {{"n_lines", series.times_s.size()},
                        {"n_valid", series.n_valid()}};
      result.output_files = {"detuning_series.csv"};
      finish(cfg, "track", result);
    } else if (fit_decay->parsed() || fit_echo_cmd->parsed()) {
      const auto curve = qdn::DecayCurve::from_json(load_json(input_path));
      const qdn::FitResult fit = fit_decay->parsed() ? qdn::fit_ramsey_decay(curve)
                                                     : qdn::fit_echo_decay(curve);
      std::ofstream(out_dir / "fit.json") << fit.to_json().dump(2) << "\n";
      RunResult result;
      result.summary = fit.to_json();
      result.output_files = {"fit.json"};
      finish(cfg, fit_decay->parsed() ? "fit-decay" : "fit-echo", result);
      if (!fit.converged) return 3;
    } else if (t2scan->parsed()) {
      finish(cfg, "t2star-scan", qdn::pipeline::run_fig2c(cfg, out_dir));
    } else if (convert->parsed()) {
      RunResult result;
      if (fs::path(input_path).extension() == ".qdnt") {
        qdn::NoiseTrace trace = qdn::load_trace(input_path, scale_flag_kind);
        const qdn::NoiseTrace converted = qdn::detuning_from_current(trace, cfg.chain);
        qdn::save_trace(converted, out_dir / "detuning_trace.qdnt");
        qdn::write_trace_csv(converted, out_dir / "detuning_trace.csv");
        result.summary = {{"chain_hz_per_pa", cfg.chain.detuning_hz_per_pa()}};
        result.output_files = {"detuning_trace.qdnt", "detuning_trace.csv"};
      } else {
        const auto psd = qdn::CompositePsd::from_json(load_json(input_path));
        const auto converted = qdn::convert_psd(psd, cfg.chain);
        std::ofstream(out_dir / "detuning_psd.json")
            << converted.to_json().dump(2) << "\n";
        result.summary = {{"chain_hz_per_pa", cfg.chain.detuning_hz_per_pa()},
                          {"chain_hz_per_uev", cfg.chain.detuning_hz_per_uev()},
                          {"converted", converted.to_json()}};
        result.output_files = {"detuning_psd.json"};
      }
      finish(cfg, "convert", result);
    } else if (hyperfine->parsed()) {
      finish(cfg, "hyperfine", qdn::pipeline::run_hyperfine_table(cfg, out_dir));
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
