#ifndef QDN_PIPELINE_HPP
#define QDN_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdn/charge_conversion.hpp"
#include "qdn/hyperfine.hpp"
#include "qdn/psd_model.hpp"
#include "qdn/qubit_sim.hpp"
#include "qdn/spectral.hpp"

namespace qdn::pipeline {

inline constexpr const char* artifact_version = "qdnoise 0.1.0";

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double a, double b, std::size_t n);

/// Fringe-scan plan stored as grid bounds; expanded at run time.
struct FringeScanSection {
  double grid_min_hz = -1e6;
  double grid_max_hz = 1e6;
  int n_steps = 100;
  int shots_per_point = 100;
  double line_duration_s = 120.0;
  int n_lines = 2010;
  double t_e_s = 2.5e-6;
};

/// Repeated quick decay sweeps feeding the measurement-time bundling.
struct T2ScanSection {
  double t_e_min_s = 5e-7;
  double t_e_max_s = 6e-5;
  int n_points = 50;
  int shots_per_point = 50;
  double line_duration_s = 38.0;
  int n_lines = 640;
  int bundle_offset_lines = 25;
  int n_t_m_points = 8;
  double t_e_ref_s = 2e-5;  // upper integration cutoff 1/t_e for sigma bands
  double split_t_m_s = 1500.0;
};

struct EchoSection {
  double t_e_min_s = 2e-6;
  double t_e_max_s = 4e-4;
  int n_points = 40;
  int shots_per_point = 5000;
  double trace_sample_rate_hz = 2e6;
  std::size_t trace_samples = 1u << 21;
};

/// Quasi-static decay simulation fed by the full converted spectrum.
struct QuasiStaticSimSection {
  double t_m_s = 600.0;
  double t_e_ref_s = 2e-5;
  double t_e_min_s = 5e-7;
  double t_e_max_s = 6e-5;
  int n_points = 60;
  int shots_per_point = 500;
  double trace_sample_rate_hz = 10.0;
};

struct SynthSection {
  std::size_t n_samples = 1u << 20;
  double sample_rate_hz = 1.0;
};

/// Full resolved run configuration; every run echoes it into the manifest.
struct ScenarioConfig {
  std::uint64_t seed = 42;
  double scale = 1.0;
  int threads = 1;
  std::string out_dir = "out";

  CompositePsd charge_noise_psd;       // energy-ueV two-slope model
  std::optional<CompositePsd> detuning_psd_override;  // skips conversion
  ConversionChain chain;
  PulseParams pulse;
  FringeScanSection fringe_scan;
  T2ScanSection t2star_scan;
  EchoSection echo_scan;
  QuasiStaticSimSection quasi_static_sim;
  WelchSettings welch;
  SynthSection synth;
  DotGeometry dot_geometry;
  std::vector<BathSpecies> bath_species;

  ScenarioConfig();

  /// Detuning-unit noise model: the override when set, otherwise the charge
  /// model pushed through the conversion chain.
  CompositePsd detuning_model() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults, so partial configs are valid.
  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig load(const std::filesystem::path& path);
};

struct RunResult {
  nlohmann::json summary;
  std::vector<std::string> output_files;  // relative to the out dir
};

RunResult run_hyperfine_table(const ScenarioConfig& cfg,
                              const std::filesystem::path& out_dir);
RunResult run_fig1d(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);
RunResult run_fig2c(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);
RunResult run_fig2d(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);
RunResult run_fig3b(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);
RunResult run_synth(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

/// Dispatch by figure name: fig1d, fig2c, fig2d, fig3b, hyperfine_table.
RunResult run_figure(const std::string& figure, const ScenarioConfig& cfg,
                     const std::filesystem::path& out_dir);

/// Writes manifest.json (version, command, timestamp, resolved config,
/// outputs, summary). The timestamp lives only here.
void write_manifest(const ScenarioConfig& cfg, const std::string& command,
                    const RunResult& result, const std::filesystem::path& out_dir);

}  // namespace qdn::pipeline

#endif
