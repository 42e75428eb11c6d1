#pragma once

#include <cstdint>
#include <string>

namespace synclab {

// One flat parameter block shared by every subcommand; unused fields are simply ignored by
// the experiment that runs.  Round-trips losslessly through its JSON file format.
struct ExperimentConfig {
  std::string experiment;

  // model and network
  int n = 16;
  double p = 0.25;
  double drive = 4.0;       // integrate-and-fire drive I
  double eps = -0.2;        // total coupling per row
  double tau = 0.15;        // delay
  std::uint64_t seed = 1;
  double t_end = 50.0;
  std::string out;          // output directory; empty -> SYNCLAB_OUT (or ./out)/<experiment>

  // switching protocol
  int seeds = 10;
  double warmup = 20.0;
  double pulse_gap = 0.5;   // separation of the two synchronizing pulses, in (tau, 1)
  double small_scale = 0.18;
  double large_scale = 0.36;

  // measurement depth (periods of the synchronous orbit)
  int periods = 100;

  // contraction
  double delta_scale = 0.0;  // initial spread; 0 -> tau / 2
  std::string mode = "linear";

  // spectrum sampling
  int sample_orders = 64;

  // simulate
  std::string init = "random";  // "random" or "sync"
  double phase0 = 0.5;
  std::string network_file;
  std::string resume_file;
};

// Per-subcommand defaults (coexistence and switching run at the strong-coupling working
// point, spectrum/contraction/enumerate at the weak-coupling one).
ExperimentConfig default_config(const std::string& experiment);

// Strict JSON load: the file picks defaults via its "experiment" key, every other key
// overrides one field, unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

// Hash of the scientific content (everything except the output directory), stamped into
// CSV provenance lines.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Output directory: cfg.out if set, else $SYNCLAB_OUT/<experiment>, else out/<experiment>.
// Created on resolution.
std::string resolve_out_dir(const ExperimentConfig& cfg);

void run_coexist(const ExperimentConfig& cfg);
void run_switch(const ExperimentConfig& cfg);
void run_spectrum(const ExperimentConfig& cfg);
void run_contraction(const ExperimentConfig& cfg);
void run_enumerate(const ExperimentConfig& cfg);
void run_simulate(const ExperimentConfig& cfg);

// Dispatch on cfg.experiment.
void run_experiment(const ExperimentConfig& cfg);

}  // namespace synclab
