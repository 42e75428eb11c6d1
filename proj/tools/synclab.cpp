// Command-line front end. Every subcommand builds an ExperimentConfig from
// (defaults <- config file <- explicitly passed flags) and dispatches.
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "synclab/errors.hpp"
#include "synclab/experiments.hpp"
#include "synclab/io.hpp"

namespace {

struct FlagValues {
  std::string config;
  int n = 0;
  double p = 0.0;
  double drive = 0.0;
  double eps = 0.0;
  double tau = 0.0;
  std::uint64_t seed = 0;
  double t_end = 0.0;
  std::string out;
  int periods = 0;
  int seeds = 0;
  double warmup = 0.0;
  double pulse_gap = 0.0;
  double small_scale = 0.0;
  double large_scale = 0.0;
  double delta_scale = 0.0;
  std::string mode;
  int sample_orders = 0;
  std::string init;
  double phase0 = 0.0;
  std::string network_file;
  std::string resume_file;
};

void add_common(CLI::App* sub, FlagValues& f) {
  sub->add_option("--config", f.config, "JSON config; its experiment key must match the subcommand");
  sub->add_option("--n", f.n, "number of oscillators");
  sub->add_option("--p", f.p, "connection probability");
  sub->add_option("--drive", f.drive, "constant drive (> 1)");
  sub->add_option("--eps", f.eps, "total input coupling per oscillator");
  sub->add_option("--tau", f.tau, "interaction delay, in (0, 1)");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--t-end", f.t_end, "end time of the free run");
  sub->add_option("--out", f.out, "output directory (default $SYNCLAB_OUT/<experiment>)");
}

synclab::ExperimentConfig assemble(CLI::App* sub, const FlagValues& f) {
  const std::string name = sub->get_name();
  synclab::ExperimentConfig cfg = synclab::default_config(name);
  auto given = [sub](const char* opt) {
    const CLI::Option* o = sub->get_option_no_throw(opt);
    return o != nullptr && o->count() > 0;
  };
  if (given("--config")) {
    cfg = synclab::load_config(f.config);
    if (cfg.experiment != name) {
      throw std::invalid_argument("config file is for experiment '" + cfg.experiment +
                                  "', but the subcommand is '" + name + "'");
    }
  }
  if (given("--n")) cfg.n = f.n;
  if (given("--p")) cfg.p = f.p;
  if (given("--drive")) cfg.drive = f.drive;
  if (given("--eps")) cfg.eps = f.eps;
  if (given("--tau")) cfg.tau = f.tau;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--t-end")) cfg.t_end = f.t_end;
  if (given("--out")) cfg.out = f.out;
  if (given("--periods")) cfg.periods = f.periods;
  if (given("--seeds")) cfg.seeds = f.seeds;
  if (given("--warmup")) cfg.warmup = f.warmup;
  if (given("--pulse-gap")) cfg.pulse_gap = f.pulse_gap;
  if (given("--small-scale")) cfg.small_scale = f.small_scale;
  if (given("--large-scale")) cfg.large_scale = f.large_scale;
  if (given("--delta-scale")) cfg.delta_scale = f.delta_scale;
  if (given("--mode")) cfg.mode = f.mode;
  if (given("--sample-orders")) cfg.sample_orders = f.sample_orders;
  if (given("--init")) cfg.init = f.init;
  if (given("--phase0")) cfg.phase0 = f.phase0;
  if (given("--network")) cfg.network_file = f.network_file;
  if (given("--resume")) cfg.resume_file = f.resume_file;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synclab: delayed pulse-coupled oscillator networks"};
  app.set_version_flag("--version", std::string(synclab::kArtifactVersion));
  app.require_subcommand(1);
  FlagValues f;

  CLI::App* coexist =
      app.add_subcommand("coexist", "synchronous orbit and irregular dynamics on one network");
  add_common(coexist, f);
  coexist->add_option("--periods", f.periods, "synchronous periods to track");

  CLI::App* sw = app.add_subcommand("switch", "pulse-driven switching into and out of synchrony");
  add_common(sw, f);
  sw->add_option("--seeds", f.seeds, "number of independent network seeds");
  sw->add_option("--warmup", f.warmup, "irregular warm-up time before the pulse pair");
  sw->add_option("--pulse-gap", f.pulse_gap, "time between the two pulses, in (tau, 1)");
  sw->add_option("--small-scale", f.small_scale, "small perturbation amplitude");
  sw->add_option("--large-scale", f.large_scale, "large perturbation amplitude");
  sw->add_option("--periods", f.periods, "periods to watch after each perturbation");

  CLI::App* spectrum =
      app.add_subcommand("spectrum", "eigenvalues of sampled stability operators, both coupling signs");
  add_common(spectrum, f);
  spectrum->add_option("--sample-orders", f.sample_orders, "rank orders to sample per sign");

  CLI::App* contraction =
      app.add_subcommand("contraction", "perturbation norm decay over many periods");
  add_common(contraction, f);
  contraction->add_option("--periods", f.periods, "periods to trace");
  contraction->add_option("--delta-scale", f.delta_scale, "initial perturbation amplitude (0: tau/2)");
  contraction->add_option("--mode", f.mode, "trace mode: linear or exact");

  CLI::App* enumerate_cmd =
      app.add_subcommand("enumerate", "distinct stability operators over all rank orders");
  add_common(enumerate_cmd, f);

  CLI::App* simulate = app.add_subcommand("simulate", "plain event-driven run");
  add_common(simulate, f);
  simulate->add_option("--init", f.init, "initial condition: random or sync");
  simulate->add_option("--phase0", f.phase0, "common phase for --init sync");
  simulate->add_option("--network", f.network_file, "load the network from this JSON file");
  simulate->add_option("--resume", f.resume_file, "resume from this snapshot JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    synclab::run_experiment(assemble(sub, f));
  } catch (const synclab::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
