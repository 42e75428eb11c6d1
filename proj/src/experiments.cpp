#include "synclab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "synclab/errors.hpp"
#include "synclab/io.hpp"
#include "synclab/rng.hpp"
#include "synclab/statistics.hpp"
#include "synclab/svg.hpp"

namespace synclab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kHistBins = 40;

// Keys in canonical order; load/save/hash all walk this table.
json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["n"] = c.n;
  j["p"] = c.p;
  j["drive"] = c.drive;
  j["eps"] = c.eps;
  j["tau"] = c.tau;
  j["seed"] = c.seed;
  j["t_end"] = c.t_end;
  j["out"] = c.out;
  j["seeds"] = c.seeds;
  j["warmup"] = c.warmup;
  j["pulse_gap"] = c.pulse_gap;
  j["small_scale"] = c.small_scale;
  j["large_scale"] = c.large_scale;
  j["periods"] = c.periods;
  j["delta_scale"] = c.delta_scale;
  j["mode"] = c.mode;
  j["sample_orders"] = c.sample_orders;
  j["init"] = c.init;
  j["phase0"] = c.phase0;
  j["network_file"] = c.network_file;
  j["resume_file"] = c.resume_file;
  return j;
}

void apply_key(ExperimentConfig& c, const std::string& key, const json& v) {
  if (key == "experiment") c.experiment = v.get<std::string>();
  else if (key == "n") c.n = v.get<int>();
  else if (key == "p") c.p = v.get<double>();
  else if (key == "drive") c.drive = v.get<double>();
  else if (key == "eps") c.eps = v.get<double>();
  else if (key == "tau") c.tau = v.get<double>();
  else if (key == "seed") c.seed = v.get<std::uint64_t>();
  else if (key == "t_end") c.t_end = v.get<double>();
  else if (key == "out") c.out = v.get<std::string>();
  else if (key == "seeds") c.seeds = v.get<int>();
  else if (key == "warmup") c.warmup = v.get<double>();
  else if (key == "pulse_gap") c.pulse_gap = v.get<double>();
  else if (key == "small_scale") c.small_scale = v.get<double>();
  else if (key == "large_scale") c.large_scale = v.get<double>();
  else if (key == "periods") c.periods = v.get<int>();
  else if (key == "delta_scale") c.delta_scale = v.get<double>();
  else if (key == "mode") c.mode = v.get<std::string>();
  else if (key == "sample_orders") c.sample_orders = v.get<int>();
  else if (key == "init") c.init = v.get<std::string>();
  else if (key == "phase0") c.phase0 = v.get<double>();
  else if (key == "network_file") c.network_file = v.get<std::string>();
  else if (key == "resume_file") c.resume_file = v.get<std::string>();
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NumericalError("cannot open " + path + " for writing");
  out << body;
  if (!out) throw NumericalError("write failed for " + path);
}

std::string fmt(double x, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

std::string prov_line(const Provenance& prov) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# config_hash=%016llx seed=%llu version=%s\n",
                static_cast<unsigned long long>(prov.config_hash),
                static_cast<unsigned long long>(prov.seed), kArtifactVersion);
  return buf;
}

// Removes whatever was already written when an experiment dies halfway.
class OutputTracker {
 public:
  ~OutputTracker() {
    if (committed_) return;
    for (const auto& f : files_) {
      std::error_code ec;
      fs::remove(f, ec);
    }
  }
  std::string track(std::string path) {
    files_.push_back(path);
    return path;
  }
  void commit() { committed_ = true; }

 private:
  std::vector<std::string> files_;
  bool committed_ = false;
};

Eigen::VectorXd random_phases(Rng& rng, int n) {
  Eigen::VectorXd phi(n);
  for (int i = 0; i < n; ++i) phi[i] = rng.uniform01();
  return phi;
}

// Strength that puts every oscillator at or above threshold, with margin.
double all_fire_strength(const SimulatorState& state, const Potential& U) {
  return 1.0 - U.eval(state.phi.minCoeff()) + 1.0;
}

DirectedNetwork strongly_connected_network(int n, double p, double eps, std::uint64_t seed) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    DirectedNetwork net = random_network(n, p, eps, seed + attempt);
    if (is_strongly_connected(net)) return net;
  }
  throw std::invalid_argument("no strongly connected draw in 100 attempts; raise p");
}

// Advance to the instant right after a pulse volley has been absorbed: the queue is empty
// and every phase sits at its post-volley minimum, giving maximal perturbation headroom.
void advance_to_post_volley(SimulatorState& state, const DirectedNetwork& net,
                            const Potential& U, std::vector<SpikeRecord>& spikes,
                            double t_max) {
  if (state.in_flight.empty()) {
    step(state, net, U, spikes);  // next firing round refills the queue
  }
  if (!drain_in_flight(state, net, U, t_max, spikes)) {
    throw NumericalError("in-flight queue failed to drain (state is not near the orbit)");
  }
}

std::vector<SpikeRecord> slice_after(const std::vector<SpikeRecord>& spikes, double t) {
  std::vector<SpikeRecord> out;
  for (const auto& s : spikes) {
    if (s.time >= t) out.push_back(s);
  }
  return out;
}

void write_rounds_csv(const std::string& path, const std::vector<FiringRound>& rounds,
                      const Provenance& prov) {
  std::string body = prov_line(prov);
  body += "round,t_first,spread,complete\n";
  for (size_t r = 0; r < rounds.size(); ++r) {
    double spread = rounds[r].complete ? rounds[r].t_last - rounds[r].t_first
                                       : std::numeric_limits<double>::quiet_NaN();
    body += std::to_string(r) + "," + fmt(rounds[r].t_first) + "," + fmt(spread) + "," +
            (rounds[r].complete ? "1" : "0") + "\n";
  }
  write_text(path, body);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void plot_histogram(const Histogram& h, const std::string& title, const std::string& xlabel,
                    const std::string& path) {
  double ymax = 0.0;
  const int bins = static_cast<int>(h.counts.size());
  const double width = bins > 0 ? (h.hi - h.lo) / bins : 0.0;
  std::vector<double> density(bins, 0.0);
  for (int b = 0; b < bins; ++b) {
    if (h.total > 0 && width > 0.0) {
      density[b] = static_cast<double>(h.counts[b]) / (h.total * width);
    }
    ymax = std::max(ymax, density[b]);
  }
  SvgPlot plot(h.lo, h.hi > h.lo ? h.hi : h.lo + 1.0, 0.0, ymax > 0 ? 1.1 * ymax : 1.0, title,
               xlabel, "density");
  for (int b = 0; b < bins; ++b) {
    plot.bar(h.lo + b * width, h.lo + (b + 1) * width, density[b], "#7799cc");
  }
  plot.save(path);
}

bool last_round_settled(const std::vector<FiringRound>& rounds, double tol) {
  if (rounds.empty()) return false;
  const FiringRound& last = rounds.back();
  return last.complete && (last.t_last - last.t_first) < tol;
}

}  // namespace

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "coexist") {
    c.n = 400; c.p = 0.2; c.drive = 4.0; c.eps = -16.0; c.tau = 0.035;
    c.t_end = 400.0; c.periods = 200;
  } else if (experiment == "switch") {
    c.n = 400; c.p = 0.2; c.drive = 4.0; c.eps = -16.0; c.tau = 0.14;
    c.periods = 100;
  } else if (experiment == "spectrum") {
    c.n = 16; c.p = 0.25; c.drive = 4.0; c.eps = -0.2; c.tau = 0.15;
  } else if (experiment == "contraction") {
    c.n = 50; c.p = 0.2; c.drive = 4.0; c.eps = -0.3; c.tau = 0.15; c.periods = 800;
  } else if (experiment == "enumerate") {
    c.n = 5; c.p = 0.6; c.drive = 4.0; c.eps = -0.2; c.tau = 0.15;
  } else if (experiment == "simulate") {
    c.n = 16; c.p = 0.25; c.drive = 4.0; c.eps = -0.2; c.tau = 0.15; c.t_end = 50.0;
  } else {
    throw std::invalid_argument("unknown experiment '" + experiment + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("experiment")) {
    throw std::invalid_argument(path + ": config must be an object with an 'experiment' key");
  }
  ExperimentConfig c = default_config(j["experiment"].get<std::string>());
  try {
    for (const auto& [key, value] : j.items()) apply_key(c, key, value);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return c;
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  write_text(path, to_json(cfg).dump(2) + "\n");
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.out.clear();  // output plumbing does not change the science
  return fnv1a64(to_json(c).dump());
}

std::string resolve_out_dir(const ExperimentConfig& cfg) {
  std::string dir = cfg.out;
  if (dir.empty()) {
    const char* root = std::getenv("SYNCLAB_OUT");
    dir = (root && *root ? std::string(root) : std::string("out")) + "/" + cfg.experiment;
  }
  fs::create_directories(dir);
  return dir;
}

void run_coexist(const ExperimentConfig& cfg) {
  const std::string dir = resolve_out_dir(cfg);
  const Provenance prov{config_hash(cfg), cfg.seed};
  OutputTracker tracker;
  IntegrateAndFire U(cfg.drive);
  const double T = synchronous_period(U, cfg.tau, cfg.eps);
  DirectedNetwork net = random_network(cfg.n, cfg.p, cfg.eps, cfg.seed);
  save_network(net, tracker.track(dir + "/network.json"));
  save_config(cfg, tracker.track(dir + "/config.json"));

  // Synchronous branch: identical phases stay identical; round spreads should vanish.
  std::vector<SpikeRecord> sync_spikes;
  SimulatorState sync_state = make_uniform_state(cfg.n, 0.5, cfg.tau);
  run(sync_state, net, U, 0.5 + (cfg.periods + 0.5) * T, sync_spikes);
  write_spikes_csv(tracker.track(dir + "/sync_spikes.csv"), sync_spikes, prov);
  auto sync_rounds = spike_rounds(sync_spikes, cfg.n);
  write_rounds_csv(tracker.track(dir + "/sync_spreads.csv"), sync_rounds, prov);
  double max_spread = 0.0;
  double max_period_err = 0.0;
  for (size_t r = 0; r < sync_rounds.size(); ++r) {
    max_spread = std::max(max_spread, sync_rounds[r].t_last - sync_rounds[r].t_first);
    if (r > 0) {
      max_period_err = std::max(
          max_period_err, std::abs(sync_rounds[r].t_first - sync_rounds[r - 1].t_first - T));
    }
  }

  // Irregular branch: random start, same network.
  Rng rng(cfg.seed);
  std::vector<SpikeRecord> irr_spikes;
  SimulatorState irr_state = make_uniform_state(cfg.n, 0.0, cfg.tau);
  irr_state.phi = random_phases(rng, cfg.n);
  run(irr_state, net, U, cfg.t_end, irr_spikes);
  write_spikes_csv(tracker.track(dir + "/irregular_spikes.csv"), irr_spikes, prov);

  const double burn = std::max(0.10 * cfg.t_end, 20.0 * T);
  Eigen::VectorXd rates = firing_rates(irr_spikes, cfg.n, burn, cfg.t_end);
  Eigen::VectorXd cvs = coefficient_of_variation(irr_spikes, cfg.n, burn, cfg.t_end);
  {
    std::string body = prov_line(prov) + "neuron,rate,cv\n";
    for (int i = 0; i < cfg.n; ++i) {
      body += std::to_string(i) + "," + fmt(rates[i]) + "," + fmt(cvs[i]) + "\n";
    }
    write_text(tracker.track(dir + "/irregular_stats.csv"), body);
  }
  Histogram rate_hist = histogram(rates, kHistBins);
  Histogram cv_hist = histogram(cvs, kHistBins);
  write_histogram_csv(tracker.track(dir + "/rate_hist.csv"), rate_hist, prov);
  write_histogram_csv(tracker.track(dir + "/cv_hist.csv"), cv_hist, prov);
  plot_histogram(rate_hist, "firing rate distribution", "rate", tracker.track(dir + "/rate_hist.svg"));
  plot_histogram(cv_hist, "ISI coefficient of variation", "CV", tracker.track(dir + "/cv_hist.svg"));

  int defined = 0;
  double cv_sum = 0.0, rate_min = 0.0, rate_max = 0.0, rate_sum = 0.0, rate_sq = 0.0;
  bool first = true;
  for (int i = 0; i < cfg.n; ++i) {
    if (!std::isfinite(rates[i]) || !std::isfinite(cvs[i])) continue;
    ++defined;
    cv_sum += cvs[i];
    rate_sum += rates[i];
    rate_sq += rates[i] * rates[i];
    rate_min = first ? rates[i] : std::min(rate_min, rates[i]);
    rate_max = first ? rates[i] : std::max(rate_max, rates[i]);
    first = false;
  }
  json summary;
  summary["sync"] = {{"rounds", sync_rounds.size()},
                     {"max_spread", max_spread},
                     {"period_expected", T},
                     {"max_period_error", max_period_err}};
  json irr;
  irr["burn_in"] = burn;
  irr["defined_fraction"] = static_cast<double>(defined) / cfg.n;
  if (defined > 0) {
    double rate_mean = rate_sum / defined;
    irr["mean_cv"] = cv_sum / defined;
    irr["rate_mean"] = rate_mean;
    irr["rate_min"] = rate_min;
    irr["rate_max"] = rate_max;
    irr["rate_sd"] = std::sqrt(std::max(0.0, rate_sq / defined - rate_mean * rate_mean));
  }
  summary["irregular"] = irr;
  write_json(tracker.track(dir + "/summary.json"), summary);
  tracker.commit();
}

namespace {

struct SwitchOutcome {
  std::uint64_t seed = 0;
  bool synchronized = false;
  bool small_admissible = false;
  bool restored_small = false;
  bool escaped_large = false;
  bool protocol_complete = false;
};

SwitchOutcome switch_protocol(const ExperimentConfig& cfg, std::uint64_t seed,
                              const std::string& seed_dir) {
  const Provenance prov{config_hash(cfg), seed};
  OutputTracker tracker;
  SwitchOutcome outcome;
  outcome.seed = seed;
  IntegrateAndFire U(cfg.drive);
  const double T = synchronous_period(U, cfg.tau, cfg.eps);
  DirectedNetwork net = random_network(cfg.n, cfg.p, cfg.eps, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  json markers;

  std::vector<SpikeRecord> spikes;
  SimulatorState state = make_uniform_state(cfg.n, 0.0, cfg.tau);
  state.phi = random_phases(rng, cfg.n);
  run(state, net, U, cfg.warmup, spikes);

  // Two supra-threshold pulses, pulse_gap apart: the first resets everyone but pre-pulse
  // traffic still lands; the second finds an empty queue and pins exact synchrony.
  markers["pulse1_time"] = state.t;
  double s1 = all_fire_strength(state, U);
  markers["pulse1_strength"] = s1;
  inject_pulse(state, net, U, s1, spikes);
  run(state, net, U, state.t + cfg.pulse_gap, spikes);
  markers["pulse2_time"] = state.t;
  const double t2 = state.t;
  double s2 = all_fire_strength(state, U);
  markers["pulse2_strength"] = s2;
  inject_pulse(state, net, U, s2, spikes);
  run(state, net, U, t2 + cfg.tau + 2.0 * T, spikes);
  auto sync_rounds = spike_rounds(slice_after(spikes, t2 - 1e-9), cfg.n);
  outcome.synchronized = last_round_settled(sync_rounds, 1e-9);
  markers["post_pulse_max_spread"] =
      sync_rounds.empty() ? -1.0 : sync_rounds.back().t_last - sync_rounds.back().t_first;

  auto perturb_and_watch = [&](double scale, const std::string& label, bool* admissible)
      -> std::vector<FiringRound> {
    advance_to_post_volley(state, net, U, spikes, state.t + 5.0 * T + 5.0);
    Eigen::VectorXd delta(cfg.n);
    for (int i = 0; i < cfg.n; ++i) delta[i] = rng.uniform(-scale, scale);
    bool ok = perturb(state, delta);
    if (admissible) *admissible = ok;
    markers[label + "_time"] = state.t;
    markers[label + "_admissible"] = ok;
    double t_mark = state.t;
    run(state, net, U, state.t + (cfg.periods + 2) * T, spikes);
    auto rounds = spike_rounds(slice_after(spikes, t_mark), cfg.n);
    write_rounds_csv(tracker.track(seed_dir + "/spreads_" + label + ".csv"), rounds, prov);
    return rounds;
  };

  if (outcome.synchronized) {
    auto small_rounds = perturb_and_watch(cfg.small_scale, "small", &outcome.small_admissible);
    outcome.restored_small = last_round_settled(small_rounds, 1e-6);
    if (outcome.restored_small) {
      auto large_rounds = perturb_and_watch(cfg.large_scale, "large", nullptr);
      outcome.escaped_large = !last_round_settled(large_rounds, 1e-6);
      outcome.protocol_complete = true;
    }
  }

  write_spikes_csv(tracker.track(seed_dir + "/raster.csv"), spikes, prov);
  markers["synchronized"] = outcome.synchronized;
  markers["restored_small"] = outcome.restored_small;
  markers["escaped_large"] = outcome.escaped_large;
  markers["protocol_complete"] = outcome.protocol_complete;
  write_json(tracker.track(seed_dir + "/markers.json"), markers);
  tracker.commit();
  return outcome;
}

}  // namespace

void run_switch(const ExperimentConfig& cfg) {
  if (!(cfg.pulse_gap > cfg.tau && cfg.pulse_gap < 1.0)) {
    std::cerr << "warning: pulse gap outside (tau, 1); the second pulse may not find a quiet "
                 "queue\n";
  }
  const std::string dir = resolve_out_dir(cfg);
  save_config(cfg, dir + "/config.json");
  std::vector<std::future<SwitchOutcome>> jobs;
  for (int s = 0; s < cfg.seeds; ++s) {
    std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
    std::string seed_dir = dir + "/seed_" + std::to_string(seed);
    fs::create_directories(seed_dir);
    jobs.push_back(std::async(std::launch::async,
                              [cfg, seed, seed_dir] { return switch_protocol(cfg, seed, seed_dir); }));
  }
  json index;
  index["seeds"] = json::array();
  int escaped = 0, restored = 0, synced = 0;
  for (auto& job : jobs) {
    SwitchOutcome o = job.get();
    index["seeds"].push_back({{"seed", o.seed},
                              {"synchronized", o.synchronized},
                              {"small_admissible", o.small_admissible},
                              {"restored_small", o.restored_small},
                              {"escaped_large", o.escaped_large},
                              {"protocol_complete", o.protocol_complete}});
    synced += o.synchronized;
    restored += o.restored_small;
    escaped += o.escaped_large;
  }
  index["synchronized_fraction"] = static_cast<double>(synced) / cfg.seeds;
  index["restored_fraction"] = static_cast<double>(restored) / cfg.seeds;
  // Reported, never asserted: escape at the large scale is seed-dependent.
  index["escape_fraction"] = static_cast<double>(escaped) / cfg.seeds;
  write_json(dir + "/index.json", index);
}

void run_spectrum(const ExperimentConfig& cfg) {
  const std::string dir = resolve_out_dir(cfg);
  const Provenance prov{config_hash(cfg), cfg.seed};
  OutputTracker tracker;
  save_config(cfg, tracker.track(dir + "/config.json"));
  IntegrateAndFire U(cfg.drive);
  json summary;
  const double mag = std::abs(cfg.eps);
  for (int branch = 0; branch < 2; ++branch) {
    const bool inhibitory = branch == 0;
    const double eps = inhibitory ? -mag : mag;
    const std::string tag = inhibitory ? "inhibitory" : "excitatory";
    // Same seed, same adjacency: only the coupling sign flips between branches.
    DirectedNetwork net = random_network(cfg.n, cfg.p, eps, cfg.seed);
    save_network(net, tracker.track(dir + "/network_" + tag + ".json"));
    Rng rng(cfg.seed + branch);
    std::set<std::vector<int>> seen;
    std::vector<std::pair<int, Eigen::VectorXcd>> spectra;
    std::vector<double> re, im;
    double max_residual = 0.0;
    bool all_contained = true;
    bool all_tangent = true;
    StabilityOperator first_op;
    for (int sample = 0; sample < cfg.sample_orders; ++sample) {
      RankOrder order = rank_order(net, random_phases(rng, cfg.n));
      if (!seen.insert(order.flat_key()).second) continue;
      StabilityOperator op = build_operator(net, U, cfg.tau, order);
      if (spectra.empty()) first_op = op;
      SpectrumResult spec = spectrum(op.matrix);
      max_residual = std::max(max_residual, spec.unit_residual);
      GershgorinReport disk = gershgorin_check(
          op, inhibitory ? CouplingSign::inhibitory : CouplingSign::excitatory);
      all_contained = all_contained && disk.all_contained;
      all_tangent = all_tangent && disk.unit_tangent;
      int id = static_cast<int>(spectra.size());
      spectra.push_back({id, spec.values});
      for (Eigen::Index k = 0; k < spec.values.size(); ++k) {
        re.push_back(spec.values[k].real());
        im.push_back(spec.values[k].imag());
      }
    }
    write_spectrum_csv(tracker.track(dir + "/spectrum_" + tag + ".csv"), spectra, prov);
    write_operator_csv(tracker.track(dir + "/operator_" + tag + ".csv"), first_op, prov);

    const double diag = common_diagonal(U, cfg.tau, eps);
    double lim = std::max(1.3, std::abs(diag) + std::abs(1.0 - diag) + 0.3);
    SvgPlot plot(-lim, lim, -lim, lim, "operator spectra (" + tag + ")", "Re", "Im");
    plot.circle(0.0, 0.0, 1.0, "#888888");
    plot.circle(diag, 0.0, std::abs(1.0 - diag), "#cc3333");
    plot.scatter(re, im, 2.0, "#224488");
    plot.save(tracker.track(dir + "/spectrum_" + tag + ".svg"));

    json b;
    b["eps"] = eps;
    b["diag"] = diag;
    b["distinct_orders"] = spectra.size();
    b["max_unit_residual"] = max_residual;
    b["all_contained"] = all_contained;
    b["all_tangent"] = all_tangent;
    if (inhibitory && is_strongly_connected(net) && !spectra.empty()) {
      PerronReport perron = perron_check(first_op);
      b["unit_simple"] = perron.unit_simple;
      b["spectral_gap"] = perron.gap;
    }
    summary[tag] = b;
  }
  write_json(tracker.track(dir + "/summary.json"), summary);
  tracker.commit();
}

namespace {

DirectedNetwork ring_network(int n, double eps) {
  std::vector<std::vector<int>> pre(n);
  std::vector<std::vector<double>> w(n);
  for (int i = 0; i < n; ++i) {
    pre[i] = {(i + n - 1) % n};
    w[i] = {eps};
  }
  return DirectedNetwork(n, std::move(pre), std::move(w), eps);
}

}  // namespace

void run_contraction(const ExperimentConfig& cfg) {
  const std::string dir = resolve_out_dir(cfg);
  const Provenance prov{config_hash(cfg), cfg.seed};
  OutputTracker tracker;
  save_config(cfg, tracker.track(dir + "/config.json"));
  IntegrateAndFire U(cfg.drive);
  const TraceMode mode = cfg.mode == "exact" ? TraceMode::exact : TraceMode::linear;
  const double scale = cfg.delta_scale > 0.0 ? cfg.delta_scale : 0.5 * cfg.tau;
  json summary;

  {
    DirectedNetwork net = strongly_connected_network(cfg.n, cfg.p, cfg.eps, cfg.seed);
    save_network(net, tracker.track(dir + "/network_random.json"));
    Rng rng(cfg.seed);
    Eigen::VectorXd delta = random_phases(rng, cfg.n);
    delta.array() -= delta.minCoeff();
    delta *= scale / delta.maxCoeff();
    auto trace = contraction_trace(net, U, cfg.tau, delta, cfg.periods, mode);
    write_trace_csv(tracker.track(dir + "/trace_random.csv"), trace, prov);
    bool monotone = true;
    for (size_t l = 1; l < trace.size(); ++l) {
      if (trace[l].norm > trace[l - 1].norm * (1.0 + 1e-12)) monotone = false;
    }
    summary["random"] = {{"l_c", diameter(net)},
                         {"periods", cfg.periods},
                         {"mode", cfg.mode},
                         {"monotone", monotone},
                         {"final_norm", trace.back().norm},
                         {"final_spread", trace.back().spread}};

    std::vector<double> xs, ys, zs;
    for (size_t l = 0; l < trace.size(); ++l) {
      xs.push_back(static_cast<double>(l));
      ys.push_back(std::log10(std::max(trace[l].norm, 1e-16)));
      zs.push_back(std::log10(std::max(trace[l].spread, 1e-16)));
    }
    SvgPlot plot(0.0, static_cast<double>(trace.size() - 1), -16.0, 0.0,
                 "perturbation decay (random network)", "period", "log10 norm / spread");
    plot.polyline(xs, ys, "#224488");
    plot.polyline(xs, zs, "#cc3333");
    plot.save(tracker.track(dir + "/trace_random.svg"));
  }

  {
    // Directed ring, worst case: the max-set stays closed under Pre for diameter-1 periods.
    const int n_ring = 5;
    DirectedNetwork net = ring_network(n_ring, cfg.eps);
    save_network(net, tracker.track(dir + "/network_ring.json"));
    Eigen::VectorXd delta = Eigen::VectorXd::Constant(n_ring, scale);
    delta[n_ring - 1] = 0.0;
    auto trace = contraction_trace(net, U, cfg.tau, delta, std::max(12, 3 * n_ring), mode);
    write_trace_csv(tracker.track(dir + "/trace_ring.csv"), trace, prov);
    int first_drop = -1;
    for (size_t l = 1; l < trace.size(); ++l) {
      if (trace[l].norm < trace[0].norm * (1.0 - 1e-12)) {
        first_drop = static_cast<int>(l);
        break;
      }
    }
    summary["ring"] = {{"n", n_ring},
                       {"l_c", diameter(net)},
                       {"first_strict_drop", first_drop}};
  }
  write_json(tracker.track(dir + "/summary.json"), summary);
  tracker.commit();
}

void run_enumerate(const ExperimentConfig& cfg) {
  const std::string dir = resolve_out_dir(cfg);
  const Provenance prov{config_hash(cfg), cfg.seed};
  OutputTracker tracker;
  save_config(cfg, tracker.track(dir + "/config.json"));
  IntegrateAndFire U(cfg.drive);
  DirectedNetwork net = random_network(cfg.n, cfg.p, cfg.eps, cfg.seed);
  save_network(net, tracker.track(dir + "/network.json"));
  EnumerationReport report = enumerate_operators(net, U, cfg.tau);
  json j;
  j["n"] = cfg.n;
  j["orderings"] = report.orderings;
  j["distinct"] = report.distinct;
  j["row_distinct"] = report.row_distinct;
  j["row_bound"] = report.row_bound;
  j["bound_lower"] = report.bound_lower;
  j["bound_upper"] = report.bound_upper;
  j["similarity_classes"] = report.similarity_classes;
  j["within_upper_bound"] = report.distinct <= report.bound_upper;
  write_json(tracker.track(dir + "/enumerate.json"), j);
  if (!report.matrices.empty()) {
    RankOrder identity_order = rank_order(net, Eigen::VectorXd::Zero(cfg.n));
    StabilityOperator op = build_operator(net, U, cfg.tau, identity_order);
    write_operator_csv(tracker.track(dir + "/operator_identity_order.csv"), op, prov);
  }
  std::cout << "orderings " << report.orderings << ", distinct " << report.distinct
            << ", bounds [" << report.bound_lower << ", " << report.bound_upper
            << "], similarity classes " << report.similarity_classes << "\n";
  tracker.commit();
}

void run_simulate(const ExperimentConfig& cfg) {
  const std::string dir = resolve_out_dir(cfg);
  const Provenance prov{config_hash(cfg), cfg.seed};
  // All inputs are loaded and validated before the first write: a run rejected here must
  // not clobber artifacts an earlier run left in the same directory.
  IntegrateAndFire U(cfg.drive);
  DirectedNetwork net = cfg.network_file.empty()
                            ? random_network(cfg.n, cfg.p, cfg.eps, cfg.seed)
                            : load_network(cfg.network_file);
  if (net.size() != cfg.n) {
    throw std::invalid_argument("network file size disagrees with configured n");
  }
  SimulatorState state;
  if (!cfg.resume_file.empty()) {
    state = load_snapshot(cfg.resume_file, cfg.n);
  } else if (cfg.init == "sync") {
    state = make_uniform_state(cfg.n, cfg.phase0, cfg.tau);
  } else if (cfg.init == "random") {
    state = make_uniform_state(cfg.n, 0.0, cfg.tau);
    Rng rng(cfg.seed);
    state.phi = random_phases(rng, cfg.n);
  } else {
    throw std::invalid_argument("init must be 'random' or 'sync'");
  }
  if (cfg.t_end < state.t) {
    throw std::invalid_argument("t_end precedes the clock of the initial state");
  }
  OutputTracker tracker;
  save_config(cfg, tracker.track(dir + "/config.json"));
  save_network(net, tracker.track(dir + "/network.json"));
  std::vector<SpikeRecord> spikes;
  run(state, net, U, cfg.t_end, spikes);
  write_spikes_csv(tracker.track(dir + "/spikes.csv"), spikes, prov);
  save_snapshot(state, tracker.track(dir + "/final_state.json"));
  json summary;
  summary["t"] = state.t;
  summary["spikes"] = spikes.size();
  summary["phase_min"] = state.phi.minCoeff();
  summary["phase_max"] = state.phi.maxCoeff();
  summary["in_flight"] = state.in_flight.size();
  write_json(tracker.track(dir + "/summary.json"), summary);
  tracker.commit();
}

void run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "coexist") run_coexist(cfg);
  else if (cfg.experiment == "switch") run_switch(cfg);
  else if (cfg.experiment == "spectrum") run_spectrum(cfg);
  else if (cfg.experiment == "contraction") run_contraction(cfg);
  else if (cfg.experiment == "enumerate") run_enumerate(cfg);
  else if (cfg.experiment == "simulate") run_simulate(cfg);
  else throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace synclab
