#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synclab/network.hpp"
#include "synclab/simulator.hpp"
#include "synclab/stability.hpp"

namespace synclab {

inline constexpr const char* kArtifactVersion = "synclab-0.1.0";

// Stamped into the first line of every CSV:  # config_hash=<hex> seed=<dec> version=<id>
struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

std::uint64_t fnv1a64(const std::string& bytes);

// Network file: {"n": N, "eps_total": eps, "edges": [[i, j, w], ...]} where an edge
// [i, j, w] couples presynaptic j into i with strength w.  Loading enforces every
// structural invariant and reports the offending edge index or source line.
DirectedNetwork load_network(const std::string& path);
void save_network(const DirectedNetwork& net, const std::string& path);

// Spike CSV: provenance line, then "time,neuron" rows with 12 significant digits.
void write_spikes_csv(const std::string& path, const std::vector<SpikeRecord>& spikes,
                      const Provenance& prov);

// Snapshot: {"t": ..., "tau": ..., "phases": [...], "in_flight": [[arrival, src, scale]...]}.
// Doubles round-trip exactly, so a resumed run continues bit-identically.  The tau field
// rides along so a snapshot is self-contained.
void save_snapshot(const SimulatorState& state, const std::string& path);
SimulatorState load_snapshot(const std::string& path, int n);

// Spectrum CSV: "operator_id,re,im", one row per eigenvalue per sampled operator.
void write_spectrum_csv(const std::string& path,
                        const std::vector<std::pair<int, Eigen::VectorXcd>>& spectra,
                        const Provenance& prov);

// Operator dump: provenance, then "# n=... diag=... rank=..." (per-row position tuples,
// rows joined by '|'), then the matrix row-major.
void write_operator_csv(const std::string& path, const StabilityOperator& op,
                        const Provenance& prov);

// Contraction trace CSV: "period,max_norm,spread".
void write_trace_csv(const std::string& path, const std::vector<TraceStep>& trace,
                     const Provenance& prov);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<long long> counts;
  long long total = 0;
};

// Uniform bins over the observed finite range; NaNs are skipped.  A degenerate range
// collapses to one occupied bin.
Histogram histogram(const Eigen::VectorXd& values, int bins);

// Histogram CSV: "bin_lo,bin_hi,count,density".
void write_histogram_csv(const std::string& path, const Histogram& hist, const Provenance& prov);

}  // namespace synclab
