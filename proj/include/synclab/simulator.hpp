#pragma once

#include <Eigen/Dense>
#include <deque>
#include <vector>

#include "synclab/network.hpp"
#include "synclab/potential.hpp"

namespace synclab {

struct SpikeRecord {
  double time;
  int neuron;
};

// A pulse emitted by `source` and not yet delivered.  Delivery fans out to every
// postsynaptic target of the source with strength scale * eps_ij; ordinary spikes carry
// scale 1.  One record per source firing.
struct InFlight {
  double arrival;
  int source;
  double scale;
};

// Full dynamical state between events.  Phases never exceed 1 between events, all arrival
// times lie in (t, t + tau], and in_flight is kept sorted by arrival time.
struct SimulatorState {
  double t = 0.0;
  Eigen::VectorXd phi;
  std::deque<InFlight> in_flight;
  double tau = 0.0;
};

// All oscillators at a common phase, empty queue.
SimulatorState make_uniform_state(int n, double phase, double tau);

// Structural audit of the state invariants (sizes, delay range, queue ordering, arrival
// window).  Throws on violation; used after snapshot loads and in tests.
void validate_state(const SimulatorState& state, int n);

// Advance to the next event (threshold crossing or pulse arrival, whichever is earlier,
// ties within 1e-12 batched) and process it: firing oscillators reset to 0 and enqueue one
// delayed pulse, arrivals apply the transfer per receiver with simultaneous strengths
// summed, supra-threshold arrivals fire immediately.  Emitted spikes are appended to
// `emitted`.  Returns the event time.
double step(SimulatorState& state, const DirectedNetwork& net, const Potential& U,
            std::vector<SpikeRecord>& emitted);

// Process every event strictly before t_end, then drift phases to exactly t_end.  All
// spikes appended have time < t_end and the returned state continues exactly.
void run(SimulatorState& state, const DirectedNetwork& net, const Potential& U, double t_end,
         std::vector<SpikeRecord>& emitted);

// Add delta to the phases.  Requires an empty in-flight queue.  Returns true when the
// perturbation is admissible (max - min spread below tau); inadmissible perturbations are
// still applied, callers decide how loudly to warn.
bool perturb(SimulatorState& state, const Eigen::VectorXd& delta);

// Simultaneous external pulse of the given strength to every oscillator.  Supra-threshold
// recipients reset and emit like any other firing.  Strength 0 is a no-op.
void inject_pulse(SimulatorState& state, const DirectedNetwork& net, const Potential& U,
                  double strength, std::vector<SpikeRecord>& emitted);

// Step until the in-flight queue empties (first quiet instant), but never past t_max.
// Returns true when quiet was reached.
bool drain_in_flight(SimulatorState& state, const DirectedNetwork& net, const Potential& U,
                     double t_max, std::vector<SpikeRecord>& emitted);

}  // namespace synclab
