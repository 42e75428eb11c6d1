#pragma once

#include <Eigen/Dense>
#include <vector>

#include "synclab/simulator.hpp"

namespace synclab {

// Per-neuron firing rate 1 / <ISI> over spikes with time in [t0, t1].  Neurons with fewer
// than two spikes in the window get NaN (undefined, not an error).
Eigen::VectorXd firing_rates(const std::vector<SpikeRecord>& spikes, int n, double t0, double t1);

// Per-neuron coefficient of variation sd(ISI) / <ISI> over the same window, moments taken
// over the ISI population (two-pass, so regular trains report ~0 rather than a sqrt(ulp)
// floor).  Below the two-spike floor the entry is NaN.
Eigen::VectorXd coefficient_of_variation(const std::vector<SpikeRecord>& spikes, int n,
                                         double t0, double t1);

// One firing round: n consecutive spikes in time order.  Well defined only when each
// neuron appears exactly once (complete); a skipped or doubled neuron marks the round
// incomplete and its spread NaN.
struct FiringRound {
  double t_first;
  double t_last;
  bool complete;
};

// Greedy segmentation of the spike stream into rounds of n.  A trailing partial group is
// not a round.
std::vector<FiringRound> spike_rounds(const std::vector<SpikeRecord>& spikes, int n);

// Spread (last minus first spike time) of the given round, NaN when the round does not
// exist or is incomplete.
double spike_spread(const std::vector<SpikeRecord>& spikes, int n, int round);

}  // namespace synclab
